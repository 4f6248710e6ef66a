use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

/// Every failure the library can report.
///
/// Internal-consistency variants (`NoSolution`, `MultipleSolutions`,
/// `Inconsistent`) should never be produced by a genuine Demushkin input at
/// adequate precision; they exist so that a bug or an undersized precision
/// surfaces as an error instead of a wrong answer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Error {
    /// A word mentions a generator the presentation does not have.
    GeneratorOutOfRange { index: usize, count: usize },
    /// The modulus is not prime.
    NotPrime(u64),
    /// An operation that needs exactly one relator got a different number.
    MultiRelator(usize),
    /// The relator is not contained in the Frattini subgroup.
    NonMinimal,
    /// The residue is divisible by p.
    NonUnit,
    /// `p^K` does not fit in 64 bits, or `K` is zero.
    PrecisionOutOfRange { p: u64, precision: u32 },
    /// Two p-adic values with different `(p, K)` were combined.
    RingMismatch,
    /// The answer depends on digits beyond the working precision.
    InsufficientPrecision,
    /// For odd p a unit outside `1 + pZ_p` cannot lie in a pro-p image.
    NotProP,
    /// The presentation fails the cup-product criterion.
    NotDemushkin,
    /// The character equations have no unit solution.
    NoSolution,
    /// The character equations have several solutions at this precision.
    MultipleSolutions(usize),
    /// Two independently computed invariants disagree.
    Inconsistent(String),
    /// A parameter outside the documented domain.
    BadInput(String),
    /// A standard relation was requested for a triple where it is undefined.
    UndefinedRelation,
    /// The chosen edge set is not a spanning tree.
    NotSpanningTree,
    /// A boundary map does not have one word per edge-group generator.
    BoundaryLength { edge: usize, expected: usize, found: usize },
    /// A subgroup closure exceeded its size cap.
    ClosureTooLarge(usize),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::GeneratorOutOfRange { index, count } => {
                write!(f, "generator x{} out of range for {} generators", index + 1, count)
            }
            Error::NotPrime(p) => write!(f, "{} is not prime", p),
            Error::MultiRelator(k) => write!(f, "expected exactly one relator, found {}", k),
            Error::NonMinimal => f.write_str("relator is not in the Frattini subgroup"),
            Error::NonUnit => f.write_str("value is not a p-adic unit"),
            Error::PrecisionOutOfRange { p, precision } => {
                write!(f, "precision {}^{} is out of range", p, precision)
            }
            Error::RingMismatch => f.write_str("p-adic values with different (p, K) mixed"),
            Error::InsufficientPrecision => f.write_str("insufficient p-adic precision"),
            Error::NotProP => f.write_str("unit not in 1 + pZ_p"),
            Error::NotDemushkin => f.write_str("cup-product matrix is not invertible"),
            Error::NoSolution => f.write_str("orientation equations have no solution"),
            Error::MultipleSolutions(k) => {
                write!(f, "orientation equations have {} solutions at this precision", k)
            }
            Error::Inconsistent(msg) => write!(f, "internal inconsistency: {}", msg),
            Error::BadInput(msg) => write!(f, "bad input: {}", msg),
            Error::UndefinedRelation => f.write_str("standard relation is undefined"),
            Error::NotSpanningTree => f.write_str("edge set is not a spanning tree"),
            Error::BoundaryLength { edge, expected, found } => write!(
                f,
                "edge {}: boundary map has {} words, edge group has {} generators",
                edge, found, expected
            ),
            Error::ClosureTooLarge(cap) => write!(f, "subgroup closure exceeds {} elements", cap),
        }
    }
}

impl core::error::Error for Error {}
