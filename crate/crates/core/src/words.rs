//! Freely reduced words in a free group and one-or-more-relator presentations.
//!
//! Words are run-length encoded: a word is a sequence of syllables
//! `x_g^k` with adjacent syllables on distinct generators and `k != 0`.
//! Exponents are arbitrary-precision so relators such as `x^(2^f)` stay
//! compact.

use alloc::vec::Vec;
use core::fmt;
use core::ops::Mul;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::{Error, Result};

/// A free generator, numbered from zero. It is displayed one-based (`x1`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Gen(pub usize);

impl Gen {
    /// The generator `offset` places further along; used for the tilde copy
    /// in doubles, which maps `x_i` to `x_{i+n}`.
    pub fn shifted(self, offset: usize) -> Gen {
        Gen(self.0 + offset)
    }
}

impl fmt::Display for Gen {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}", self.0 + 1)
    }
}

/// A freely reduced word.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Word {
    syllables: Vec<(Gen, BigInt)>,
}

/// Freely reduces an arbitrary sequence of syllables.
///
/// Zero exponents are dropped and adjacent syllables on the same generator
/// merge, cascading as far as cancellation allows.
pub fn reduce<I, K>(raw: I) -> Word
where
    I: IntoIterator<Item = (Gen, K)>,
    K: Into<BigInt>,
{
    let mut out: Vec<(Gen, BigInt)> = Vec::new();
    for (g, k) in raw {
        let k: BigInt = k.into();
        if k.is_zero() {
            continue;
        }
        match out.last_mut() {
            Some((last, e)) if *last == g => {
                *e += k;
                if e.is_zero() {
                    out.pop();
                }
            }
            _ => out.push((g, k)),
        }
    }
    Word { syllables: out }
}

impl Word {
    pub fn empty() -> Word {
        Word::default()
    }

    pub fn generator(g: Gen) -> Word {
        Word::power(g, 1)
    }

    pub fn power(g: Gen, k: impl Into<BigInt>) -> Word {
        reduce(core::iter::once((g, k.into())))
    }

    pub fn syllables(&self) -> &[(Gen, BigInt)] {
        &self.syllables
    }

    pub fn is_empty(&self) -> bool {
        self.syllables.is_empty()
    }

    /// Number of syllables (not letters).
    pub fn syllable_count(&self) -> usize {
        self.syllables.len()
    }

    /// Sum of the absolute values of the exponents.
    pub fn letter_length(&self) -> BigInt {
        self.syllables.iter().map(|(_, k)| k.abs()).sum()
    }

    /// One more than the largest generator index used, or zero.
    pub fn generator_bound(&self) -> usize {
        self.syllables.iter().map(|(g, _)| g.0 + 1).max().unwrap_or(0)
    }

    pub fn inverse(&self) -> Word {
        Word {
            syllables: self.syllables.iter().rev().map(|(g, k)| (*g, -k)).collect(),
        }
    }

    pub fn concat(&self, other: &Word) -> Word {
        reduce(self.syllables.iter().chain(other.syllables.iter()).cloned())
    }

    /// `self^k` for any integer `k`.
    pub fn pow(&self, k: &BigInt) -> Word {
        if k.is_zero() || self.is_empty() {
            return Word::empty();
        }
        if self.syllables.len() == 1 {
            let (g, e) = &self.syllables[0];
            return Word::power(*g, e * k);
        }
        let base = if k.is_negative() { self.inverse() } else { self.clone() };
        let mut n = k.abs();
        let mut acc = Word::empty();
        let mut sq = base;
        // Square-and-multiply; powers of a word commute, so order is free.
        while !n.is_zero() {
            if (&n & BigInt::one()).is_one() {
                acc = acc.concat(&sq);
            }
            n >>= 1u32;
            if !n.is_zero() {
                sq = sq.concat(&sq);
            }
        }
        acc
    }

    /// Renames every generator through `f`, then reduces.
    pub fn map_generators(&self, mut f: impl FnMut(Gen) -> Gen) -> Word {
        reduce(self.syllables.iter().map(|(g, k)| (f(*g), k.clone())))
    }

    pub fn shifted(&self, offset: usize) -> Word {
        self.map_generators(|g| g.shifted(offset))
    }

    /// Exponent sum of each of the `n` generators.
    pub fn exponent_vector(&self, n: usize) -> Result<Vec<BigInt>> {
        let mut v = alloc::vec![BigInt::zero(); n];
        for (g, k) in &self.syllables {
            let slot = v
                .get_mut(g.0)
                .ok_or(Error::GeneratorOutOfRange { index: g.0, count: n })?;
            *slot += k;
        }
        Ok(v)
    }
}

impl Mul<&Word> for &Word {
    type Output = Word;

    fn mul(self, rhs: &Word) -> Word {
        self.concat(rhs)
    }
}

impl Mul for Word {
    type Output = Word;

    fn mul(self, rhs: Word) -> Word {
        self.concat(&rhs)
    }
}

/// `[u, v] = u^-1 v^-1 u v`.
pub fn commutator(u: &Word, v: &Word) -> Word {
    reduce(
        u.inverse()
            .syllables
            .into_iter()
            .chain(v.inverse().syllables)
            .chain(u.syllables.iter().cloned())
            .chain(v.syllables.iter().cloned()),
    )
}

/// Product of the words in order.
pub fn product<'a>(words: impl IntoIterator<Item = &'a Word>) -> Word {
    reduce(words.into_iter().flat_map(|w| w.syllables.iter().cloned()))
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return f.write_str("1");
        }
        for (i, (g, k)) in self.syllables.iter().enumerate() {
            if i > 0 {
                f.write_str("*")?;
            }
            if k.is_one() {
                write!(f, "{}", g)?;
            } else {
                write!(f, "{}^{}", g, k)?;
            }
        }
        Ok(())
    }
}

/// Trial division; primes here are small.
pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d.saturating_mul(d) <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// A pro-p presentation `<x_1, ..., x_n | relators>`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Presentation {
    p: u64,
    generators: usize,
    relators: Vec<Word>,
}

impl Presentation {
    pub fn new(p: u64, generators: usize, relators: Vec<Word>) -> Result<Presentation> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        for r in &relators {
            let bound = r.generator_bound();
            if bound > generators {
                return Err(Error::GeneratorOutOfRange { index: bound - 1, count: generators });
            }
        }
        Ok(Presentation { p, generators, relators })
    }

    pub fn one_relator(p: u64, generators: usize, relator: Word) -> Result<Presentation> {
        Presentation::new(p, generators, alloc::vec![relator])
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn generator_count(&self) -> usize {
        self.generators
    }

    pub fn relators(&self) -> &[Word] {
        &self.relators
    }

    /// The relator of a one-relator presentation.
    pub fn relator(&self) -> Result<&Word> {
        match self.relators.as_slice() {
            [r] => Ok(r),
            rs => Err(Error::MultiRelator(rs.len())),
        }
    }
}

impl fmt::Display for Presentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<")?;
        for i in 0..self.generators {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{}", Gen(i))?;
        }
        f.write_str(" | ")?;
        for (i, r) in self.relators.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{}", r)?;
        }
        write!(f, "> (p={})", self.p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use proptest::prelude::*;

    fn x(i: usize) -> Gen {
        Gen(i - 1)
    }

    #[test]
    fn cancellation() {
        assert!(reduce([(x(1), 1), (x(1), -1)]).is_empty());
    }

    #[test]
    fn merge_after_cancellation() {
        let w = reduce([(x(1), 2), (x(2), 1), (x(2), -1), (x(1), 1)]);
        assert_eq!(w, Word::power(x(1), 3));
    }

    #[test]
    fn reduced_word_is_fixed() {
        let raw = [(x(2), -1), (x(3), -1), (x(2), 1), (x(3), 1)];
        let w = reduce(raw);
        assert_eq!(w.syllable_count(), 4);
        assert_eq!(w.to_string(), "x2^-1*x3^-1*x2*x3");
    }

    #[test]
    fn commutator_convention() {
        let c = commutator(&Word::generator(x(2)), &Word::generator(x(3)));
        assert_eq!(c, reduce([(x(2), -1), (x(3), -1), (x(2), 1), (x(3), 1)]));
        let a = Word::generator(x(1));
        assert!(commutator(&a, &a).is_empty());
        assert!(commutator(&a, &Word::empty()).is_empty());
    }

    #[test]
    fn exponent_vectors() {
        let a = |i| Word::generator(x(i));
        let w = Word::power(x(1), 2) * commutator(&a(2), &a(3));
        let ev: Vec<i64> = w.exponent_vector(3).unwrap().iter().map(|v| v.try_into().unwrap()).collect();
        assert_eq!(ev, [2, 0, 0]);

        let q = BigInt::from(9);
        let w = Word::power(x(1), q.clone()) * commutator(&a(1), &a(2)) * commutator(&a(3), &a(4));
        assert_eq!(w.exponent_vector(4).unwrap(), [q, 0.into(), 0.into(), 0.into()]);

        let w = product(&[Word::power(x(1), 2), Word::power(x(2), 2), Word::power(x(3), 2)]);
        assert_eq!(w.exponent_vector(3).unwrap(), [2.into(), 2.into(), 2.into()] as [BigInt; 3]);

        assert_eq!(
            w.exponent_vector(2),
            Err(Error::GeneratorOutOfRange { index: 2, count: 2 })
        );
    }

    #[test]
    fn powers() {
        let w = reduce([(x(1), 1), (x(2), 1)]);
        assert_eq!(w.pow(&3.into()), w.concat(&w).concat(&w));
        assert_eq!(w.pow(&(-2).into()), w.inverse().concat(&w.inverse()));
        assert!(w.pow(&0.into()).is_empty());
        assert_eq!(Word::power(x(1), 4).pow(&(-3).into()), Word::power(x(1), -12));
    }

    #[test]
    fn presentation_checks() {
        assert_eq!(Presentation::new(4, 1, Vec::new()), Err(Error::NotPrime(4)));
        let r = Word::generator(x(3));
        assert!(matches!(
            Presentation::one_relator(2, 2, r),
            Err(Error::GeneratorOutOfRange { .. })
        ));
        let free = Presentation::new(3, 2, Vec::new()).unwrap();
        assert_eq!(free.relator(), Err(Error::MultiRelator(0)));
    }

    pub(crate) fn raw_syllables() -> impl Strategy<Value = Vec<(Gen, i64)>> {
        proptest::collection::vec((0usize..4, -3i64..=3).prop_map(|(g, k)| (Gen(g), k)), 0..30)
    }

    proptest! {
        #[test]
        fn reduce_is_idempotent(raw in raw_syllables()) {
            let w = reduce(raw);
            prop_assert_eq!(reduce(w.syllables().iter().cloned()), w.clone());
            for pair in w.syllables().windows(2) {
                prop_assert_ne!(pair[0].0, pair[1].0);
            }
            prop_assert!(w.syllables().iter().all(|(_, k)| !k.is_zero()));
        }

        #[test]
        fn word_times_inverse_is_empty(raw in raw_syllables()) {
            let w = reduce(raw);
            prop_assert!(w.concat(&w.inverse()).is_empty());
        }

        #[test]
        fn exponent_vector_is_additive(u in raw_syllables(), v in raw_syllables()) {
            let (u, v) = (reduce(u), reduce(v));
            let eu = u.exponent_vector(4).unwrap();
            let ev = v.exponent_vector(4).unwrap();
            let euv = u.concat(&v).exponent_vector(4).unwrap();
            for i in 0..4 {
                prop_assert_eq!(&euv[i], &(&eu[i] + &ev[i]));
            }
            let c = commutator(&u, &v).exponent_vector(4).unwrap();
            prop_assert!(c.iter().all(Zero::is_zero));
        }
    }
}
