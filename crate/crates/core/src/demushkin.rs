//! Recognition, classification and standard forms of one-relator Demushkin
//! groups, plus the Baumslag double and the limit-group decision table.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::magnus::{binomial2, class2_coefficients, Class2Form, Torsion};
use crate::orientation::{character_image, solve_orientation, Character};
use crate::padic::{Exponent, PAdicInt, PAdicRing, UnitKind, UnitSubgroup};
use crate::words::{commutator, Gen, Presentation, Word};
use crate::{Error, Result};

/// Cup-product matrix of a class-2 form, reduced mod the form's modulus.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CupMatrix {
    pub modulus: BigInt,
    pub entries: Vec<Vec<BigInt>>,
}

pub fn cup_matrix(form: &Class2Form) -> CupMatrix {
    let n = form.generators();
    let q = BigInt::from(form.torsion.value());
    let diag = -binomial2(&q);
    let m = &form.modulus;
    let mut entries = vec![vec![BigInt::zero(); n]; n];
    for i in 0..n {
        for j in 0..n {
            let v = match i.cmp(&j) {
                core::cmp::Ordering::Less => form.b[i][j].clone(),
                core::cmp::Ordering::Greater => -&form.b[j][i],
                core::cmp::Ordering::Equal => &diag * &form.a[i],
            };
            entries[i][j] = v.mod_floor(m);
        }
    }
    CupMatrix { modulus: m.clone(), entries }
}

/// Exact determinant by fraction-free elimination.
pub fn determinant(m: &[Vec<BigInt>]) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut a = m.to_vec();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            let Some(r) = (k + 1..n).find(|&r| !a[r][k].is_zero()) else {
                return BigInt::zero();
            };
            a.swap(k, r);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = v / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    sign * &a[n - 1][n - 1]
}

impl CupMatrix {
    pub fn dimension(&self) -> usize {
        self.entries.len()
    }

    /// Determinant reduced into `[0, modulus)`.
    pub fn determinant(&self) -> BigInt {
        determinant(&self.entries).mod_floor(&self.modulus)
    }

    /// Invertibility over `Z_p / q`: the determinant is prime to p.
    pub fn is_invertible(&self, p: u64) -> bool {
        !self.determinant().is_multiple_of(&BigInt::from(p))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DemushkinTest {
    pub is_demushkin: bool,
    pub generators: usize,
    pub torsion: Torsion,
    pub cup: CupMatrix,
}

pub fn is_demushkin(pres: &Presentation, precision: u32) -> Result<DemushkinTest> {
    let form = class2_coefficients(pres, precision)?;
    let cup = cup_matrix(&form);
    Ok(DemushkinTest {
        is_demushkin: cup.is_invertible(pres.prime()),
        generators: pres.generator_count(),
        torsion: form.torsion,
        cup,
    })
}

/// A valid invariant triple `(n, q, U)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DemushkinInvariants {
    n: usize,
    torsion: Torsion,
    units: UnitSubgroup,
}

impl DemushkinInvariants {
    /// Checks that `q` is the largest p-power with `U <= 1 + qZ_p`, and that
    /// n is even unless `q = 2`.
    pub fn new(n: usize, torsion: Torsion, units: UnitSubgroup) -> Result<DemushkinInvariants> {
        if torsion.prime() != units.prime() {
            return Err(Error::BadInput(alloc::format!(
                "q is a power of {} but U lives in Z_{}",
                torsion.prime(),
                units.prime()
            )));
        }
        if n == 0 {
            return Err(Error::BadInput(String::from("n must be positive")));
        }
        if torsion.exponent() != units.torsion_exponent() {
            return Err(Error::Inconsistent(alloc::format!("q = {} does not match U = {}", torsion, units)));
        }
        if !torsion.is_two() && n % 2 == 1 {
            return Err(Error::Inconsistent(alloc::format!("odd n = {} needs q = 2", n)));
        }
        Ok(DemushkinInvariants { n, torsion, units })
    }

    pub fn generators(&self) -> usize {
        self.n
    }

    pub fn torsion(&self) -> Torsion {
        self.torsion
    }

    pub fn units(&self) -> UnitSubgroup {
        self.units
    }

    pub fn prime(&self) -> u64 {
        self.units.prime()
    }

    pub fn standard_relation(&self) -> Option<Word> {
        standard_relation(self.n, self.torsion, self.units)
    }
}

fn x(i: usize) -> Word {
    Word::generator(Gen(i - 1))
}

fn xp(i: usize, k: BigInt) -> Word {
    Word::power(Gen(i - 1), k)
}

/// `[x_s, x_(s+1)] [x_(s+2), x_(s+3)] ... [x_(n-1), x_n]`.
fn commutator_tail(start: usize, n: usize) -> Word {
    let mut w = Word::empty();
    let mut i = start;
    while i < n {
        w = w * commutator(&x(i), &x(i + 1));
        i += 2;
    }
    w
}

fn two_pow(f: u32) -> BigInt {
    BigInt::one() << f as usize
}

/// The standard relation `r_1(n, q, U)`, or `None` where it is undefined.
///
/// For `U = <-1, 1+2^f>` with finite f the relation needs a second power
/// syllable, so n = 1 and n = 2 only occur with `U = <-1>`.
pub fn standard_relation(n: usize, q: Torsion, u: UnitSubgroup) -> Option<Word> {
    if n == 0 || q.prime() != u.prime() {
        return None;
    }
    let even = n % 2 == 0;
    if !q.is_two() {
        let matches = match (q.exponent(), u.kind()) {
            (None, UnitKind::Trivial) => true,
            (Some(f), UnitKind::Level(g)) => f == g,
            _ => false,
        };
        if !even || !matches {
            return None;
        }
        return Some(xp(1, BigInt::from(q.value())) * commutator_tail(1, n));
    }
    match (even, u.kind()) {
        (true, UnitKind::NegCyclic(f)) => Some(xp(1, BigInt::from(2) + two_pow(f)) * commutator_tail(1, n)),
        (true, UnitKind::NegSplit(Exponent::Infinite)) => Some(xp(1, 2.into()) * commutator_tail(1, n)),
        (true, UnitKind::NegSplit(Exponent::Finite(f))) if n >= 4 => Some(
            xp(1, 2.into()) * commutator(&x(1), &x(2)) * xp(3, two_pow(f)) * commutator(&x(3), &x(4)) * commutator_tail(5, n),
        ),
        (false, UnitKind::NegSplit(Exponent::Infinite)) => Some(xp(1, 2.into()) * commutator_tail(2, n)),
        (false, UnitKind::NegSplit(Exponent::Finite(f))) if n >= 3 => {
            Some(xp(1, 2.into()) * xp(2, two_pow(f)) * commutator_tail(2, n))
        }
        _ => None,
    }
}

/// Closed-form orientation character of `r_1(n, q, U)` modulo `p^K`.
pub fn standard_character(inv: &DemushkinInvariants, ring: PAdicRing) -> Result<Character> {
    inv.standard_relation().ok_or(Error::UndefinedRelation)?;
    let one = ring.one();
    let mut values = vec![one; inv.n];
    let two_f = |f: u32| ring.p_power(f);
    match inv.units.kind() {
        UnitKind::Trivial => {}
        UnitKind::Level(_) => {
            let q = ring.from_bigint(&BigInt::from(inv.torsion.value()));
            values[1] = (one - q).unit_inverse()?;
        }
        UnitKind::NegCyclic(f) => values[1] = (-one - two_f(f)).unit_inverse()?,
        UnitKind::NegSplit(e) => {
            let (neg, tail) = if inv.n % 2 == 0 { (1, 3) } else { (0, 2) };
            values[neg] = -one;
            if let Exponent::Finite(f) = e {
                values[tail] = (one - two_f(f)).unit_inverse()?;
            }
        }
    }
    Character::new(ring, values)
}

/// Invariants, orientation character and canonical presentation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Classification {
    pub invariants: DemushkinInvariants,
    pub character: Character,
    pub canonical: Presentation,
}

pub fn classify(pres: &Presentation, precision: u32) -> Result<Classification> {
    let test = is_demushkin(pres, precision)?;
    if !test.is_demushkin {
        return Err(Error::NotDemushkin);
    }
    let character = solve_orientation(pres, precision)?;
    let units = character_image(&character)?;
    if test.torsion.exponent() != units.torsion_exponent() {
        if test.torsion.exponent().is_some_and(|f| f >= precision) {
            return Err(Error::InsufficientPrecision);
        }
        return Err(Error::Inconsistent(alloc::format!(
            "q = {} but the character image is {}",
            test.torsion,
            units
        )));
    }
    let invariants = DemushkinInvariants::new(test.generators, test.torsion, units)?;
    let relator = invariants.standard_relation().ok_or(Error::UndefinedRelation)?;
    let canonical = Presentation::one_relator(pres.prime(), test.generators, relator)?;
    Ok(Classification { invariants, character, canonical })
}

/// The double `<x, x~ | r r~^-1>`, with `x~_i = x_(i+n)`.
pub fn double(pres: &Presentation) -> Result<Presentation> {
    let n = pres.generator_count();
    let r = pres.relator()?;
    Presentation::one_relator(pres.prime(), 2 * n, r.concat(&r.shifted(n).inverse()))
}

/// Generator count `m = 2 - index (2 - n_H)` of a subgroup `U` of the given
/// index in a group with `n_H` generators.
pub fn subgroup_generators_from_index(n_h: u64, index: u64) -> Result<u64> {
    if n_h < 2 {
        return Err(Error::BadInput(alloc::format!("n_H = {} is below 2", n_h)));
    }
    index
        .checked_mul(n_h - 2)
        .and_then(|v| v.checked_add(2))
        .ok_or_else(|| Error::BadInput(String::from("generator count overflows")))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CorQ2 {
    pub s: u32,
    pub l: u64,
    /// Generator count `4l` of the auxiliary group.
    pub auxiliary_generators: u64,
}

/// Writes `d - 1 = 2^s (2l - 1)` for `n = 2d` with d odd and above 1.
pub fn cor_q2_parameters(n: u64) -> Result<CorQ2> {
    let d = n / 2;
    if n % 2 == 1 || d % 2 == 0 || d <= 1 {
        return Err(Error::BadInput(alloc::format!("n = {} is not twice an odd d > 1", n)));
    }
    let s = (d - 1).trailing_zeros();
    let l = ((d - 1) >> s).div_ceil(2);
    let auxiliary_generators = 4 * l;
    let m = subgroup_generators_from_index(auxiliary_generators, 1u64 << s)?;
    if m != n {
        return Err(Error::Inconsistent(alloc::format!("index formula gives {} generators, expected {}", m, n)));
    }
    Ok(CorQ2 { s, l, auxiliary_generators })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Tri {
    Yes,
    No,
    Unknown,
}

impl core::fmt::Display for Tri {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(match self {
            Tri::Yes => "yes",
            Tri::No => "no",
            Tri::Unknown => "unknown",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LimitStatus {
    pub is_limit: Tri,
    pub residually_free: Tri,
    /// Short tag naming the rule that fired.
    pub justification: &'static str,
    /// Set when the group is fully residually free, not just residually free.
    pub note: Option<&'static str>,
}

/// Whether the Demushkin group is a pro-p limit group, and whether it is
/// residually free pro-p.
pub fn limit_status(inv: &DemushkinInvariants) -> LimitStatus {
    let n = inv.n;
    let status = |t, justification, note| LimitStatus { is_limit: t, residually_free: t, justification, note };
    let fully = Some("fully residually free");
    if n % 4 == 0 {
        status(Tri::Yes, "n-divisible-by-4", fully)
    } else if inv.prime() == 2 && n > 2 && n % 2 == 0 {
        status(Tri::Yes, "p2-even-n", fully)
    } else if inv.prime() == 2 && n == 3 && inv.torsion.is_two() && inv.units == UnitSubgroup::minus_one() {
        status(Tri::No, "d-not-residually-free", None)
    } else if n == 2 && inv.units.kind() == UnitKind::Trivial {
        status(Tri::Yes, "two-generator-limit-is-Zp2", None)
    } else if n <= 2 {
        status(Tri::No, "non-abelian-image-needed", None)
    } else {
        status(Tri::Unknown, "outside-known-cases", None)
    }
}

/// Every defined `(n, q, U)` with `n <= max_n`, p in {2, 3, 5}, q among
/// `0, p, p^2` (and `2, 4, 8` for p = 2), and f in {2, 3, inf}.
pub fn standard_family(max_n: usize) -> Vec<DemushkinInvariants> {
    let mut out = Vec::new();
    for p in [2u64, 3, 5] {
        let mut shapes: Vec<(Torsion, UnitKind)> = vec![(Torsion::zero(p), UnitKind::Trivial)];
        if p == 2 {
            shapes.push((Torsion::power(2, 2), UnitKind::Level(2)));
            shapes.push((Torsion::power(2, 3), UnitKind::Level(3)));
            for f in [2, 3] {
                shapes.push((Torsion::power(2, 1), UnitKind::NegCyclic(f)));
                shapes.push((Torsion::power(2, 1), UnitKind::NegSplit(Exponent::Finite(f))));
            }
            shapes.push((Torsion::power(2, 1), UnitKind::NegSplit(Exponent::Infinite)));
        } else {
            shapes.push((Torsion::power(p, 1), UnitKind::Level(1)));
            shapes.push((Torsion::power(p, 2), UnitKind::Level(2)));
        }
        for n in 1..=max_n {
            for &(q, kind) in &shapes {
                let Ok(u) = UnitSubgroup::new(p, kind) else { continue };
                if let Ok(inv) = DemushkinInvariants::new(n, q, u) {
                    if inv.standard_relation().is_some() {
                        out.push(inv);
                    }
                }
            }
        }
    }
    out
}

/// Values of `chi` as signed residues, for compact comparisons.
pub fn signed_values(chi: &Character) -> Vec<i128> {
    chi.values().iter().map(PAdicInt::signed_residue).collect()
}
