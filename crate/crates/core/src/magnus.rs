//! Degree-2 Magnus expansion and the class-2 shape of a relator.
//!
//! A relator `r` of a minimal one-relator presentation lies in the second
//! term of the lower q-central series, and modulo the third term
//!
//! ```text
//! r = x_1^(q a_1) ... x_n^(q a_n) * prod_{i<j} [x_i, x_j]^(b_ij)
//! ```
//!
//! for unique `a_i, b_ij` in `Z_p / q Z_p`. [`class2_coefficients`] reads
//! them off the exact Magnus expansion; [`collect_class2`] recomputes them
//! by commutator collection, sharing no code with the Magnus route.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::Mul;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Pow, Zero};

use crate::snf::invariant_factors;
use crate::words::{Gen, Presentation, Word};
use crate::{Error, Result};

/// The torsion invariant `q`: zero, or a power `p^f`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Torsion {
    p: u64,
    exponent: Option<u32>,
}

impl Torsion {
    pub fn zero(p: u64) -> Torsion {
        Torsion { p, exponent: None }
    }

    pub fn power(p: u64, f: u32) -> Torsion {
        Torsion { p, exponent: Some(f) }
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    /// `f` with `q = p^f`, or `None` for `q = 0`.
    pub fn exponent(&self) -> Option<u32> {
        self.exponent
    }

    pub fn is_zero(&self) -> bool {
        self.exponent.is_none()
    }

    /// True for `q = 2`, the case with its own standard relations.
    pub fn is_two(&self) -> bool {
        self.p == 2 && self.exponent == Some(1)
    }

    pub fn value(&self) -> BigUint {
        match self.exponent {
            None => BigUint::zero(),
            Some(f) => BigUint::from(self.p).pow(f),
        }
    }
}

impl fmt::Display for Torsion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value())
    }
}

/// Truncation of the Magnus image `1 + sum e_i X_i + sum c_ij X_i X_j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Degree2Expansion {
    /// Degree-1 coefficients; equal to the exponent vector.
    pub linear: Vec<BigInt>,
    /// `quadratic[i][j]` is the coefficient of `X_i X_j`.
    pub quadratic: Vec<Vec<BigInt>>,
}

impl Degree2Expansion {
    pub fn identity(n: usize) -> Degree2Expansion {
        Degree2Expansion { linear: vec![BigInt::zero(); n], quadratic: vec![vec![BigInt::zero(); n]; n] }
    }

    /// Image of `x_g^k`: `(1 + X_g)^k = 1 + k X_g + C(k,2) X_g^2`, valid for
    /// negative `k` as well.
    pub fn syllable(n: usize, g: Gen, k: &BigInt) -> Degree2Expansion {
        let mut out = Degree2Expansion::identity(n);
        out.linear[g.0] = k.clone();
        out.quadratic[g.0][g.0] = (k * (k - 1u32)) / 2u32;
        out
    }

    pub fn generators(&self) -> usize {
        self.linear.len()
    }
}

impl Mul for &Degree2Expansion {
    type Output = Degree2Expansion;

    fn mul(self, rhs: &Degree2Expansion) -> Degree2Expansion {
        let n = self.generators();
        assert_eq!(n, rhs.generators());
        let mut out = Degree2Expansion::identity(n);
        for i in 0..n {
            out.linear[i] = &self.linear[i] + &rhs.linear[i];
            for j in 0..n {
                out.quadratic[i][j] =
                    &self.quadratic[i][j] + &rhs.quadratic[i][j] + &self.linear[i] * &rhs.linear[j];
            }
        }
        out
    }
}

/// Exact Magnus expansion of `w` modulo terms of degree three.
pub fn magnus_degree2(w: &Word, n: usize) -> Result<Degree2Expansion> {
    let mut acc = Degree2Expansion::identity(n);
    for (g, k) in w.syllables() {
        if g.0 >= n {
            return Err(Error::GeneratorOutOfRange { index: g.0, count: n });
        }
        acc = &acc * &Degree2Expansion::syllable(n, *g, k);
    }
    Ok(acc)
}

fn p_valuation(v: &BigInt, p: u64) -> Option<u32> {
    if v.is_zero() {
        return None;
    }
    let p = BigInt::from(p);
    let mut v = v.clone();
    let mut k = 0;
    while v.is_multiple_of(&p) {
        v /= &p;
        k += 1;
    }
    Some(k)
}

fn torsion_of_exponents(p: u64, e: &[BigInt]) -> Torsion {
    match e.iter().filter_map(|v| p_valuation(v, p)).min() {
        None => Torsion::zero(p),
        Some(f) => Torsion::power(p, f),
    }
}

/// The torsion invariant of a one-relator presentation.
///
/// A relator outside the Frattini subgroup yields `q = p^0 = 1`.
pub fn torsion_invariant(pres: &Presentation) -> Result<Torsion> {
    let r = pres.relator()?;
    let e = r.exponent_vector(pres.generator_count())?;
    Ok(torsion_of_exponents(pres.prime(), &e))
}

/// The coefficients `(q, a, b)` of a relator modulo the third term of the
/// lower q-central series.
///
/// Residues are taken modulo `q`, or modulo `p^K` when `q = 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Class2Form {
    pub torsion: Torsion,
    /// `q`, or `p^K` when `q = 0`.
    pub modulus: BigInt,
    pub a: Vec<BigInt>,
    /// Full square matrix; only entries with `i < j` are nonzero.
    pub b: Vec<Vec<BigInt>>,
}

impl Class2Form {
    pub fn generators(&self) -> usize {
        self.a.len()
    }
}

fn form_modulus(torsion: Torsion, precision: u32) -> Result<BigInt> {
    if precision == 0 {
        return Err(Error::PrecisionOutOfRange { p: torsion.p, precision });
    }
    Ok(match torsion.exponent {
        Some(_) => BigInt::from(torsion.value()),
        None => BigInt::from(torsion.p).pow(precision),
    })
}

fn check_minimal(p: u64, e: &[BigInt]) -> Result<()> {
    let p = BigInt::from(p);
    if e.iter().all(|v| v.is_multiple_of(&p)) {
        Ok(())
    } else {
        Err(Error::NonMinimal)
    }
}

/// Class-2 coefficients by way of the Magnus expansion.
pub fn class2_coefficients(pres: &Presentation, precision: u32) -> Result<Class2Form> {
    let n = pres.generator_count();
    let r = pres.relator()?;
    let expansion = magnus_degree2(r, n)?;
    check_minimal(pres.prime(), &expansion.linear)?;
    let torsion = torsion_of_exponents(pres.prime(), &expansion.linear);
    let modulus = form_modulus(torsion, precision)?;
    let a = match torsion.exponent {
        None => vec![BigInt::zero(); n],
        Some(_) => expansion.linear.iter().map(|e| (e / &modulus).mod_floor(&modulus)).collect(),
    };
    let mut b = vec![vec![BigInt::zero(); n]; n];
    for i in 0..n {
        for j in i + 1..n {
            b[i][j] = expansion.quadratic[i][j].mod_floor(&modulus);
        }
    }
    Ok(Class2Form { torsion, modulus, a, b })
}

/// Exact normal form `x_1^(e_1) ... x_n^(e_n) prod_{i<j} [x_i,x_j]^(c_ij)`
/// of a word in the free nilpotent group of class 2.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CollectedWord {
    pub exponents: Vec<BigInt>,
    /// Upper triangle holds `c_ij` for `i < j`; the rest stays zero.
    pub commutators: Vec<Vec<BigInt>>,
}

/// Collects `w` by pushing each incoming syllable `x_g^k` left past the
/// larger generators, recording `x_j^a x_g^k = x_g^k x_j^a [x_g, x_j]^(-ak)`.
pub fn collect(w: &Word, n: usize) -> Result<CollectedWord> {
    let mut exponents = vec![BigInt::zero(); n];
    let mut commutators = vec![vec![BigInt::zero(); n]; n];
    for (g, k) in w.syllables() {
        let g = g.0;
        if g >= n {
            return Err(Error::GeneratorOutOfRange { index: g, count: n });
        }
        for j in g + 1..n {
            if !exponents[j].is_zero() {
                commutators[g][j] -= &exponents[j] * k;
            }
        }
        exponents[g] += k;
    }
    Ok(CollectedWord { exponents, commutators })
}

/// Class-2 coefficients by commutator collection.
pub fn collect_class2(w: &Word, p: u64, n: usize, precision: u32) -> Result<Class2Form> {
    let c = collect(w, n)?;
    check_minimal(p, &c.exponents)?;
    let torsion = torsion_of_exponents(p, &c.exponents);
    let modulus = form_modulus(torsion, precision)?;
    let a = match torsion.exponent {
        None => vec![BigInt::zero(); n],
        Some(_) => c.exponents.iter().map(|e| e.div_floor(&modulus).mod_floor(&modulus)).collect(),
    };
    let b = c
        .commutators
        .iter()
        .map(|row| row.iter().map(|v| v.mod_floor(&modulus)).collect())
        .collect();
    Ok(Class2Form { torsion, modulus, a, b })
}

/// The pro-p abelianization `Z_p^rank x prod Z/t`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Abelianization {
    /// p-power torsion factors, largest first.
    pub torsion: Vec<BigUint>,
    pub free_rank: usize,
}

/// Smith normal form of the relator exponent matrix, localized at p.
pub fn abelianization(pres: &Presentation) -> Result<Abelianization> {
    let n = pres.generator_count();
    let rows = pres
        .relators()
        .iter()
        .map(|r| r.exponent_vector(n))
        .collect::<Result<Vec<_>>>()?;
    let factors = invariant_factors(rows);
    let p = BigUint::from(pres.prime());
    let mut torsion: Vec<BigUint> = factors
        .iter()
        .filter_map(|d| p_valuation(d, pres.prime()))
        .filter(|v| *v > 0)
        .map(|v| Pow::pow(&p, v))
        .collect();
    torsion.sort_unstable_by(|a, b| b.cmp(a));
    Ok(Abelianization { torsion, free_rank: n - factors.len() })
}

/// The integer `C(k, 2) = k(k-1)/2`.
pub fn binomial2(k: &BigInt) -> BigInt {
    (k * (k - BigInt::one())) / 2u32
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::words::{commutator, product, reduce};
    use proptest::prelude::*;

    fn x(i: usize) -> Word {
        Word::generator(Gen(i - 1))
    }

    fn xp(i: usize, k: i64) -> Word {
        Word::power(Gen(i - 1), k)
    }

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|x| BigInt::from(*x)).collect()
    }

    /// Independent truncated-power-series oracle: dense multiplication of
    /// `(1, e, C)` triples written out term by term.
    fn series_oracle(w: &Word, n: usize) -> (Vec<i64>, Vec<Vec<i64>>) {
        let mut e = vec![0i64; n];
        let mut c = vec![vec![0i64; n]; n];
        for (g, k) in w.syllables() {
            let k: i64 = k.try_into().unwrap();
            let step: (i64, i64) = if k > 0 { (1, 0) } else { (-1, 1) };
            // Multiply by the single letter k.abs() times.
            for _ in 0..k.abs() {
                let (lin, quad) = step;
                for i in 0..n {
                    c[i][g.0] += e[i] * lin;
                }
                c[g.0][g.0] += quad;
                e[g.0] += lin;
            }
        }
        (e, c)
    }

    #[test]
    fn commutator_expansion() {
        let m = magnus_degree2(&commutator(&x(1), &x(2)), 2).unwrap();
        assert_eq!(m.linear, ints(&[0, 0]));
        assert_eq!(m.quadratic, vec![ints(&[0, 1]), ints(&[-1, 0])]);
        let (e, c) = series_oracle(&commutator(&x(1), &x(2)), 2);
        assert_eq!((e, c), (vec![0, 0], vec![vec![0, 1], vec![-1, 0]]));
    }

    #[test]
    fn power_expansion() {
        for q in [2i64, 3, 4, 9, -5] {
            let m = magnus_degree2(&xp(1, q), 1).unwrap();
            assert_eq!(m.linear, ints(&[q]));
            assert_eq!(m.quadratic[0][0], BigInt::from(q * (q - 1) / 2));
        }
    }

    #[test]
    fn a2b2c2_expansion() {
        let w = product(&[xp(1, 2), xp(2, 2), xp(3, 2)]);
        let m = magnus_degree2(&w, 3).unwrap();
        assert_eq!(m.linear, ints(&[2, 2, 2]));
        assert_eq!(m.quadratic, vec![ints(&[1, 4, 4]), ints(&[0, 1, 4]), ints(&[0, 0, 1])]);
        let (_, c) = series_oracle(&w, 3);
        assert_eq!(c, vec![vec![1, 4, 4], vec![0, 1, 4], vec![0, 0, 1]]);
    }

    fn one_rel(p: u64, n: usize, r: Word) -> Presentation {
        Presentation::one_relator(p, n, r).unwrap()
    }

    #[test]
    fn torsion_invariants() {
        let d = one_rel(2, 3, xp(1, 2) * commutator(&x(2), &x(3)));
        assert_eq!(torsion_invariant(&d).unwrap(), Torsion::power(2, 1));
        let s = one_rel(3, 4, commutator(&x(1), &x(2)) * commutator(&x(3), &x(4)));
        assert_eq!(torsion_invariant(&s).unwrap(), Torsion::zero(3));
        let t = one_rel(5, 2, xp(1, 5) * commutator(&x(1), &x(2)));
        assert_eq!(torsion_invariant(&t).unwrap(), Torsion::power(5, 1));
        let free = Presentation::new(2, 2, Vec::new()).unwrap();
        assert_eq!(torsion_invariant(&free), Err(Error::MultiRelator(0)));
    }

    #[test]
    fn standard_shape_coefficients() {
        for (p, q) in [(3u64, 3i64), (3, 9), (5, 25)] {
            let r = xp(1, q) * commutator(&x(1), &x(2)) * commutator(&x(3), &x(4));
            let form = class2_coefficients(&one_rel(p, 4, r), 16).unwrap();
            assert_eq!(form.a, ints(&[1, 0, 0, 0]));
            let mut b = vec![vec![BigInt::zero(); 4]; 4];
            b[0][1] = 1.into();
            b[2][3] = 1.into();
            assert_eq!(form.b, b);
        }
    }

    #[test]
    fn a2b2c2_coefficients() {
        let w = product(&[xp(1, 2), xp(2, 2), xp(3, 2)]);
        let form = class2_coefficients(&one_rel(2, 3, w), 16).unwrap();
        assert_eq!(form.torsion, Torsion::power(2, 1));
        assert_eq!(form.a, ints(&[1, 1, 1]));
        assert!(form.b.iter().flatten().all(Zero::is_zero));
    }

    #[test]
    fn non_minimal_relator() {
        assert_eq!(class2_coefficients(&one_rel(2, 1, x(1)), 16), Err(Error::NonMinimal));
        assert_eq!(collect_class2(&x(1), 2, 1, 16), Err(Error::NonMinimal));
    }

    #[test]
    fn zero_torsion_lives_mod_p_power() {
        let r = commutator(&x(1), &x(2)).pow(&(-3).into());
        let form = class2_coefficients(&one_rel(3, 2, r), 4).unwrap();
        assert!(form.torsion.is_zero());
        assert_eq!(form.modulus, BigInt::from(81));
        assert_eq!(form.b[0][1], BigInt::from(78));
        assert_eq!(form.a, ints(&[0, 0]));
    }

    #[test]
    fn collection_examples() {
        let form = collect_class2(&commutator(&x(1), &x(2)), 3, 2, 16).unwrap();
        assert_eq!(form.a, ints(&[0, 0]));
        assert_eq!(form.b[0][1], BigInt::from(1));

        let swapped = collect(&(x(2) * x(1)), 2).unwrap();
        assert_eq!(swapped.exponents, ints(&[1, 1]));
        assert_eq!(swapped.commutators[0][1], BigInt::from(-1));
    }

    #[test]
    fn abelianizations() {
        let d = one_rel(2, 3, xp(1, 2) * commutator(&x(2), &x(3)));
        let ab = abelianization(&d).unwrap();
        assert_eq!(ab.torsion, vec![BigUint::from(2u32)]);
        assert_eq!(ab.free_rank, 2);

        let free = Presentation::new(2, 3, Vec::new()).unwrap();
        assert_eq!(abelianization(&free).unwrap(), Abelianization { torsion: vec![], free_rank: 3 });

        let two = Presentation::new(2, 2, vec![xp(1, 4), xp(2, 2)]).unwrap();
        let ab = abelianization(&two).unwrap();
        assert_eq!(ab.torsion, vec![BigUint::from(4u32), BigUint::from(2u32)]);
        assert_eq!(ab.free_rank, 0);

        // Only the 3-part of 6 survives at p = 3.
        let mixed = Presentation::new(3, 1, vec![xp(1, 6)]).unwrap();
        assert_eq!(abelianization(&mixed).unwrap().torsion, vec![BigUint::from(3u32)]);
    }

    pub(crate) fn word_strategy(n: usize, len: usize) -> impl Strategy<Value = Word> {
        proptest::collection::vec((0..n, prop_oneof![-2i64..=-1, 1i64..=2]), 0..len)
            .prop_map(|raw| reduce(raw.into_iter().map(|(g, k)| (Gen(g), k))))
    }

    /// Forces the exponent vector into `qZ` by appending powers, so the
    /// word is a valid minimal relator for torsion dividing `q`.
    fn make_minimal(w: &Word, n: usize, q: i64) -> Word {
        let e = w.exponent_vector(n).unwrap();
        let mut out = w.clone();
        for (i, v) in e.iter().enumerate() {
            let v: i64 = v.try_into().unwrap();
            let fix = (-v).rem_euclid(q);
            out = out * Word::power(Gen(i), fix);
        }
        out
    }

    proptest! {
        #[test]
        fn expansion_is_multiplicative(u in word_strategy(4, 20), v in word_strategy(4, 20)) {
            let mu = magnus_degree2(&u, 4).unwrap();
            let mv = magnus_degree2(&v, 4).unwrap();
            let muv = magnus_degree2(&u.concat(&v), 4).unwrap();
            for i in 0..4 {
                for j in 0..4 {
                    prop_assert_eq!(&muv.quadratic[i][j],
                        &(&mu.quadratic[i][j] + &mv.quadratic[i][j] + &mu.linear[i] * &mv.linear[j]));
                }
            }
            let (e, c) = series_oracle(&u, 4);
            prop_assert_eq!(mu.linear, ints(&e));
            prop_assert_eq!(mu.quadratic, c.iter().map(|r| ints(r)).collect::<Vec<_>>());
        }

        #[test]
        fn magnus_and_collection_agree(w in word_strategy(5, 40), q in prop_oneof![Just((2u64, 2i64)), Just((2, 4)), Just((3, 3)), Just((3, 9))]) {
            let (p, qv) = q;
            let r = make_minimal(&w, 5, qv);
            let pres = one_rel(p, 5, r.clone());
            prop_assert_eq!(class2_coefficients(&pres, 16).unwrap(), collect_class2(&r, p, 5, 16).unwrap());
        }

        #[test]
        fn third_term_is_invisible(w in word_strategy(4, 12), u in word_strategy(4, 8), v in word_strategy(4, 8)) {
            // r lies in F_2 for q = 4; u^4-factors and commutators with F_2
            // elements lie in F_3 and must not move the coefficients.
            let q = 4i64;
            let r = make_minimal(&w, 4, q);
            let f2 = make_minimal(&u, 4, q);
            let base = class2_coefficients(&one_rel(2, 4, r.clone()), 16).unwrap();
            if base.torsion != Torsion::power(2, 2) {
                return Ok(());
            }
            let extra = commutator(&f2, &v) * f2.pow(&q.into());
            let moved = class2_coefficients(&one_rel(2, 4, r * extra), 16).unwrap();
            prop_assert_eq!(moved, base);
        }

        #[test]
        fn abelianization_matches_torsion(w in word_strategy(4, 20), q in prop_oneof![Just((2u64, 2i64)), Just((3, 9)), Just((5, 5))]) {
            let r = make_minimal(&w, 4, q.1);
            let pres = one_rel(q.0, 4, r);
            let t = torsion_invariant(&pres).unwrap();
            let ab = abelianization(&pres).unwrap();
            if t.is_zero() {
                prop_assert_eq!(ab, Abelianization { torsion: vec![], free_rank: 4 });
            } else {
                prop_assert_eq!(ab, Abelianization { torsion: vec![t.value()], free_rank: 3 });
            }
        }
    }
}
