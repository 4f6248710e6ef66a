//! Twisted Fox calculus and the orientation character of a Demushkin group.
//!
//! For a character `chi` of the free group, `D_i` is the derivation into
//! `Z_p` (with `chi` acting) that sends `x_i` to 1 and the other generators
//! to 0:
//!
//! ```text
//! D(uv) = D(u) + chi(u) D(v),    D(x^-1) = -chi(x)^-1 D(x).
//! ```
//!
//! The orientation character of `<x_1..x_n | r>` is the unique `chi` with
//! `D_i(r) = 0` for every `i`. [`solve_orientation`] finds it by lifting
//! one p-adic digit at a time.

use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::Signed;

use crate::demushkin::is_demushkin;
use crate::padic::{unit_subgroup_normalize, PAdicInt, PAdicRing, UnitSubgroup, Valuation};
use crate::words::{Presentation, Word};
use crate::{Error, Result};

/// Values of a character on the free generators.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Character {
    ring: PAdicRing,
    values: Vec<PAdicInt>,
    inverses: Vec<PAdicInt>,
}

impl Character {
    pub fn new(ring: PAdicRing, values: Vec<PAdicInt>) -> Result<Character> {
        let inverses = values
            .iter()
            .map(|v| if v.ring() == ring { v.unit_inverse() } else { Err(Error::RingMismatch) })
            .collect::<Result<Vec<_>>>()?;
        Ok(Character { ring, values, inverses })
    }

    pub fn trivial(ring: PAdicRing, n: usize) -> Character {
        Character { ring, values: vec![ring.one(); n], inverses: vec![ring.one(); n] }
    }

    pub fn ring(&self) -> PAdicRing {
        self.ring
    }

    pub fn values(&self) -> &[PAdicInt] {
        &self.values
    }

    pub fn generator_count(&self) -> usize {
        self.values.len()
    }

    fn syllable_value(&self, g: usize, k: &BigInt) -> PAdicInt {
        if k.is_negative() {
            self.inverses[g].pow_u(k.magnitude())
        } else {
            self.values[g].pow_u(k.magnitude())
        }
    }

    /// `chi(w)`.
    pub fn evaluate(&self, w: &Word) -> PAdicInt {
        w.syllables()
            .iter()
            .fold(self.ring.one(), |acc, (g, k)| acc * self.syllable_value(g.0, k))
    }
}

/// `D_g(x_g^k)`: the geometric sum `1 + u + ... + u^(k-1)` for `k > 0`, and
/// `-u^k (1 + u + ... + u^(|k|-1))` for `k < 0`.
fn syllable_derivative(chi: &Character, g: usize, k: &BigInt) -> PAdicInt {
    let sum = chi.values[g].geometric_sum(k.magnitude());
    if k.is_negative() {
        -(chi.syllable_value(g, k) * sum)
    } else {
        sum
    }
}

/// `D_i(w)` for every generator `i` simultaneously.
///
/// Panics if `w` uses a generator the character does not cover.
pub fn twisted_fox_all(w: &Word, chi: &Character) -> Vec<PAdicInt> {
    let mut d = vec![chi.ring.zero(); chi.generator_count()];
    let mut prefix = chi.ring.one();
    for (g, k) in w.syllables() {
        d[g.0] = d[g.0] + prefix * syllable_derivative(chi, g.0, k);
        prefix = prefix * chi.syllable_value(g.0, k);
    }
    d
}

/// `D_i(w)`.
pub fn twisted_fox(w: &Word, i: usize, chi: &Character) -> PAdicInt {
    let mut acc = chi.ring.zero();
    let mut prefix = chi.ring.one();
    for (g, k) in w.syllables() {
        if g.0 == i {
            acc = acc + prefix * syllable_derivative(chi, g.0, k);
        }
        prefix = prefix * chi.syllable_value(g.0, k);
    }
    acc
}

/// Tuning for [`solve_orientation_with`].
#[derive(Clone, Copy, Debug)]
pub struct SolverOptions {
    pub precision: u32,
    /// Walk each digit's candidate lifts in reverse order. The result must
    /// not depend on this.
    pub reverse_order: bool,
    /// Give up with `MultipleSolutions` beyond this many live branches.
    pub branch_limit: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { precision: crate::DEFAULT_PRECISION, reverse_order: false, branch_limit: 1 << 12 }
    }
}

/// The orientation character of a Demushkin presentation, modulo `p^K`.
pub fn solve_orientation(pres: &Presentation, precision: u32) -> Result<Character> {
    solve_orientation_with(pres, SolverOptions { precision, ..SolverOptions::default() })
}

pub fn solve_orientation_with(pres: &Presentation, opts: SolverOptions) -> Result<Character> {
    if !is_demushkin(pres, opts.precision)?.is_demushkin {
        return Err(Error::NotDemushkin);
    }
    let ring = PAdicRing::new(pres.prime(), opts.precision)?;
    let r = pres.relator()?;
    let solutions = lift_solutions(r, pres.generator_count(), ring, opts)?;
    let chi = match solutions.as_slice() {
        [] => return Err(Error::NoSolution),
        [one] => Character::new(ring, one.clone())?,
        many => return Err(Error::MultipleSolutions(many.len())),
    };
    if !chi.evaluate(r).is_one() {
        return Err(Error::Inconsistent(alloc::string::String::from("solved character does not kill the relator")));
    }
    Ok(chi)
}

fn residuals(r: &Word, ring: PAdicRing, u: &[PAdicInt]) -> Result<Vec<PAdicInt>> {
    Ok(twisted_fox_all(r, &Character::new(ring, u.to_vec())?))
}

/// All unit vectors `u` modulo `p^K` with `u = 1 (mod p)` and
/// `D_i(r)(u) = 0 (mod p^K)` for every `i`, sorted.
///
/// Pro-p characters take values in `1 + pZ_p` for odd p, and every unit is
/// `1 (mod 2)`, so the search starts from the all-ones vector. A solution
/// modulo `p^e` lifts through `u_j (1 + p^e t_j)`, and the `t` that work are
/// exactly the solutions over `F_p` of the linearized system
/// `J t = -F(u) / p^e`; a singular `J` yields its whole affine solution set.
pub fn lift_solutions(r: &Word, n: usize, ring: PAdicRing, opts: SolverOptions) -> Result<Vec<Vec<PAdicInt>>> {
    let p = ring.prime();
    let one = ring.one();
    let start = vec![one; n];
    let mut branches = Vec::new();
    if residuals(r, ring, &start)?.iter().all(|f| f.residue() % p == 0) {
        branches.push(start);
    }
    for e in 1..ring.precision() {
        let step = ring.p_power(e);
        let mut next = Vec::new();
        for u in &branches {
            let f = residuals(r, ring, u)?;
            debug_assert!(f.iter().all(|v| v.valuation() >= Valuation::Finite(e)));
            let rhs: Vec<u64> = f.iter().map(|v| (-*v).shift_down(e) % p).collect();
            let mut jac = vec![vec![0u64; n]; n];
            for j in 0..n {
                let mut bumped = u.clone();
                bumped[j] = bumped[j] * (one + step);
                let fb = residuals(r, ring, &bumped)?;
                for i in 0..n {
                    jac[i][j] = (fb[i] - f[i]).shift_down(e) % p;
                }
            }
            let Some((particular, kernel)) = solve_mod_p(jac, rhs, p) else {
                continue;
            };
            let count = (p as u128).checked_pow(kernel.len() as u32).unwrap_or(u128::MAX);
            if count > opts.branch_limit as u128 {
                return Err(Error::MultipleSolutions(opts.branch_limit));
            }
            let mut lifts = affine_points(&particular, &kernel, p);
            if opts.reverse_order {
                lifts.reverse();
            }
            for t in lifts {
                let lifted: Vec<PAdicInt> = u
                    .iter()
                    .zip(&t)
                    .map(|(uj, tj)| *uj + *uj * step * ring.from_i128(*tj as i128))
                    .collect();
                next.push(lifted);
            }
            if next.len() > opts.branch_limit {
                return Err(Error::MultipleSolutions(next.len()));
            }
        }
        branches = next;
    }
    let mut out: Vec<Vec<PAdicInt>> = Vec::new();
    for u in branches {
        if residuals(r, ring, &u)?.iter().all(PAdicInt::is_zero) {
            out.push(u);
        }
    }
    out.sort();
    out.dedup();
    Ok(out)
}

fn inv_mod(a: u64, p: u64) -> u64 {
    // Fermat; p is prime.
    let mut result = 1u128;
    let mut base = a as u128 % p as u128;
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            result = result * base % p as u128;
        }
        base = base * base % p as u128;
        e >>= 1;
    }
    result as u64
}

/// Solves `a t = b` over `F_p`. Returns a particular solution and a basis of
/// the kernel, or `None` if the system is inconsistent.
pub(crate) fn solve_mod_p(mut a: Vec<Vec<u64>>, mut b: Vec<u64>, p: u64) -> Option<(Vec<u64>, Vec<Vec<u64>>)> {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mulmod = |x: u64, y: u64| ((x as u128 * y as u128) % p as u128) as u64;
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..cols {
        let Some(pr) = (row..rows).find(|&i| a[i][col] % p != 0) else {
            continue;
        };
        a.swap(row, pr);
        b.swap(row, pr);
        let inv = inv_mod(a[row][col], p);
        for v in a[row].iter_mut() {
            *v = mulmod(*v, inv);
        }
        b[row] = mulmod(b[row], inv);
        for i in 0..rows {
            if i == row || a[i][col] == 0 {
                continue;
            }
            let factor = a[i][col];
            for j in 0..cols {
                let sub = mulmod(factor, a[row][j]);
                a[i][j] = (a[i][j] + p - sub) % p;
            }
            b[i] = (b[i] + p - mulmod(factor, b[row])) % p;
        }
        pivots.push(col);
        row += 1;
        if row == rows {
            break;
        }
    }
    if b[row..].iter().any(|v| *v != 0) {
        return None;
    }
    let mut particular = vec![0u64; cols];
    for (i, &c) in pivots.iter().enumerate() {
        particular[c] = b[i];
    }
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    let kernel = free
        .iter()
        .map(|&fc| {
            let mut v = vec![0u64; cols];
            v[fc] = 1;
            for (i, &c) in pivots.iter().enumerate() {
                v[c] = (p - a[i][fc]) % p;
            }
            v
        })
        .collect();
    Some((particular, kernel))
}

fn affine_points(particular: &[u64], kernel: &[Vec<u64>], p: u64) -> Vec<Vec<u64>> {
    let mut points = vec![particular.to_vec()];
    for k in kernel {
        let mut grown = Vec::with_capacity(points.len() * p as usize);
        for base in &points {
            for c in 0..p {
                grown.push(base.iter().zip(k).map(|(x, y)| (x + c * y) % p).collect());
            }
        }
        points = grown;
    }
    points
}

/// The image `U = im(chi)` in normal form.
pub fn character_image(chi: &Character) -> Result<UnitSubgroup> {
    unit_subgroup_normalize(chi.ring, &chi.values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::{Exponent, UnitKind};
    use crate::words::{commutator, reduce, Gen};
    use proptest::prelude::*;

    fn x(i: usize) -> Word {
        Word::generator(Gen(i - 1))
    }

    fn xp(i: usize, k: i64) -> Word {
        Word::power(Gen(i - 1), k)
    }

    fn ring2() -> PAdicRing {
        PAdicRing::new(2, 16).unwrap()
    }

    fn chi(ring: PAdicRing, vals: &[i128]) -> Character {
        Character::new(ring, vals.iter().map(|v| ring.from_i128(*v)).collect()).unwrap()
    }

    #[test]
    fn basis_derivation() {
        let c = chi(ring2(), &[-1, 5, 3]);
        assert!(twisted_fox(&x(1), 0, &c).is_one());
        assert!(twisted_fox(&x(1), 1, &c).is_zero());
    }

    #[test]
    fn d_relator_at_minus_one() {
        let r = xp(1, 2) * commutator(&x(2), &x(3));
        let c = chi(ring2(), &[-1, 1, 1]);
        let d = twisted_fox_all(&r, &c);
        assert!(d.iter().all(PAdicInt::is_zero));
        assert_eq!(twisted_fox(&r, 0, &c), ring2().one() + c.values()[0]);
    }

    #[test]
    fn commutator_identity_single_generators() {
        let ring = ring2();
        let c = chi(ring, &[-3, 5]);
        let (a, b) = (c.values()[0], c.values()[1]);
        let w = commutator(&x(1), &x(2));
        let pre = a.unit_inverse().unwrap() * b.unit_inverse().unwrap();
        // D_1(a) = 1, D_1(b) = 0 and the other way round.
        assert_eq!(twisted_fox(&w, 0, &c), pre * (ring.one() - b));
        assert_eq!(twisted_fox(&w, 1, &c), pre * (a - ring.one()));
    }

    fn pres(p: u64, n: usize, r: Word) -> Presentation {
        Presentation::one_relator(p, n, r).unwrap()
    }

    #[test]
    fn solves_d() {
        let c = solve_orientation(&pres(2, 3, xp(1, 2) * commutator(&x(2), &x(3))), 16).unwrap();
        let vals: Vec<i128> = c.values().iter().map(PAdicInt::signed_residue).collect();
        assert_eq!(vals, [-1, 1, 1]);
        assert_eq!(character_image(&c).unwrap(), UnitSubgroup::minus_one());
    }

    #[test]
    fn orientable_is_trivial() {
        let r = commutator(&x(1), &x(2)) * commutator(&x(3), &x(4));
        for p in [2, 3, 5] {
            let c = solve_orientation(&pres(p, 4, r.clone()), 12).unwrap();
            assert!(c.values().iter().all(PAdicInt::is_one));
            assert_eq!(character_image(&c).unwrap().kind(), UnitKind::Trivial);
        }
    }

    #[test]
    fn level_relation_for_odd_p() {
        // x1^9 [x1,x2]: chi(x1) = 1, chi(x2) = (1 - 9)^-1.
        let ring = PAdicRing::new(3, 10).unwrap();
        let c = solve_orientation(&pres(3, 2, xp(1, 9) * commutator(&x(1), &x(2))), 10).unwrap();
        assert!(c.values()[0].is_one());
        assert_eq!(c.values()[1], ring.from_i128(-8).unit_inverse().unwrap());
        assert_eq!(character_image(&c).unwrap().kind(), UnitKind::Level(2));
    }

    #[test]
    fn not_demushkin_is_rejected() {
        let r = commutator(&x(1), &x(2));
        assert_eq!(solve_orientation(&pres(3, 3, r), 8), Err(Error::NotDemushkin));
    }

    #[test]
    fn odd_neg_split_relation() {
        // x1^2 x2^4 [x2, x3]: chi = (-1, 1, (1 - 4)^-1), image <-1, 1+2^2>.
        let ring = ring2();
        let r = xp(1, 2) * xp(2, 4) * commutator(&x(2), &x(3));
        let c = solve_orientation(&pres(2, 3, r), 16).unwrap();
        assert_eq!(c.values()[0], ring.from_i128(-1));
        assert!(c.values()[1].is_one());
        assert_eq!(c.values()[2], ring.from_i128(-3).unit_inverse().unwrap());
        assert_eq!(character_image(&c).unwrap().kind(), UnitKind::NegSplit(Exponent::Finite(2)));
    }

    #[test]
    fn solver_is_order_independent() {
        let r = xp(1, 6) * commutator(&x(1), &x(2)) * commutator(&x(3), &x(4));
        let p = pres(2, 4, r);
        let a = solve_orientation_with(&p, SolverOptions { reverse_order: false, ..Default::default() }).unwrap();
        let b = solve_orientation_with(&p, SolverOptions { reverse_order: true, ..Default::default() }).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn singular_linearization_enumerates_fibre() {
        // D_1(x1^4) = 1 + u + u^2 + u^3 is singular mod 2; every unit that
        // solves it modulo 2^K must be found.
        let ring = PAdicRing::new(2, 5).unwrap();
        let sols = lift_solutions(&xp(1, 4), 1, ring, SolverOptions { precision: 5, ..Default::default() }).unwrap();
        let brute: Vec<Vec<PAdicInt>> = (0..32)
            .filter(|v| v % 2 == 1)
            .map(|v| ring.from_i128(v))
            .filter(|u| u.geometric_sum(&4u32.into()).is_zero())
            .map(|u| vec![u])
            .collect();
        assert_eq!(sols, brute);
        assert!(sols.len() > 1);
    }

    #[test]
    fn linear_solver() {
        // x + y = 1, y = 1 over F_5 -> (0, 1).
        let (t, k) = solve_mod_p(vec![vec![1, 1], vec![0, 1]], vec![1, 1], 5).unwrap();
        assert_eq!(t, [0, 1]);
        assert!(k.is_empty());
        // Inconsistent.
        assert!(solve_mod_p(vec![vec![1, 1], vec![2, 2]], vec![1, 0], 3).is_none());
        // Singular: kernel of dimension 1.
        let (t, k) = solve_mod_p(vec![vec![1, 2], vec![2, 4]], vec![3, 6], 7).unwrap();
        assert_eq!(k.len(), 1);
        assert_eq!((t[0] + 2 * t[1]) % 7, 3);
        assert_eq!((k[0][0] + 2 * k[0][1]) % 7, 0);
    }

    fn word_strategy() -> impl Strategy<Value = Word> {
        proptest::collection::vec((0usize..4, prop_oneof![-3i64..=-1, 1i64..=3]), 0..16)
            .prop_map(|raw| reduce(raw.into_iter().map(|(g, k)| (Gen(g), k))))
    }

    fn char_strategy() -> impl Strategy<Value = Character> {
        proptest::collection::vec(0i128..(1 << 15), 4)
            .prop_map(|v| chi(ring2(), &v.iter().map(|x| 2 * x + 1).collect::<Vec<_>>()))
    }

    proptest! {
        #[test]
        fn product_rule(u in word_strategy(), v in word_strategy(), c in char_strategy()) {
            let du = twisted_fox_all(&u, &c);
            let dv = twisted_fox_all(&v, &c);
            let duv = twisted_fox_all(&u.concat(&v), &c);
            let cu = c.evaluate(&u);
            for i in 0..4 {
                prop_assert_eq!(duv[i], du[i] + cu * dv[i]);
                prop_assert_eq!(twisted_fox(&u, i, &c), du[i]);
            }
        }

        #[test]
        fn inverse_rule(w in word_strategy(), c in char_strategy()) {
            let d = twisted_fox_all(&w, &c);
            let di = twisted_fox_all(&w.inverse(), &c);
            let cinv = c.evaluate(&w).unit_inverse().unwrap();
            for i in 0..4 {
                prop_assert_eq!(di[i], -(cinv * d[i]));
            }
        }

        #[test]
        fn fundamental_formula(w in word_strategy(), c in char_strategy()) {
            // chi(w) - 1 = sum_i D_i(w) (chi(x_i) - 1).
            let d = twisted_fox_all(&w, &c);
            let one = ring2().one();
            let rhs = d.iter().zip(c.values()).fold(ring2().zero(), |s, (di, ui)| s + *di * (*ui - one));
            prop_assert_eq!(c.evaluate(&w) - one, rhs);
        }
    }
}
