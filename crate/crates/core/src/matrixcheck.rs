//! Unitriangular 3x3 matrices over `Z/p^k` and the finite checks showing
//! that `a^2 b^2 c^2` has no nonabelian image in a free group quotient.

use alloc::collections::{BTreeSet, VecDeque};
use alloc::vec::Vec;
use core::fmt;

use crate::{Error, Result};

/// Unit upper-triangular 3x3 matrix modulo a prime power.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct UnitriMatrix {
    modulus: u64,
    entries: [[u64; 3]; 3],
}

fn is_prime_power(m: u64) -> bool {
    if m < 2 {
        return false;
    }
    let p = (2..=m).find(|d| m % d == 0).unwrap_or(m);
    let mut r = m;
    while r % p == 0 {
        r /= p;
    }
    r == 1
}

impl UnitriMatrix {
    /// `I + a e12 + b e23 + c e13`.
    pub fn new(modulus: u64, a: i64, b: i64, c: i64) -> Result<UnitriMatrix> {
        if !is_prime_power(modulus) || modulus > u32::MAX as u64 {
            return Err(Error::BadInput(alloc::format!("modulus {} is not a small prime power", modulus)));
        }
        let r = |v: i64| v.rem_euclid(modulus as i64) as u64;
        Ok(UnitriMatrix { modulus, entries: [[1, r(a), r(c)], [0, 1, r(b)], [0, 0, 1]] })
    }

    pub fn identity(modulus: u64) -> Result<UnitriMatrix> {
        UnitriMatrix::new(modulus, 0, 0, 0)
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn entries(&self) -> [[u64; 3]; 3] {
        self.entries
    }

    /// `(a, b, c)` = entries `(1,2)`, `(2,3)`, `(1,3)`.
    pub fn coordinates(&self) -> (u64, u64, u64) {
        (self.entries[0][1], self.entries[1][2], self.entries[0][2])
    }

    pub fn is_identity(&self) -> bool {
        self.coordinates() == (0, 0, 0)
    }

    pub fn mul(&self, other: &UnitriMatrix) -> Result<UnitriMatrix> {
        if self.modulus != other.modulus {
            return Err(Error::RingMismatch);
        }
        let m = self.modulus;
        let mut out = [[0u64; 3]; 3];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = (0..3).map(|k| self.entries[i][k] * other.entries[k][j] % m).sum::<u64>() % m;
            }
        }
        Ok(UnitriMatrix { modulus: m, entries: out })
    }

    /// `I - N + N^2` with `N = M - I`.
    pub fn inverse(&self) -> UnitriMatrix {
        let m = self.modulus;
        let (a, b, c) = self.coordinates();
        let neg = |v: u64| (m - v % m) % m;
        let e13 = (neg(c) + a * b % m) % m;
        UnitriMatrix { modulus: m, entries: [[1, neg(a), e13], [0, 1, neg(b)], [0, 0, 1]] }
    }

    pub fn pow(&self, k: u64) -> UnitriMatrix {
        let mut acc = UnitriMatrix { modulus: self.modulus, entries: [[1, 0, 0], [0, 1, 0], [0, 0, 1]] };
        let mut base = *self;
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base).expect("same modulus");
            }
            base = base.mul(&base).expect("same modulus");
            e >>= 1;
        }
        acc
    }
}

impl fmt::Display for UnitriMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<alloc::string::String> = self
            .entries
            .iter()
            .map(|r| alloc::format!("[{} {} {}]", r[0], r[1], r[2]))
            .collect();
        write!(f, "{} mod {}", rows.join(" "), self.modulus)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LyndonWitness {
    pub a: UnitriMatrix,
    pub b: UnitriMatrix,
    pub c: UnitriMatrix,
    /// `A^2 B^2 C^2`.
    pub product: UnitriMatrix,
    pub is_identity: bool,
}

/// `A = I + e12`, `B = I + e23`, `C = I + e13` mod 4, and `A^2 B^2 C^2`.
pub fn lyndon_witness() -> LyndonWitness {
    lyndon_witness_mod(4).expect("4 is a prime power")
}

pub fn lyndon_witness_mod(modulus: u64) -> Result<LyndonWitness> {
    let a = UnitriMatrix::new(modulus, 1, 0, 0)?;
    let b = UnitriMatrix::new(modulus, 0, 1, 0)?;
    let c = UnitriMatrix::new(modulus, 0, 0, 1)?;
    let product = a.pow(2).mul(&b.pow(2))?.mul(&c.pow(2))?;
    Ok(LyndonWitness { a, b, c, product, is_identity: product.is_identity() })
}

pub const CLOSURE_LIMIT: usize = 1_000_000;

/// The subgroup generated by `generators`, by breadth-first search.
pub fn subgroup_closure(generators: &[UnitriMatrix]) -> Result<BTreeSet<UnitriMatrix>> {
    let Some(first) = generators.first() else {
        return Err(Error::BadInput(alloc::string::String::from("no generators given")));
    };
    let id = UnitriMatrix::identity(first.modulus)?;
    let mut seen = BTreeSet::from([id]);
    let mut queue = VecDeque::from([id]);
    while let Some(x) = queue.pop_front() {
        for g in generators {
            let y = x.mul(g)?;
            if seen.insert(y) {
                if seen.len() > CLOSURE_LIMIT {
                    return Err(Error::ClosureTooLarge(CLOSURE_LIMIT));
                }
                queue.push_back(y);
            }
        }
    }
    Ok(seen)
}

/// Whether some `X` in `ambient` has `X^2 = target`.
pub fn has_square_root(target: &UnitriMatrix, ambient: &BTreeSet<UnitriMatrix>) -> bool {
    ambient.iter().any(|x| x.mul(x).is_ok_and(|sq| sq == *target))
}

/// A Demushkin group on n generators can only map onto a free group of
/// rank k when `n >= 2k`.
pub fn sonn_bound(n: u64, k: u64) -> bool {
    k.checked_mul(2).is_some_and(|two_k| n >= two_k)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Coordinate group law `(a,b,c)(a',b',c') = (a+a', b+b', c+c'+ab')`.
    fn law(m: u64, x: (u64, u64, u64), y: (u64, u64, u64)) -> (u64, u64, u64) {
        ((x.0 + y.0) % m, (x.1 + y.1) % m, (x.2 + y.2 + x.0 * y.1) % m)
    }

    #[test]
    fn witness() {
        let w = lyndon_witness();
        assert_eq!(w.product.coordinates(), (2, 2, 2));
        assert!(!w.is_identity);
        assert_eq!(w.a.pow(2).coordinates(), (2, 0, 0));
        assert!(w.a.mul(&w.a.inverse()).unwrap().is_identity());
        let sq = |v| law(4, v, v);
        let by_law = law(4, law(4, sq((1, 0, 0)), sq((0, 1, 0))), sq((0, 0, 1)));
        assert_eq!(by_law, w.product.coordinates());
    }

    #[test]
    fn closures() {
        let w = lyndon_witness();
        let i = UnitriMatrix::identity(4).unwrap();
        assert_eq!(subgroup_closure(&[i]).unwrap().len(), 1);
        assert_eq!(subgroup_closure(&[w.a]).unwrap().len(), 4);
        let h = subgroup_closure(&[w.a, w.b]).unwrap();
        assert_eq!(h.len(), 64);
        for x in &h {
            assert!(h.contains(&x.inverse()));
            for y in &h {
                assert!(h.contains(&x.mul(y).unwrap()));
            }
        }
        assert_eq!(subgroup_closure(&[w.a, w.b]), subgroup_closure(&[w.b, w.a]));
    }

    #[test]
    fn square_roots() {
        let w = lyndon_witness();
        let h = subgroup_closure(&[w.a, w.b]).unwrap();
        let a2b2 = w.a.pow(2).mul(&w.b.pow(2)).unwrap();
        assert!(!has_square_root(&a2b2, &h));
        assert!(has_square_root(&UnitriMatrix::identity(4).unwrap(), &h));
        assert!(has_square_root(&w.a.pow(2), &h));
        // Parity argument: X^2 = (2a, 2b, 2c + ab).
        for x in &h {
            let (a, b, c) = x.coordinates();
            assert_eq!(x.mul(x).unwrap().coordinates(), ((2 * a) % 4, (2 * b) % 4, (2 * c + a * b) % 4));
        }
    }

    #[test]
    fn matrix_product_matches_law() {
        for m in [4u64, 8, 9, 3] {
            for a in 0..m {
                for b in 0..m {
                    let x = UnitriMatrix::new(m, a as i64, b as i64, (a * b + 1) as i64).unwrap();
                    let y = UnitriMatrix::new(m, b as i64, 1, a as i64).unwrap();
                    assert_eq!(x.mul(&y).unwrap().coordinates(), law(m, x.coordinates(), y.coordinates()));
                }
            }
        }
    }

    #[test]
    fn higher_modulus_ladder() {
        for m in [8u64, 16] {
            let w = lyndon_witness_mod(m).unwrap();
            assert!(!w.is_identity);
            assert_eq!(subgroup_closure(&[w.a, w.b]).unwrap().len() as u64, m * m * m);
        }
    }

    #[test]
    fn errors() {
        assert!(UnitriMatrix::new(6, 1, 0, 0).is_err());
        let a = UnitriMatrix::new(4, 1, 0, 0).unwrap();
        let b = UnitriMatrix::new(8, 1, 0, 0).unwrap();
        assert_eq!(a.mul(&b), Err(Error::RingMismatch));
        let big = UnitriMatrix::new(1 << 7, 1, 0, 0).unwrap();
        let big_b = UnitriMatrix::new(1 << 7, 0, 1, 0).unwrap();
        assert_eq!(subgroup_closure(&[big, big_b]), Err(Error::ClosureTooLarge(CLOSURE_LIMIT)));
    }

    #[test]
    fn sonn() {
        assert!(!sonn_bound(3, 2));
        assert!(sonn_bound(4, 2));
        assert!(sonn_bound(5, 0));
        assert!(sonn_bound(0, 0));
    }
}
