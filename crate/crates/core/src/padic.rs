//! Fixed-precision p-adic integers and closed subgroups of `Z_p^x`.
//!
//! A [`PAdicInt`] is a residue modulo `p^K` together with its ring. The
//! modulus must fit in 64 bits; products are formed in 128 bits.

use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;
use core::ops::{Add, Mul, Neg, Sub};

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::ToPrimitive;

use crate::words::is_prime;
use crate::{Error, Result};

/// `Z/p^K`, viewed as `Z_p` truncated to `K` digits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PAdicRing {
    p: u64,
    precision: u32,
    modulus: u64,
}

impl PAdicRing {
    pub fn new(p: u64, precision: u32) -> Result<PAdicRing> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        let modulus = match p.checked_pow(precision) {
            Some(m) if precision > 0 => m,
            _ => return Err(Error::PrecisionOutOfRange { p, precision }),
        };
        Ok(PAdicRing { p, precision, modulus })
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn zero(self) -> PAdicInt {
        PAdicInt { ring: self, residue: 0 }
    }

    pub fn one(self) -> PAdicInt {
        PAdicInt { ring: self, residue: 1 % self.modulus }
    }

    pub fn from_i128(self, v: i128) -> PAdicInt {
        let residue = v.rem_euclid(self.modulus as i128) as u64;
        PAdicInt { ring: self, residue }
    }

    pub fn from_bigint(self, v: &BigInt) -> PAdicInt {
        let m = BigInt::from(self.modulus);
        let residue = v.mod_floor(&m).to_u64().expect("residue below a u64 modulus");
        PAdicInt { ring: self, residue }
    }

    /// `p^e` as an element; zero once `e >= K`.
    pub fn p_power(self, e: u32) -> PAdicInt {
        match self.p.checked_pow(e) {
            Some(v) if e < self.precision => PAdicInt { ring: self, residue: v },
            _ => self.zero(),
        }
    }
}

/// The p-adic valuation of a residue, or `AtLeastK` for the zero residue,
/// whose true valuation cannot be told apart from infinity at precision `K`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Valuation {
    Finite(u32),
    AtLeastK,
}

impl Valuation {
    pub fn finite(self) -> Option<u32> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::AtLeastK => None,
        }
    }
}

impl PartialOrd for Valuation {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Valuation {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Valuation::Finite(a), Valuation::Finite(b)) => a.cmp(b),
            (Valuation::Finite(_), Valuation::AtLeastK) => Ordering::Less,
            (Valuation::AtLeastK, Valuation::Finite(_)) => Ordering::Greater,
            (Valuation::AtLeastK, Valuation::AtLeastK) => Ordering::Equal,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PAdicInt {
    ring: PAdicRing,
    residue: u64,
}

impl PAdicInt {
    pub fn ring(&self) -> PAdicRing {
        self.ring
    }

    /// The canonical representative in `[0, p^K)`.
    pub fn residue(&self) -> u64 {
        self.residue
    }

    /// The representative in `(-p^K/2, p^K/2]`.
    pub fn signed_residue(&self) -> i128 {
        let m = self.ring.modulus as i128;
        let r = self.residue as i128;
        if 2 * r > m {
            r - m
        } else {
            r
        }
    }

    pub fn is_zero(&self) -> bool {
        self.residue == 0
    }

    pub fn is_one(&self) -> bool {
        self.residue == 1 % self.ring.modulus
    }

    pub fn is_unit(&self) -> bool {
        self.residue % self.ring.p != 0
    }

    pub fn valuation(&self) -> Valuation {
        if self.residue == 0 {
            return Valuation::AtLeastK;
        }
        let mut r = self.residue;
        let mut v = 0;
        while r % self.ring.p == 0 {
            r /= self.ring.p;
            v += 1;
        }
        Valuation::Finite(v)
    }

    /// Multiplicative inverse, by the extended Euclidean algorithm.
    pub fn unit_inverse(&self) -> Result<PAdicInt> {
        if !self.is_unit() {
            return Err(Error::NonUnit);
        }
        let m = self.ring.modulus as i128;
        let (mut r0, mut r1) = (m, self.residue as i128);
        let (mut t0, mut t1) = (0i128, 1i128);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (t0, t1) = (t1, t0 - q * t1);
        }
        debug_assert_eq!(r0, 1);
        Ok(self.ring.from_i128(t0))
    }

    pub fn pow_u(&self, k: &BigUint) -> PAdicInt {
        let mut acc = self.ring.one();
        for i in (0..k.bits()).rev() {
            acc = acc * acc;
            if k.bit(i) {
                acc = acc * *self;
            }
        }
        acc
    }

    /// `self^k` for any integer `k`; negative exponents need a unit.
    pub fn pow(&self, k: &BigInt) -> Result<PAdicInt> {
        match k.sign() {
            Sign::Minus => Ok(self.unit_inverse()?.pow_u(k.magnitude())),
            _ => Ok(self.pow_u(k.magnitude())),
        }
    }

    /// `1 + x + ... + x^(k-1)`, without dividing by `x - 1`.
    pub fn geometric_sum(&self, k: &BigUint) -> PAdicInt {
        // Invariant: sum = 1 + ... + x^(m-1), power = x^m for the prefix m of k.
        let mut sum = self.ring.zero();
        let mut power = self.ring.one();
        for i in (0..k.bits()).rev() {
            sum = sum * (self.ring.one() + power);
            power = power * power;
            if k.bit(i) {
                sum = sum + power;
                power = power * *self;
            }
        }
        sum
    }

    /// `self` divided by `p^e`, assuming the division is exact; the result
    /// is only meaningful modulo `p^(K-e)`.
    pub fn shift_down(&self, e: u32) -> u64 {
        self.residue / self.ring.p.pow(e)
    }

    /// Renders as `"r mod p^K"`.
    pub fn mod_string(&self) -> alloc::string::String {
        alloc::format!("{} mod {}^{}", self.residue, self.ring.p, self.ring.precision)
    }

    fn check(&self, other: &PAdicInt) {
        assert_eq!(self.ring, other.ring, "{}", Error::RingMismatch);
    }
}

impl Add for PAdicInt {
    type Output = PAdicInt;

    fn add(self, rhs: PAdicInt) -> PAdicInt {
        self.check(&rhs);
        let s = (self.residue as u128 + rhs.residue as u128) % self.ring.modulus as u128;
        PAdicInt { ring: self.ring, residue: s as u64 }
    }
}

impl Sub for PAdicInt {
    type Output = PAdicInt;

    fn sub(self, rhs: PAdicInt) -> PAdicInt {
        self + (-rhs)
    }
}

impl Neg for PAdicInt {
    type Output = PAdicInt;

    fn neg(self) -> PAdicInt {
        let residue = if self.residue == 0 { 0 } else { self.ring.modulus - self.residue };
        PAdicInt { ring: self.ring, residue }
    }
}

impl Mul for PAdicInt {
    type Output = PAdicInt;

    fn mul(self, rhs: PAdicInt) -> PAdicInt {
        self.check(&rhs);
        let s = (self.residue as u128 * rhs.residue as u128) % self.ring.modulus as u128;
        PAdicInt { ring: self.ring, residue: s as u64 }
    }
}

impl fmt::Display for PAdicInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + O({}^{})", self.residue, self.ring.p, self.ring.precision)
    }
}

/// A level exponent `f` that may be infinite.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Exponent {
    Finite(u32),
    Infinite,
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(v) => write!(f, "{}", v),
            Exponent::Infinite => f.write_str("inf"),
        }
    }
}

/// Normal forms of the closed subgroups of `Z_p^x` that occur as images of
/// pro-p orientation characters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum UnitKind {
    /// `{1}`.
    Trivial,
    /// `1 + p^f Z_p`.
    Level(u32),
    /// `<-1 + 2^f>`, for p = 2 and finite `f >= 2`.
    NegCyclic(u32),
    /// `<-1, 1 + 2^f>`, for p = 2; `f = inf` is `<-1>`.
    NegSplit(Exponent),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct UnitSubgroup {
    p: u64,
    kind: UnitKind,
}

impl UnitSubgroup {
    /// Validates the kind against the prime: the `Neg*` kinds need p = 2,
    /// and levels start at `f = 2` for p = 2 and `f = 1` for odd p.
    pub fn new(p: u64, kind: UnitKind) -> Result<UnitSubgroup> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        let min_level = if p == 2 { 2 } else { 1 };
        let ok = match kind {
            UnitKind::Trivial => true,
            UnitKind::Level(f) => f >= min_level,
            UnitKind::NegCyclic(f) => p == 2 && f >= 2,
            UnitKind::NegSplit(Exponent::Finite(f)) => p == 2 && f >= 2,
            UnitKind::NegSplit(Exponent::Infinite) => p == 2,
        };
        if !ok {
            return Err(Error::BadInput(alloc::format!("{:?} is not a normal form for p={}", kind, p)));
        }
        Ok(UnitSubgroup { p, kind })
    }

    pub fn trivial(p: u64) -> Result<UnitSubgroup> {
        UnitSubgroup::new(p, UnitKind::Trivial)
    }

    /// `<-1>` in `Z_2^x`.
    pub fn minus_one() -> UnitSubgroup {
        UnitSubgroup { p: 2, kind: UnitKind::NegSplit(Exponent::Infinite) }
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn kind(&self) -> UnitKind {
        self.kind
    }

    /// The index `[U : U^2]`.
    pub fn square_index(&self) -> u32 {
        match self.kind {
            UnitKind::Trivial => 1,
            UnitKind::Level(_) | UnitKind::NegCyclic(_) => 2,
            UnitKind::NegSplit(Exponent::Finite(_)) => 4,
            UnitKind::NegSplit(Exponent::Infinite) => 2,
        }
    }

    /// Exponent `f` of the largest `q = p^f` with `U <= 1 + qZ_p`, or
    /// `None` when `U` is trivial (every `q` works, so `q = 0`).
    pub fn torsion_exponent(&self) -> Option<u32> {
        match self.kind {
            UnitKind::Trivial => None,
            UnitKind::Level(f) => Some(f),
            UnitKind::NegCyclic(_) | UnitKind::NegSplit(_) => Some(1),
        }
    }
}

impl fmt::Display for UnitSubgroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            UnitKind::Trivial => f.write_str("{1}"),
            UnitKind::Level(e) => write!(f, "1+{}^{} Z_{}", self.p, e, self.p),
            UnitKind::NegCyclic(e) => write!(f, "<-1+2^{}>", e),
            UnitKind::NegSplit(Exponent::Finite(e)) => write!(f, "<-1, 1+2^{}>", e),
            UnitKind::NegSplit(Exponent::Infinite) => f.write_str("<-1>"),
        }
    }
}

fn val_to_exponent(v: Valuation) -> Exponent {
    match v {
        Valuation::Finite(f) => Exponent::Finite(f),
        Valuation::AtLeastK => Exponent::Infinite,
    }
}

/// Normal form of the closed subgroup of `Z_p^x` generated by `values`.
///
/// Values whose distance from the answer is below the working precision
/// are read as exact: a value `1 + O(p^K)` counts as `1`.
pub fn unit_subgroup_normalize(ring: PAdicRing, values: &[PAdicInt]) -> Result<UnitSubgroup> {
    for v in values {
        if v.ring != ring {
            return Err(Error::RingMismatch);
        }
        if !v.is_unit() {
            return Err(Error::NonUnit);
        }
    }
    let one = ring.one();
    let p = ring.p;
    if p != 2 {
        if values.iter().any(|v| v.residue % p != 1) {
            return Err(Error::NotProP);
        }
        let m = values.iter().map(|v| (*v - one).valuation()).min();
        return match m.and_then(Valuation::finite) {
            None => UnitSubgroup::new(p, UnitKind::Trivial),
            Some(f) => UnitSubgroup::new(p, UnitKind::Level(f)),
        };
    }

    // Z_2^x = {+-1} x (1 + 4Z_2). Collect generators of the part P of U that
    // lies in 1 + 4Z_2; it is 1 + 2^m Z_2 for m the least valuation of x - 1.
    if ring.precision < 2 {
        return Err(Error::InsufficientPrecision);
    }
    let (negative, positive): (Vec<PAdicInt>, Vec<PAdicInt>) =
        values.iter().partition(|v| v.residue % 4 == 3);
    let mut level_gens = positive;
    for (i, g) in negative.iter().enumerate() {
        level_gens.push(*g * *g);
        for h in &negative[i + 1..] {
            level_gens.push(*g * *h);
        }
    }
    let m = level_gens
        .iter()
        .map(|x| (*x - one).valuation())
        .min()
        .unwrap_or(Valuation::AtLeastK);

    let Some(g) = negative.first() else {
        return match m {
            Valuation::AtLeastK => UnitSubgroup::new(2, UnitKind::Trivial),
            Valuation::Finite(f) => UnitSubgroup::new(2, UnitKind::Level(f)),
        };
    };
    let vg = (*g + one).valuation();
    if vg >= m {
        return UnitSubgroup::new(2, UnitKind::NegSplit(val_to_exponent(m)));
    }
    // g^2 lies in P, so v(g + 1) >= m - 1.
    match (vg, m) {
        (Valuation::Finite(f), Valuation::Finite(mf)) if f + 1 == mf => {
            UnitSubgroup::new(2, UnitKind::NegCyclic(f))
        }
        (Valuation::Finite(f), Valuation::AtLeastK) if f + 1 == ring.precision => {
            UnitSubgroup::new(2, UnitKind::NegCyclic(f))
        }
        _ => Err(Error::Inconsistent(alloc::format!(
            "v(g+1) = {:?} incompatible with level {:?}",
            vg, m
        ))),
    }
}
