//! Exact rational arithmetic in canonical form, and modular fingerprints.
//!
//! [`Rational`] is the field `k = Q` everything else is built over. A
//! [`Fingerprint`] is the tuple of residues of a rational modulo a fixed set of
//! word-sized primes; equal rationals always have equal fingerprints, so the
//! search engines bucket by fingerprint first and confirm exactly afterwards.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArithError {
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("division by zero")]
    DivisionByZero,
    #[error("malformed rational literal {0:?}")]
    Malformed(String),
}

/// An exact rational number `num/den` with `gcd(|num|, den) = 1` and `den >= 1`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Rational(BigRational);

impl Rational {
    /// Builds the canonical representative of `num/den`.
    pub fn new(num: impl Into<BigInt>, den: impl Into<BigInt>) -> Result<Self, ArithError> {
        let den = den.into();
        if den.is_zero() {
            return Err(ArithError::ZeroDenominator);
        }
        Ok(Rational(BigRational::new(num.into(), den)))
    }

    pub fn from_integer(n: impl Into<BigInt>) -> Self {
        Rational(BigRational::from_integer(n.into()))
    }

    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    /// Naive height `max(|num|, den)`; the height of zero is 1.
    pub fn height(&self) -> BigInt {
        let n = self.numer().abs();
        let d = self.denom().clone();
        if n > d {
            n
        } else {
            d
        }
    }

    pub fn abs(&self) -> Self {
        Rational(self.0.abs())
    }

    pub fn pow(&self, e: u32) -> Self {
        Rational(num_traits::pow::Pow::pow(&self.0, e))
    }

    pub fn recip(&self) -> Result<Self, ArithError> {
        if self.is_zero() {
            return Err(ArithError::DivisionByZero);
        }
        Ok(Rational(self.0.recip()))
    }

    pub fn checked_div(&self, other: &Rational) -> Result<Self, ArithError> {
        if other.is_zero() {
            return Err(ArithError::DivisionByZero);
        }
        Ok(Rational(&self.0 / &other.0))
    }

    pub fn to_f64(&self) -> f64 {
        // BigRational::to_f64 handles huge numerators/denominators without overflow
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    /// Exact conversion of a finite double.
    pub fn from_f64(x: f64) -> Option<Self> {
        BigRational::from_float(x).map(Rational)
    }

    /// Returns `s` with `s^e = self` when such a rational exists.
    pub fn exact_root(&self, e: u32) -> Option<Rational> {
        assert!(e >= 1);
        if self.is_zero() {
            return Some(Rational::zero());
        }
        if self.is_negative() && e.is_multiple_of(2) {
            return None;
        }
        let n = exact_int_root(&self.numer().abs(), e)?;
        let d = exact_int_root(self.denom(), e)?;
        let n = if self.is_negative() { -n } else { n };
        Some(Rational(BigRational::new_raw(n, d)))
    }

    /// Residues of `num * den^-1` modulo each prime, `None` where the prime divides `den`.
    pub fn fingerprint(&self, primes: &[u64]) -> Fingerprint {
        Fingerprint {
            residues: primes.iter().map(|&q| self.residue(q)).collect(),
        }
    }

    /// `num * den^-1 mod q`, or `None` when `q | den`.
    pub fn residue(&self, q: u64) -> Option<u64> {
        let qb = BigInt::from(q);
        let d = self.denom().mod_floor(&qb).to_u64().unwrap();
        if d == 0 {
            return None;
        }
        let n = self.numer().mod_floor(&qb).to_u64().unwrap();
        Some(mul_mod(n, inv_mod(d, q), q))
    }
}

/// `r` with `r^e = n` for `n >= 0`, if `n` is a perfect power.
fn exact_int_root(n: &BigInt, e: u32) -> Option<BigInt> {
    let r = n.nth_root(e);
    if num_traits::pow::Pow::pow(&r, e) == *n {
        Some(r)
    } else {
        None
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::from_integer(n)
    }
}

impl From<BigInt> for Rational {
    fn from(n: BigInt) -> Self {
        Rational::from_integer(n)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numer(), self.denom())
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Rational {
    type Err = ArithError;

    /// Accepts `"a"` or `"a/b"` with decimal integers.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ArithError::Malformed(s.to_string());
        let (n, d) = match s.split_once('/') {
            Some((n, d)) => (n, d),
            None => (s, "1"),
        };
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        Rational::new(n, d)
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

macro_rules! forward_binop {
    ($tr:ident, $m:ident) => {
        impl $tr<&Rational> for &Rational {
            type Output = Rational;
            fn $m(self, rhs: &Rational) -> Rational {
                Rational($tr::$m(&self.0, &rhs.0))
            }
        }
        impl $tr<Rational> for Rational {
            type Output = Rational;
            fn $m(self, rhs: Rational) -> Rational {
                Rational($tr::$m(self.0, rhs.0))
            }
        }
        impl $tr<&Rational> for Rational {
            type Output = Rational;
            fn $m(self, rhs: &Rational) -> Rational {
                Rational($tr::$m(self.0, &rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-&self.0)
    }
}

impl std::iter::Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Self {
        iter.fold(Rational::zero(), |a, b| a + b)
    }
}

/// Residue tuple of a rational modulo a fixed prime tuple.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Fingerprint {
    pub residues: Vec<Option<u64>>,
}

/// The four largest primes below 2^62. Runs use a prefix of this tuple unless
/// configured otherwise; the tuple in use is recorded in every report.
pub const DEFAULT_PRIMES: [u64; 4] = [
    4_611_686_018_427_387_847,
    4_611_686_018_427_387_817,
    4_611_686_018_427_387_787,
    4_611_686_018_427_387_761,
];

/// Sentinel for an undefined residue inside packed join keys. Residues are
/// always `< q < 2^62`, so it never collides with a real residue.
pub(crate) const UNDEFINED: u64 = u64::MAX;

#[inline]
pub fn mul_mod(a: u64, b: u64, q: u64) -> u64 {
    ((a as u128 * b as u128) % q as u128) as u64
}

#[inline]
pub fn add_mod(a: u64, b: u64, q: u64) -> u64 {
    let s = a as u128 + b as u128;
    (s % q as u128) as u64
}

pub fn pow_mod(mut base: u64, mut e: u64, q: u64) -> u64 {
    let mut acc = 1 % q;
    base %= q;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, base, q);
        }
        base = mul_mod(base, base, q);
        e >>= 1;
    }
    acc
}

/// Inverse of a nonzero residue modulo a prime.
pub fn inv_mod(a: u64, q: u64) -> u64 {
    debug_assert!(!a.is_multiple_of(q));
    let (mut t, mut new_t) = (0i128, 1i128);
    let (mut r, mut new_r) = (q as i128, (a % q) as i128);
    while new_r != 0 {
        let quot = r / new_r;
        (t, new_t) = (new_t, t - quot * new_t);
        (r, new_r) = (new_r, r - quot * new_r);
    }
    if t < 0 {
        t += q as i128;
    }
    t as u64
}

/// Deterministic Miller-Rabin, exact for all `u64`.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// `p`-adic valuation of a nonzero integer.
pub fn valuation(n: &BigInt, p: u64) -> Option<u32> {
    if n.is_zero() {
        return None;
    }
    let pb = BigInt::from(p);
    let mut v = 0;
    let mut m = n.clone();
    loop {
        let (q, r) = m.div_rem(&pb);
        if !r.is_zero() {
            return Some(v);
        }
        m = q;
        v += 1;
    }
}


/// Serde adapters writing big integers as decimal strings.
pub mod bigint_serde {
    use num_bigint::BigInt;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(n: &BigInt, s: S) -> Result<S::Ok, S::Error> {
        n.to_string().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigInt, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }

    pub mod pair {
        use super::*;

        pub fn serialize<S: Serializer>(p: &(BigInt, BigInt), s: S) -> Result<S::Ok, S::Error> {
            (p.0.to_string(), p.1.to_string()).serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<(BigInt, BigInt), D::Error> {
            let (a, b) = <(String, String)>::deserialize(d)?;
            let parse = |t: String| t.parse::<BigInt>().map_err(serde::de::Error::custom);
            Ok((parse(a)?, parse(b)?))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d).unwrap()
    }

    #[test]
    fn canonical_forms() {
        assert_eq!(r(2, 4).to_string(), "1/2");
        assert_eq!(r(3, -6).to_string(), "-1/2");
        assert_eq!(r(0, 7).to_string(), "0/1");
        assert_eq!(Rational::new(1, 0), Err(ArithError::ZeroDenominator));
    }

    #[test]
    fn fingerprints() {
        assert_eq!(r(1, 2).fingerprint(&[5]).residues, vec![Some(3)]);
        assert_eq!(r(1, 5).fingerprint(&[5]).residues, vec![None]);
        assert_eq!(r(7, 3).fingerprint(&[11, 13]).residues, vec![Some(6), Some(11)]);
        assert_eq!(r(-1, 2).fingerprint(&[5]).residues, vec![Some(2)]);
    }

    #[test]
    fn heights() {
        assert_eq!(Rational::zero().height(), BigInt::from(1));
        assert_eq!(r(-7, 3).height(), BigInt::from(7));
        assert_eq!(r(2, 9).height(), BigInt::from(9));
        for (n, d) in [(0, 1), (1, 1), (-1, 1)] {
            assert!(r(n, d).height().is_one());
        }
        assert!(!r(1, 2).height().is_one());
    }

    #[test]
    fn parse_and_serde() {
        assert_eq!("-3/7".parse::<Rational>().unwrap(), r(-3, 7));
        assert_eq!("6/-4".parse::<Rational>().unwrap(), r(-3, 2));
        assert_eq!("12".parse::<Rational>().unwrap(), r(12, 1));
        assert!("1/0".parse::<Rational>().is_err());
        assert!("x".parse::<Rational>().is_err());
        let js = serde_json::to_string(&vec![r(-3, 7), Rational::zero()]).unwrap();
        assert_eq!(js, r#"["-3/7","0/1"]"#);
        let back: Vec<Rational> = serde_json::from_str(&js).unwrap();
        assert_eq!(back, vec![r(-3, 7), Rational::zero()]);
    }

    #[test]
    fn exact_roots() {
        assert_eq!(r(-32, 243).exact_root(5), Some(r(-2, 3)));
        assert_eq!(r(2, 1).exact_root(5), None);
        assert_eq!(r(-4, 1).exact_root(2), None);
        assert_eq!(Rational::zero().exact_root(7), Some(Rational::zero()));
    }

    #[test]
    fn default_primes_are_distinct_62_bit_primes() {
        for (i, &q) in DEFAULT_PRIMES.iter().enumerate() {
            assert!(is_prime_u64(q));
            assert!(q < 1 << 62 && q > 1 << 61);
            assert!(!DEFAULT_PRIMES[..i].contains(&q));
        }
        assert!(!is_prime_u64(4_611_686_018_427_387_849));
        assert!(is_prime_u64((1 << 61) - 1));
    }

    #[test]
    fn modular_helpers() {
        assert_eq!(inv_mod(3, 11), 4);
        assert_eq!(inv_mod(3, 13), 9);
        let q = DEFAULT_PRIMES[0];
        let a = 123_456_789_012_345;
        assert_eq!(mul_mod(a, inv_mod(a, q), q), 1);
        assert_eq!(valuation(&BigInt::from(250), 5), Some(3));
        assert_eq!(valuation(&BigInt::from(0), 5), None);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn equal_values_equal_fingerprints(n in -1_000_000i64..1_000_000, d in 1i64..1_000_000, k in 1i64..1000) {
                let a = r(n, d);
                let b = Rational::new(BigInt::from(n) * k, BigInt::from(d) * k).unwrap();
                prop_assert_eq!(a.fingerprint(&DEFAULT_PRIMES), b.fingerprint(&DEFAULT_PRIMES));
                prop_assert_eq!(a.fingerprint(&[5, 7, 11]), b.fingerprint(&[5, 7, 11]));
            }

            #[test]
            fn residue_is_a_ring_map(a in -10_000i64..10_000, b in 1i64..10_000, c in -10_000i64..10_000, d in 1i64..10_000) {
                let q = DEFAULT_PRIMES[1];
                let (x, y) = (r(a, b), r(c, d));
                let (rx, ry) = (x.residue(q).unwrap(), y.residue(q).unwrap());
                prop_assert_eq!((&x * &y).residue(q).unwrap(), mul_mod(rx, ry, q));
                prop_assert_eq!((&x + &y).residue(q).unwrap(), add_mod(rx, ry, q));
            }
        }
    }
}
