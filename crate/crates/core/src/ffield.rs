//! The injection `f(x, y) = x^p + t*y^p` on `F_p(t) x F_p(t)`.
//!
//! `F_p(t)` is imperfect: `t` is not a `p`-th power. If
//! `x1^p + t*y1^p = x2^p + t*y2^p` with `y1 != y2` then
//! `t = ((x1 - x2)/(y2 - y1))^p`, which is impossible, and if `y1 = y2` then
//! Frobenius injectivity forces `x1 = x2`. [`verify_injection`] walks that
//! argument on concrete inputs.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::arith::is_prime_u64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FfError {
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("characteristic mismatch: {0} vs {1}")]
    Characteristic(u32, u32),
    #[error("malformed rational function {0:?}")]
    Malformed(String),
    #[error("degree bound must be at least 1 (or 0 for constants)")]
    BadDegree,
}

/// Dense polynomial over `F_p`, coefficients from `t^0` upward, trimmed.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FpPoly {
    p: u32,
    coeffs: Vec<u32>,
}

impl FpPoly {
    pub fn new(p: u32, coeffs: impl IntoIterator<Item = u64>) -> Self {
        let mut c: Vec<u32> = coeffs.into_iter().map(|x| (x % p as u64) as u32).collect();
        while c.last() == Some(&0) {
            c.pop();
        }
        FpPoly { p, coeffs: c }
    }

    pub fn zero(p: u32) -> Self {
        FpPoly { p, coeffs: Vec::new() }
    }

    pub fn constant(p: u32, c: u64) -> Self {
        FpPoly::new(p, [c])
    }

    /// The variable `t`.
    pub fn t(p: u32) -> Self {
        FpPoly::new(p, [0, 1])
    }

    pub fn characteristic(&self) -> u32 {
        self.p
    }

    pub fn coeffs(&self) -> &[u32] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    fn lc(&self) -> u32 {
        *self.coeffs.last().unwrap_or(&0)
    }

    fn inv(&self, a: u32) -> u32 {
        crate::arith::inv_mod(a as u64, self.p as u64) as u32
    }

    fn scale(&self, k: u32) -> FpPoly {
        let p = self.p as u64;
        FpPoly::new(self.p, self.coeffs.iter().map(|&c| c as u64 * k as u64 % p))
    }

    pub fn add(&self, o: &FpPoly) -> FpPoly {
        let n = self.coeffs.len().max(o.coeffs.len());
        let at = |v: &[u32], i: usize| *v.get(i).unwrap_or(&0) as u64;
        FpPoly::new(self.p, (0..n).map(|i| at(&self.coeffs, i) + at(&o.coeffs, i)))
    }

    pub fn neg(&self) -> FpPoly {
        self.scale(self.p - 1)
    }

    pub fn sub(&self, o: &FpPoly) -> FpPoly {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &FpPoly) -> FpPoly {
        if self.is_zero() || o.is_zero() {
            return FpPoly::zero(self.p);
        }
        let p = self.p as u64;
        let mut out = vec![0u64; self.coeffs.len() + o.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in o.coeffs.iter().enumerate() {
                out[i + j] = (out[i + j] + a as u64 * b as u64) % p;
            }
        }
        FpPoly::new(self.p, out)
    }

    /// `(quotient, remainder)`; panics on a zero divisor.
    pub fn div_rem(&self, d: &FpPoly) -> (FpPoly, FpPoly) {
        let dd = d.degree().expect("division by zero polynomial");
        let p = self.p as u64;
        let inv = self.inv(d.lc()) as u64;
        let mut r: Vec<u64> = self.coeffs.iter().map(|&c| c as u64).collect();
        let mut q = vec![0u64; r.len().saturating_sub(dd)];
        while r.len() > dd {
            let top = *r.last().unwrap();
            let shift = r.len() - 1 - dd;
            if top != 0 {
                let f = top * inv % p;
                q[shift] = f;
                for (i, &c) in d.coeffs.iter().enumerate() {
                    r[shift + i] = (r[shift + i] + (p - f) * c as u64) % p;
                }
            }
            r.pop();
        }
        (FpPoly::new(self.p, q), FpPoly::new(self.p, r))
    }

    pub fn monic(&self) -> FpPoly {
        if self.is_zero() {
            return self.clone();
        }
        self.scale(self.inv(self.lc()))
    }

    pub fn gcd(&self, o: &FpPoly) -> FpPoly {
        let (mut a, mut b) = (self.clone(), o.clone());
        while !b.is_zero() {
            let r = a.div_rem(&b).1;
            a = b;
            b = r;
        }
        a.monic()
    }

    pub fn derivative(&self) -> FpPoly {
        let p = self.p as u64;
        FpPoly::new(
            self.p,
            self.coeffs.iter().enumerate().skip(1).map(|(i, &c)| (i as u64 % p) * c as u64 % p),
        )
    }

    /// `g(t)^p = g(t^p)`: coefficients are fixed by Frobenius, exponents scale by `p`.
    pub fn frobenius(&self) -> FpPoly {
        let p = self.p as usize;
        if self.is_zero() {
            return self.clone();
        }
        let mut out = vec![0u64; (self.coeffs.len() - 1) * p + 1];
        for (i, &c) in self.coeffs.iter().enumerate() {
            out[i * p] = c as u64;
        }
        FpPoly::new(self.p, out)
    }

    /// Repeated multiplication; used to cross-check [`FpPoly::frobenius`].
    pub fn pow(&self, e: u32) -> FpPoly {
        (0..e).fold(FpPoly::constant(self.p, 1), |acc, _| acc.mul(self))
    }

    pub fn random<R: Rng>(p: u32, max_degree: usize, rng: &mut R) -> FpPoly {
        FpPoly::new(p, (0..=max_degree).map(|_| rng.gen_range(0..p as u64)))
    }
}

impl fmt::Display for FpPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let s: Vec<String> = self.coeffs.iter().map(|c| c.to_string()).collect();
        f.write_str(&s.join(","))
    }
}

/// An element of `F_p(t)`: `num/den` with `gcd(num, den) = 1`, `den` monic.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FpRatFun {
    num: FpPoly,
    den: FpPoly,
}

impl FpRatFun {
    pub fn new(num: FpPoly, den: FpPoly) -> Result<Self, FfError> {
        if den.is_zero() {
            return Err(FfError::ZeroDenominator);
        }
        if num.p != den.p {
            return Err(FfError::Characteristic(num.p, den.p));
        }
        if num.is_zero() {
            return Ok(FpRatFun {
                den: FpPoly::constant(num.p, 1),
                num,
            });
        }
        let g = num.gcd(&den);
        let (n, _) = num.div_rem(&g);
        let (d, _) = den.div_rem(&g);
        let k = d.inv(d.lc());
        Ok(FpRatFun {
            num: n.scale(k),
            den: d.scale(k),
        })
    }

    pub fn from_poly(num: FpPoly) -> Self {
        let p = num.p;
        FpRatFun {
            num,
            den: FpPoly::constant(p, 1),
        }
    }

    pub fn constant(p: u32, c: u64) -> Self {
        Self::from_poly(FpPoly::constant(p, c))
    }

    pub fn t(p: u32) -> Self {
        Self::from_poly(FpPoly::t(p))
    }

    pub fn characteristic(&self) -> u32 {
        self.num.p
    }

    pub fn num(&self) -> &FpPoly {
        &self.num
    }

    pub fn den(&self) -> &FpPoly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn add(&self, o: &FpRatFun) -> FpRatFun {
        let n = self.num.mul(&o.den).add(&o.num.mul(&self.den));
        FpRatFun::new(n, self.den.mul(&o.den)).expect("nonzero")
    }

    pub fn neg(&self) -> FpRatFun {
        FpRatFun {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn sub(&self, o: &FpRatFun) -> FpRatFun {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &FpRatFun) -> FpRatFun {
        FpRatFun::new(self.num.mul(&o.num), self.den.mul(&o.den)).expect("nonzero")
    }

    /// `None` for division by zero.
    pub fn div(&self, o: &FpRatFun) -> Option<FpRatFun> {
        if o.is_zero() {
            return None;
        }
        FpRatFun::new(self.num.mul(&o.den), self.den.mul(&o.num)).ok()
    }

    /// `h^p` via Frobenius on numerator and denominator.
    pub fn frobenius(&self) -> FpRatFun {
        // gcd and monicity are preserved by Frobenius
        FpRatFun {
            num: self.num.frobenius(),
            den: self.den.frobenius(),
        }
    }

    pub fn pow(&self, e: u32) -> FpRatFun {
        (0..e).fold(FpRatFun::constant(self.characteristic(), 1), |acc, _| acc.mul(self))
    }

    /// Numerator of `dh/dt`, i.e. `num' * den - num * den'`.
    pub fn derivative_numerator(&self) -> FpPoly {
        self.num
            .derivative()
            .mul(&self.den)
            .sub(&self.num.mul(&self.den.derivative()))
    }

    pub fn random<R: Rng>(p: u32, max_degree: usize, rng: &mut R) -> FpRatFun {
        let num = FpPoly::random(p, max_degree, rng);
        loop {
            let den = FpPoly::random(p, max_degree, rng);
            if !den.is_zero() {
                return FpRatFun::new(num, den).expect("nonzero denominator");
            }
        }
    }
}

impl fmt::Display for FpRatFun {
    /// `num;den`, each a comma-separated coefficient list from `t^0` upward.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{};{}", self.num, self.den)
    }
}

/// Parses `num;den` (or just `num`) in characteristic `p`.
pub fn parse_ratfun(p: u32, s: &str) -> Result<FpRatFun, FfError> {
    let bad = || FfError::Malformed(s.to_string());
    let list = |part: &str| -> Result<FpPoly, FfError> {
        let part = part.trim();
        if part.is_empty() {
            return Err(bad());
        }
        let cs: Vec<u64> = part
            .split(',')
            .map(|c| c.trim().parse::<u64>().map_err(|_| bad()))
            .collect::<Result<_, _>>()?;
        Ok(FpPoly::new(p, cs))
    };
    let (n, d) = match s.split_once(';') {
        Some((n, d)) => (list(n)?, list(d)?),
        None => (list(s)?, FpPoly::constant(p, 1)),
    };
    FpRatFun::new(n, d)
}

/// A rational function serialized as `"num;den"` together with its characteristic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatFunText(pub FpRatFun);

impl Serialize for RatFunText {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        (self.0.characteristic(), self.0.to_string()).serialize(s)
    }
}

impl<'de> Deserialize<'de> for RatFunText {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let (p, s) = <(u32, String)>::deserialize(d)?;
        parse_ratfun(p, &s).map(RatFunText).map_err(serde::de::Error::custom)
    }
}

impl FromStr for RatFunText {
    type Err = FfError;

    /// `p:num;den`.
    fn from_str(s: &str) -> Result<Self, FfError> {
        let (p, rest) = s.split_once(':').ok_or_else(|| FfError::Malformed(s.to_string()))?;
        let p: u32 = p.trim().parse().map_err(|_| FfError::Malformed(s.to_string()))?;
        parse_ratfun(p, rest).map(RatFunText)
    }
}

/// `x^p + t*y^p`.
pub fn ff_eval_injection(x: &FpRatFun, y: &FpRatFun) -> FpRatFun {
    let p = x.characteristic();
    x.frobenius().add(&FpRatFun::t(p).mul(&y.frobenius()))
}

/// Over `F_p(t)`, `h` is a `p`-th power iff `dh/dt = 0`.
pub fn is_pth_power(h: &FpRatFun) -> bool {
    h.derivative_numerator().is_zero()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VerificationResult {
    EqualInputs,
    /// `f(x1, y1) - f(x2, y2)`, nonzero.
    DistinctValues(FpRatFun),
    /// Distinct inputs with equal values: `t = s^p`. Unreachable for a
    /// correct implementation, since `t` is not a `p`-th power.
    PthPowerWitness(FpRatFun),
}

pub fn verify_injection(a: (&FpRatFun, &FpRatFun), b: (&FpRatFun, &FpRatFun)) -> VerificationResult {
    if a.0 == b.0 && a.1 == b.1 {
        return VerificationResult::EqualInputs;
    }
    let delta = ff_eval_injection(a.0, a.1).sub(&ff_eval_injection(b.0, b.1));
    if !delta.is_zero() {
        return VerificationResult::DistinctValues(delta);
    }
    // (x1 - x2)^p = t (y2 - y1)^p
    let dx = a.0.sub(b.0);
    let dy = b.1.sub(a.1);
    let s = dx.div(&dy).unwrap_or_else(|| dx.clone());
    VerificationResult::PthPowerWitness(s)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FfSearchReport {
    pub p: u32,
    pub degree_bound: usize,
    pub trials: u64,
    pub seed: u64,
    pub equal_inputs: u64,
    pub distinct_values: u64,
    /// Distinct inputs with equal values. Must be zero.
    pub collisions: u64,
    /// First offending pair, if any, as `"num;den"` strings.
    pub first_collision: Option<[String; 4]>,
}

const CHUNK: u64 = 1024;

/// Samples `trials` pairs of input pairs with numerator and denominator
/// degrees at most `degree_bound` and checks every one.
pub fn ff_collision_search(p: u32, degree_bound: usize, trials: u64, seed: u64) -> Result<FfSearchReport, FfError> {
    if !is_prime_u64(p as u64) {
        return Err(FfError::NotPrime(p as u64));
    }
    let chunks = trials.div_ceil(CHUNK);
    let partial: Vec<(u64, u64, u64, Option<[String; 4]>)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c);
            let n = CHUNK.min(trials - c * CHUNK);
            let (mut eq, mut distinct, mut coll) = (0, 0, 0);
            let mut first = None;
            for _ in 0..n {
                let xs: Vec<FpRatFun> = (0..4).map(|_| FpRatFun::random(p, degree_bound, &mut rng)).collect();
                match verify_injection((&xs[0], &xs[1]), (&xs[2], &xs[3])) {
                    VerificationResult::EqualInputs => eq += 1,
                    VerificationResult::DistinctValues(_) => distinct += 1,
                    VerificationResult::PthPowerWitness(_) => {
                        coll += 1;
                        first.get_or_insert_with(|| {
                            [xs[0].to_string(), xs[1].to_string(), xs[2].to_string(), xs[3].to_string()]
                        });
                    }
                }
            }
            (eq, distinct, coll, first)
        })
        .collect();
    let mut report = FfSearchReport {
        p,
        degree_bound,
        trials,
        seed,
        equal_inputs: 0,
        distinct_values: 0,
        collisions: 0,
        first_collision: None,
    };
    for (eq, d, c, first) in partial {
        report.equal_inputs += eq;
        report.distinct_values += d;
        report.collisions += c;
        if report.first_collision.is_none() {
            report.first_collision = first;
        }
    }
    Ok(report)
}
