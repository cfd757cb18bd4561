//! Collisions of a nonconstant `f(x, y)` over local fields.
//!
//! Near a point where `df/dy` does not vanish, the level curve
//! `f(x, y) = f(x0, y0)` is smooth, so moving `x` a little and re-solving for
//! `y` gives a second point with the same value. Over `R` the solve is
//! bracketing plus Newton in double precision; over `Q_p` it is Hensel
//! lifting of a simple root modulo `p`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{is_prime_u64, valuation, Rational};
use crate::poly::upoly::UPoly;
use crate::poly::{MultiPoly, PolyError, Var};

/// Requested real tolerances below this are raised to it.
pub const TOL_FLOOR: f64 = 1e-12;

const MAX_NEWTON: usize = 200;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LocalError {
    #[error(transparent)]
    Variables(#[from] PolyError),
    #[error("polynomial is constant")]
    Constant,
    #[error("df/dy vanishes at the base point; move the base point")]
    DerivativeVanishes,
    #[error("no sign change found for y within 2^32 of the base point; move the base point")]
    NoBracket,
    #[error("Newton polishing stalled at residual {residual:e}")]
    NoConvergence { residual: f64 },
    #[error("tolerance must be a nonnegative finite number")]
    BadTolerance,
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("precision must be at least 1")]
    ZeroPrecision,
    #[error("a coefficient of f has a denominator divisible by {0}")]
    NonIntegral(u64),
    #[error("no simple root of f(x0 + delta, y) = f(x0, y0) modulo {p}; try a different delta or prime")]
    HenselInapplicable { p: u64 },
}

/// A real point on the level curve through the base point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealPoint {
    pub x: f64,
    pub y: f64,
    /// `|f(x, y) - c|`, evaluated exactly at the returned doubles.
    pub residual: f64,
    pub tolerance: f64,
    pub base: (Rational, Rational),
    pub delta: Rational,
    /// `c = f(x0, y0)`.
    pub value: Rational,
}

/// A `p`-adic approximation to a second point on the level curve.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PadicApprox {
    pub p: u64,
    pub precision: u32,
    #[serde(with = "crate::arith::bigint_serde::pair")]
    pub base: (BigInt, BigInt),
    #[serde(with = "crate::arith::bigint_serde")]
    pub delta: BigInt,
    /// `x0 + delta`.
    #[serde(with = "crate::arith::bigint_serde")]
    pub x: BigInt,
    /// Symmetric representative modulo `p^precision`.
    #[serde(with = "crate::arith::bigint_serde")]
    pub y: BigInt,
    pub seed: u64,
    /// `v_p(f(x, y) - c)` of the returned integers; `None` when it is exactly zero.
    pub residual_valuation: Option<u32>,
    /// Valuation modulo `p^precision` after the seed and after each Newton step.
    pub iteration_valuations: Vec<u32>,
    /// `(x, y) != (x0, y0)` modulo `p^precision`.
    pub distinct_mod_pk: bool,
}

/// `h(y) = f(x1, y) - c` as an exact univariate polynomial.
fn level_section(f: &MultiPoly, x1: &Rational, c: &Rational) -> UPoly {
    let deg = f.degree_in(Var::Y) as usize;
    let mut coeffs = vec![Rational::zero(); deg + 1];
    let mut xpow: Vec<Rational> = vec![Rational::one()];
    for (e, k) in f.terms() {
        while xpow.len() <= e[0] as usize {
            let next = xpow.last().unwrap() * x1;
            xpow.push(next);
        }
        coeffs[e[1] as usize] = &coeffs[e[1] as usize] + &(k * &xpow[e[0] as usize]);
    }
    coeffs[0] = &coeffs[0] - c;
    UPoly::new(coeffs)
}

fn xy(f: &MultiPoly) -> Result<MultiPoly, LocalError> {
    let f = f.with_vars(&[Var::X, Var::Y])?;
    if f.total_degree().unwrap_or(0) == 0 {
        return Err(LocalError::Constant);
    }
    Ok(f)
}

fn exact(t: f64) -> Rational {
    Rational::from_f64(t).expect("finite")
}

/// Real collision partner of `(x0, y0)`: `x1 = x0 + delta` (default `1/1024`)
/// and `y1` solving `f(x1, y1) = f(x0, y0)`.
pub fn real_collision(
    f: &MultiPoly,
    x0: &Rational,
    y0: &Rational,
    tol: f64,
    delta: Option<Rational>,
) -> Result<RealPoint, LocalError> {
    if !(tol >= 0.0 && tol.is_finite()) {
        return Err(LocalError::BadTolerance);
    }
    let tolerance = tol.max(TOL_FLOOR);
    let f = xy(f)?;
    let base = [x0.clone(), y0.clone()];
    if f.derivative(Var::Y).eval(&base)?.is_zero() {
        return Err(LocalError::DerivativeVanishes);
    }
    let delta = delta.unwrap_or_else(|| Rational::new(1, 1024).unwrap());
    let c = f.eval(&base)?;
    let x1 = x0 + &delta;
    let h = level_section(&f, &x1, &c);
    let dh = h.derivative();

    let finish = |y: f64| -> RealPoint {
        let residual = h.eval(&exact(y)).abs().to_f64();
        RealPoint {
            x: x1.to_f64(),
            y,
            residual,
            tolerance,
            base: (x0.clone(), y0.clone()),
            delta: delta.clone(),
            value: c.clone(),
        }
    };
    let sign = |t: f64| {
        let v = h.eval(&exact(t));
        if v.is_zero() {
            0
        } else if v.is_negative() {
            -1
        } else {
            1
        }
    };

    let y0f = y0.to_f64();
    if h.is_zero() || sign(y0f) == 0 {
        return Ok(finish(y0f));
    }
    let s0 = sign(y0f);

    let mut bracket = None;
    'expand: for j in 0..=32 {
        let r = (2.0f64).powi(j);
        let mut found: Vec<(f64, f64)> = Vec::new();
        for end in [y0f + r, y0f - r] {
            let s = sign(end);
            if s == 0 {
                return Ok(finish(end));
            }
            if s != s0 {
                found.push(if end > y0f { (y0f, end) } else { (end, y0f) });
            }
        }
        if !found.is_empty() {
            // bisect each candidate to 1e-4 and keep the root nearest y0
            let mut best: Option<(f64, f64)> = None;
            for (mut lo, mut hi) in found {
                let slo = sign(lo);
                while hi - lo > 1e-4 {
                    let mid = 0.5 * (lo + hi);
                    match sign(mid) {
                        0 => return Ok(finish(mid)),
                        s if s == slo => lo = mid,
                        _ => hi = mid,
                    }
                }
                let dist = (0.5 * (lo + hi) - y0f).abs();
                if best.is_none_or(|(a, b)| dist < (0.5 * (a + b) - y0f).abs()) {
                    best = Some((lo, hi));
                }
            }
            bracket = best;
            break 'expand;
        }
    }
    let (mut lo, mut hi) = bracket.ok_or(LocalError::NoBracket)?;
    let slo = sign(lo);

    // Newton with exact step computation, safeguarded by the bracket
    let mut y = 0.5 * (lo + hi);
    for _ in 0..MAX_NEWTON {
        let yr = exact(y);
        let hv = h.eval(&yr);
        if hv.abs().to_f64() <= tolerance {
            return Ok(finish(y));
        }
        if hv.is_zero() {
            return Ok(finish(y));
        }
        if (hv.is_negative() && slo < 0) || (!hv.is_negative() && slo > 0) {
            lo = y;
        } else {
            hi = y;
        }
        let dv = dh.eval(&yr);
        let next = if dv.is_zero() {
            0.5 * (lo + hi)
        } else {
            let n = (&yr - &hv.checked_div(&dv).unwrap()).to_f64();
            if n > lo && n < hi && n.is_finite() {
                n
            } else {
                0.5 * (lo + hi)
            }
        };
        if next == y {
            break;
        }
        y = next;
    }
    // last resort: the best of the neighbouring doubles
    let mut best = finish(y);
    let mut t = y;
    for _ in 0..4 {
        t = f64::from_bits(t.to_bits() + 1);
        let cand = finish(t);
        if cand.residual < best.residual {
            best = cand;
        }
    }
    if best.residual <= tolerance {
        Ok(best)
    } else {
        Err(LocalError::NoConvergence { residual: best.residual })
    }
}

/// Reduces `n/d` modulo `m` (`d` invertible mod `m`).
fn reduce_mod(r: &Rational, m: &BigInt) -> Option<BigInt> {
    let inv = r.denom().mod_floor(m).modinv(m)?;
    Some((r.numer() * inv).mod_floor(m))
}

fn eval_mod(h: &[BigInt], y: &BigInt, m: &BigInt) -> BigInt {
    h.iter()
        .rev()
        .fold(BigInt::zero(), |acc, c| (acc * y + c).mod_floor(m))
}

fn capped_valuation(v: &BigInt, p: u64, k: u32) -> u32 {
    valuation(v, p).map_or(k, |x| x.min(k))
}

/// Hensel-lifted collision partner of the integer point `(x0, y0)` in
/// `Z/p^k`: `x = x0 + delta`, `y` with `v_p(f(x, y) - f(x0, y0)) >= k`.
pub fn padic_collision(
    f: &MultiPoly,
    p: u64,
    k: u32,
    base: (BigInt, BigInt),
    delta: BigInt,
) -> Result<PadicApprox, LocalError> {
    if !is_prime_u64(p) {
        return Err(LocalError::NotPrime(p));
    }
    if k == 0 {
        return Err(LocalError::ZeroPrecision);
    }
    let f = xy(f)?;
    let pb = BigInt::from(p);
    if f.terms().iter().any(|(_, c)| c.denom().is_multiple_of(&pb)) {
        return Err(LocalError::NonIntegral(p));
    }
    let (x0, y0) = base;
    let c = f.eval(&[Rational::from(x0.clone()), Rational::from(y0.clone())])?;
    let x1 = &x0 + &delta;
    let h = level_section(&f, &Rational::from(x1.clone()), &c);
    let dh = h.derivative();

    let m = pb.pow(k);
    let hm: Vec<BigInt> = h.coeffs().iter().map(|r| reduce_mod(r, &m).unwrap()).collect();
    let dhm: Vec<BigInt> = dh.coeffs().iter().map(|r| reduce_mod(r, &m).unwrap()).collect();

    let seed = (0..p)
        .find(|&s| {
            let sb = BigInt::from(s);
            eval_mod(&hm, &sb, &pb).is_zero() && !eval_mod(&dhm, &sb, &pb).is_zero()
        })
        .ok_or(LocalError::HenselInapplicable { p })?;

    let mut y = BigInt::from(seed);
    let mut vals = vec![capped_valuation(&eval_mod(&hm, &y, &m), p, k)];
    while *vals.last().unwrap() < k {
        let hv = eval_mod(&hm, &y, &m);
        let inv = eval_mod(&dhm, &y, &m)
            .modinv(&m)
            .expect("derivative is a unit along the lift");
        y = (&y - hv * inv).mod_floor(&m);
        vals.push(capped_valuation(&eval_mod(&hm, &y, &m), p, k));
        debug_assert!(vals.len() < 64);
    }
    let half = &m >> 1;
    let y_sym = if y > half { &y - &m } else { y };
    let residual = h.eval(&Rational::from(y_sym.clone()));
    let residual_valuation = if residual.is_zero() {
        None
    } else {
        valuation(residual.numer(), p)
    };
    let distinct_mod_pk = !delta.mod_floor(&m).is_zero() || !(&y_sym - &y0).mod_floor(&m).is_zero();

    Ok(PadicApprox {
        p,
        precision: k,
        base: (x0, y0),
        delta,
        x: x1,
        y: y_sym,
        seed,
        residual_valuation,
        iteration_valuations: vals,
        distinct_mod_pk,
    })
}

impl PadicApprox {
    /// Residual valuation reaches the requested precision.
    pub fn certified(&self) -> bool {
        self.residual_valuation.is_none_or(|v| v >= self.precision)
    }
}
