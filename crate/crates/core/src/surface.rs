//! Rational points of bounded height on the surface `F(x, y) = F(z, w)` in
//! `P^3`, split into points on trivial lines and exceptional points.
//!
//! Over `Q` the only roots of unity are `±1`, so the trivial lines are the
//! diagonal `x = z, y = w` and, for even degree, the antidiagonal
//! `x = -z, y = -w`. Both always lie on the surface.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::arith::{Rational, DEFAULT_PRIMES};
use crate::join::{equal_value_groups, residue_table, Fingerprinter, JoinStats};
use crate::poly::BinaryForm;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SurfaceError {
    #[error("all four coordinates are zero")]
    AllZero,
    #[error("height bound must be at least 1")]
    ZeroHeight,
}

/// A point of `P^3(Q)` as a primitive integer 4-tuple whose first nonzero
/// coordinate is positive.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ProjPoint([BigInt; 4]);

impl ProjPoint {
    pub fn new(coords: [BigInt; 4]) -> Result<Self, SurfaceError> {
        let g = coords.iter().fold(BigInt::zero(), |g, c| g.gcd(c));
        if g.is_zero() {
            return Err(SurfaceError::AllZero);
        }
        let first_negative = coords.iter().find(|c| !c.is_zero()).unwrap().is_negative();
        let g = if first_negative { -g } else { g };
        Ok(ProjPoint(coords.map(|c| c / &g)))
    }

    pub fn from_i64(c: [i64; 4]) -> Result<Self, SurfaceError> {
        Self::new(c.map(BigInt::from))
    }

    pub fn coords(&self) -> &[BigInt; 4] {
        &self.0
    }

    /// Max absolute coordinate.
    pub fn height(&self) -> BigInt {
        self.0.iter().map(|c| c.abs()).max().unwrap()
    }

    /// `(x:y:z:w) -> (z:w:x:y)`, canonicalized.
    pub fn swap(&self) -> ProjPoint {
        let [x, y, z, w] = self.0.clone();
        ProjPoint::new([z, w, x, y]).expect("nonzero")
    }

    /// Whether `F(x, y) = F(z, w)` holds exactly.
    pub fn lies_on(&self, form: &BinaryForm) -> bool {
        let r: Vec<Rational> = self.0.iter().cloned().map(Rational::from).collect();
        form.eval(&r[0], &r[1]) == form.eval(&r[2], &r[3])
    }
}

impl fmt::Debug for ProjPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [x, y, z, w] = &self.0;
        write!(f, "({x}:{y}:{z}:{w})")
    }
}

impl fmt::Display for ProjPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl Serialize for ProjPoint {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let strs: Vec<String> = self.0.iter().map(|c| c.to_string()).collect();
        strs.serialize(s)
    }
}

impl<'de> Deserialize<'de> for ProjPoint {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let strs = <[String; 4]>::deserialize(d)?;
        let mut c: [BigInt; 4] = Default::default();
        for (slot, s) in c.iter_mut().zip(&strs) {
            *slot = s.parse().map_err(D::Error::custom)?;
        }
        let p = ProjPoint::new(c.clone()).map_err(D::Error::custom)?;
        if p.0 != c {
            return Err(D::Error::custom("point is not in canonical form"));
        }
        Ok(p)
    }
}

/// `Some(1)` on the diagonal line, `Some(-1)` on the antidiagonal when `d` is
/// even, otherwise `None`.
pub fn is_trivial_point(p: &ProjPoint, d: u32) -> Option<i8> {
    let [x, y, z, w] = &p.0;
    if x == z && y == w {
        Some(1)
    } else if d.is_multiple_of(2) && *x == -z && *y == -w {
        Some(-1)
    } else {
        None
    }
}

/// Stable partition into `(trivial, exceptional)`.
pub fn classify(points: &[ProjPoint], d: u32) -> (Vec<ProjPoint>, Vec<ProjPoint>) {
    points.iter().cloned().partition(|p| is_trivial_point(p, d).is_some())
}

/// Result of a bounded-height scan.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointSet {
    pub form: BinaryForm,
    pub height_bound: u64,
    pub trivial: Vec<ProjPoint>,
    pub exceptional: Vec<ProjPoint>,
}

impl PointSet {
    pub fn report(&self) -> SurfaceReport {
        SurfaceReport {
            form: self.form.clone(),
            height: self.height_bound,
            trivial_count: self.trivial.len(),
            exceptional: self.exceptional.clone(),
        }
    }

    pub fn all_points(&self) -> impl Iterator<Item = &ProjPoint> {
        self.trivial.iter().chain(&self.exceptional)
    }
}

/// The published surface report: counts trivial points, lists exceptional ones.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurfaceReport {
    pub form: BinaryForm,
    pub height: u64,
    pub trivial_count: usize,
    pub exceptional: Vec<ProjPoint>,
}

#[derive(Debug, Clone)]
pub struct ScanConfig {
    /// Buckets are sharded by this many top bits of the first residue.
    pub shard_bits: u32,
    /// Fingerprint primes; the first two key the join, the next two split
    /// oversized buckets.
    pub primes: [u64; 4],
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig {
            shard_bits: 6,
            primes: DEFAULT_PRIMES,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanStats {
    pub pairs: u64,
    pub fingerprint_candidates: u64,
    pub exact_confirms: u64,
}

/// Every canonical point with all `|coords| <= height` on `F(x, y) = F(z, w)`.
pub fn scan_surface(form: &BinaryForm, height: u64) -> Result<PointSet, SurfaceError> {
    scan_surface_with(form, height, &ScanConfig::default()).map(|(s, _)| s)
}

pub fn scan_surface_with(
    form: &BinaryForm,
    height: u64,
    cfg: &ScanConfig,
) -> Result<(PointSet, ScanStats), SurfaceError> {
    if height == 0 {
        return Err(SurfaceError::ZeroHeight);
    }
    let h = height as i64;
    let side: Vec<Rational> = (-h..=h).map(Rational::from).collect();
    let n = side.len();
    let npairs = n * n;
    let pair = |i: usize| (i / n, i % n);

    let poly = form.to_poly();
    let fp = Fingerprinter::new(&poly, &cfg.primes);
    let table = residue_table(&side, &cfg.primes);
    let residue = |slot: usize, i: usize| {
        let (a, b) = pair(i);
        fp.residue(slot, &[table[slot][a], table[slot][b]], || vec![side[a].clone(), side[b].clone()])
    };

    let keys: Vec<[u64; 2]> = (0..npairs)
        .into_par_iter()
        .map(|i| [residue(0, i), residue(1, i)])
        .collect();
    let (groups, jstats): (Vec<Vec<usize>>, JoinStats) = equal_value_groups(
        &keys,
        cfg.shard_bits,
        |i| [residue(2, i), residue(3, i)],
        |i| {
            let (a, b) = pair(i);
            form.eval(&side[a], &side[b])
        },
    );

    let coords = |i: usize| {
        let (a, b) = pair(i);
        (BigInt::from(a as i64 - h), BigInt::from(b as i64 - h))
    };
    let mut points: BTreeSet<ProjPoint> = BTreeSet::new();
    for i in 0..npairs {
        let (x, y) = coords(i);
        if let Ok(p) = ProjPoint::new([x.clone(), y.clone(), x, y]) {
            points.insert(p);
        }
    }
    for g in &groups {
        for &i in g {
            for &j in g {
                if i != j {
                    let (x, y) = coords(i);
                    let (z, w) = coords(j);
                    points.insert(ProjPoint::new([x, y, z, w]).expect("distinct pairs are not both zero"));
                }
            }
        }
    }
    let points: Vec<ProjPoint> = points.into_iter().collect();
    let (trivial, exceptional) = classify(&points, form.degree());
    Ok((
        PointSet {
            form: form.clone(),
            height_bound: height,
            trivial,
            exceptional,
        },
        ScanStats {
            pairs: npairs as u64,
            fingerprint_candidates: jstats.candidates,
            exact_confirms: jstats.exact_confirms,
        },
    ))
}
