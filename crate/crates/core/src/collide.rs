//! Exhaustive exact search for collisions `f(x, y) = f(z, w)` with
//! `(x, y) != (z, w)` over inputs of bounded height.
//!
//! Inputs are split into contiguous shards. Each shard computes a two-prime
//! fingerprint of `f` at every input pair; the fingerprints are joined and
//! every shared bucket is confirmed with exact rational arithmetic, so every
//! reported collision is exact. Completed shards can be appended to a
//! checkpoint file and a later run resumes from it.

use std::collections::{BTreeMap, HashMap};
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::Instant;

use num_bigint::BigInt;
use num_integer::Integer;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{Rational, DEFAULT_PRIMES};
use crate::join::{equal_value_groups, residue_table, Fingerprinter};
use crate::poly::{MultiPoly, PolyError, Var};

/// Carried verbatim in every report.
pub const DISCLAIMER: &str =
    "bounded-height search: an empty collision list is evidence of injectivity up to the stated height, not a proof";

#[derive(Debug, Error)]
pub enum CollideError {
    #[error("polynomial must only use x and y: {0}")]
    Variables(#[from] PolyError),
    #[error("height bound must be at least 1")]
    ZeroHeight,
    #[error("shard count must be at least 1")]
    ZeroShards,
    #[error("checkpoint {path}: {source}")]
    Checkpoint {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("checkpoint {path} does not match this search: {reason}")]
    CheckpointMismatch { path: PathBuf, reason: String },
    #[error("interrupted after {completed} of {total} shards; resume from the checkpoint")]
    Interrupted { completed: usize, total: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// `{-H..H}^2`
    Integers,
    /// `{r : height(r) <= H}^2`
    Rationals,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchSpace {
    pub mode: Mode,
    pub height_bound: u64,
}

impl SearchSpace {
    pub fn integers(h: u64) -> Self {
        SearchSpace {
            mode: Mode::Integers,
            height_bound: h,
        }
    }

    pub fn rationals(h: u64) -> Self {
        SearchSpace {
            mode: Mode::Rationals,
            height_bound: h,
        }
    }

    /// The coordinate values, in the order used to index input pairs.
    pub fn coordinate_values(&self) -> Vec<Rational> {
        let h = self.height_bound as i64;
        match self.mode {
            Mode::Integers => (-h..=h).map(Rational::from).collect(),
            Mode::Rationals => enumerate_inputs(self.height_bound),
        }
    }
}

/// The canonical rationals of height at most `h`, ordered by height, then
/// numerator, then denominator.
pub fn enumerate_inputs(h: u64) -> Vec<Rational> {
    let mut out: Vec<(u64, BigInt, BigInt)> = Vec::new();
    if h == 0 {
        return Vec::new();
    }
    for n in -1..=1i64 {
        out.push((1, BigInt::from(n), BigInt::from(1)));
    }
    for k in 2..=h {
        let ki = k as i64;
        // numerator magnitude k with any smaller coprime denominator, or
        // denominator k with any smaller coprime numerator
        for b in 1..ki {
            if ki.gcd(&b) == 1 {
                out.push((k, BigInt::from(ki), BigInt::from(b)));
                out.push((k, BigInt::from(-ki), BigInt::from(b)));
            }
        }
        for a in 1..ki {
            if a.gcd(&ki) == 1 {
                out.push((k, BigInt::from(a), BigInt::from(ki)));
                out.push((k, BigInt::from(-a), BigInt::from(ki)));
            }
        }
    }
    out.sort();
    out.into_iter()
        .map(|(_, n, d)| Rational::new(n, d).expect("nonzero denominator"))
        .collect()
}

/// Two distinct inputs with the same value; `first < second`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Collision {
    pub first: (Rational, Rational),
    pub second: (Rational, Rational),
    pub value: Rational,
}

impl Collision {
    fn new(a: (Rational, Rational), b: (Rational, Rational), value: Rational) -> Self {
        let (first, second) = if a <= b { (a, b) } else { (b, a) };
        Collision { first, second, value }
    }

    /// Independent re-check of the collision against `f`.
    pub fn verify(&self, f: &MultiPoly) -> bool {
        let at = |p: &(Rational, Rational)| f.eval_named(&[(Var::X, p.0.clone()), (Var::Y, p.1.clone())]);
        self.first != self.second
            && matches!((at(&self.first), at(&self.second)), (Ok(a), Ok(b)) if a == b && a == self.value)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchStats {
    pub inputs_evaluated: u64,
    pub fingerprint_candidates: u64,
    pub exact_confirms: u64,
    pub wall_time_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckpointInfo {
    pub path: String,
    pub shards: usize,
    pub completed_shards: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CollisionReport {
    pub poly: MultiPoly,
    pub space: SearchSpace,
    pub primes: Vec<u64>,
    pub collisions: Vec<Collision>,
    pub stats: SearchStats,
    pub checkpoint: Option<CheckpointInfo>,
    pub disclaimer: String,
}

impl CollisionReport {
    /// The report with wall time zeroed and checkpoint bookkeeping removed,
    /// for comparing runs.
    pub fn normalized(&self) -> CollisionReport {
        let mut r = self.clone();
        r.stats.wall_time_ms = 0;
        r.checkpoint = None;
        r
    }
}

#[derive(Debug, Clone)]
pub struct SearchConfig {
    pub shards: usize,
    pub primes: [u64; 4],
    /// Bucket sharding for the join phase.
    pub join_shard_bits: u32,
    pub checkpoint: Option<PathBuf>,
    pub resume: bool,
    /// Stop after this many newly completed shards and report
    /// [`CollideError::Interrupted`], as if the process had been killed.
    pub stop_after_shards: Option<usize>,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            shards: 16,
            primes: DEFAULT_PRIMES,
            join_shard_bits: 6,
            checkpoint: None,
            resume: false,
            stop_after_shards: None,
        }
    }
}

pub fn find_collisions(f: &MultiPoly, space: SearchSpace) -> Result<CollisionReport, CollideError> {
    find_collisions_with(f, space, &SearchConfig::default())
}

struct Space {
    f: MultiPoly,
    vals: Vec<Rational>,
}

impl Space {
    fn new(f: &MultiPoly, space: SearchSpace) -> Result<Self, CollideError> {
        if space.height_bound == 0 {
            return Err(CollideError::ZeroHeight);
        }
        Ok(Space {
            f: f.with_vars(&[Var::X, Var::Y])?,
            vals: space.coordinate_values(),
        })
    }

    fn npairs(&self) -> usize {
        self.vals.len() * self.vals.len()
    }

    fn pair(&self, i: usize) -> (usize, usize) {
        (i / self.vals.len(), i % self.vals.len())
    }

    fn point(&self, i: usize) -> (Rational, Rational) {
        let (a, b) = self.pair(i);
        (self.vals[a].clone(), self.vals[b].clone())
    }

    fn value(&self, i: usize) -> Rational {
        let (x, y) = self.point(i);
        self.f.eval(&[x, y]).expect("two coordinates")
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum CheckpointLine {
    Header {
        poly: MultiPoly,
        space: SearchSpace,
        shards: usize,
        primes: Vec<u64>,
    },
    Shard {
        id: usize,
        keys: Vec<[u64; 2]>,
    },
}

fn shard_range(k: usize, shards: usize, n: usize) -> std::ops::Range<usize> {
    (k * n / shards)..((k + 1) * n / shards)
}

/// Reads completed shards, tolerating a truncated final line.
fn read_checkpoint(
    path: &Path,
    header: &CheckpointLine,
    shards: usize,
    npairs: usize,
) -> Result<BTreeMap<usize, Vec<[u64; 2]>>, CollideError> {
    let io = |source| CollideError::Checkpoint {
        path: path.to_path_buf(),
        source,
    };
    let mismatch = |reason: String| CollideError::CheckpointMismatch {
        path: path.to_path_buf(),
        reason,
    };
    let file = File::open(path).map_err(io)?;
    let lines: Vec<String> = BufReader::new(file).lines().collect::<Result<_, _>>().map_err(io)?;
    let mut done = BTreeMap::new();
    let Some(first) = lines.first() else {
        return Err(mismatch("empty checkpoint".into()));
    };
    let got: CheckpointLine = serde_json::from_str(first).map_err(|e| mismatch(format!("bad header: {e}")))?;
    if serde_json::to_value(&got).ok() != serde_json::to_value(header).ok() {
        return Err(mismatch("header differs (polynomial, space, shard count or primes)".into()));
    }
    for (lineno, line) in lines.iter().enumerate().skip(1) {
        match serde_json::from_str::<CheckpointLine>(line) {
            Ok(CheckpointLine::Shard { id, keys }) => {
                if id >= shards || keys.len() != shard_range(id, shards, npairs).len() {
                    return Err(mismatch(format!("line {}: shard {id} has the wrong size", lineno + 1)));
                }
                done.insert(id, keys);
            }
            Ok(CheckpointLine::Header { .. }) => {
                return Err(mismatch(format!("line {}: repeated header", lineno + 1)));
            }
            Err(_) if lineno + 1 == lines.len() => {} // torn final write
            Err(e) => return Err(mismatch(format!("line {}: {e}", lineno + 1))),
        }
    }
    Ok(done)
}

pub fn find_collisions_with(
    f: &MultiPoly,
    space: SearchSpace,
    cfg: &SearchConfig,
) -> Result<CollisionReport, CollideError> {
    let started = Instant::now();
    if cfg.shards == 0 {
        return Err(CollideError::ZeroShards);
    }
    let sp = Space::new(f, space)?;
    let npairs = sp.npairs();
    let shards = cfg.shards;
    let primes = cfg.primes;

    let header = CheckpointLine::Header {
        poly: sp.f.clone(),
        space,
        shards,
        primes: primes.to_vec(),
    };
    let mut done: BTreeMap<usize, Vec<[u64; 2]>> = BTreeMap::new();
    let writer: Option<Mutex<File>> = match &cfg.checkpoint {
        None => None,
        Some(path) => {
            let io = |source| CollideError::Checkpoint {
                path: path.clone(),
                source,
            };
            if cfg.resume && path.exists() {
                done = read_checkpoint(path, &header, shards, npairs)?;
                // rewrite without any torn tail so appends stay line-aligned
                let mut file = File::create(path).map_err(io)?;
                writeln!(file, "{}", serde_json::to_string(&header).unwrap()).map_err(io)?;
                for (id, keys) in &done {
                    let line = CheckpointLine::Shard { id: *id, keys: keys.clone() };
                    writeln!(file, "{}", serde_json::to_string(&line).unwrap()).map_err(io)?;
                }
                file.sync_all().map_err(io)?;
                Some(Mutex::new(OpenOptions::new().append(true).open(path).map_err(io)?))
            } else {
                let mut file = File::create(path).map_err(io)?;
                writeln!(file, "{}", serde_json::to_string(&header).unwrap()).map_err(io)?;
                Some(Mutex::new(file))
            }
        }
    };

    let fp = Fingerprinter::new(&sp.f, &primes);
    let table = residue_table(&sp.vals, &primes);
    let residue = |slot: usize, i: usize| {
        let (a, b) = sp.pair(i);
        fp.residue(slot, &[table[slot][a], table[slot][b]], || {
            vec![sp.vals[a].clone(), sp.vals[b].clone()]
        })
    };

    let mut pending: Vec<usize> = (0..shards).filter(|k| !done.contains_key(k)).collect();
    let interrupted = match cfg.stop_after_shards {
        Some(m) if m < pending.len() => {
            pending.truncate(m);
            true
        }
        _ => false,
    };

    let fresh: Vec<(usize, Vec<[u64; 2]>)> = pending
        .into_par_iter()
        .map(|k| {
            let keys: Vec<[u64; 2]> = shard_range(k, shards, npairs)
                .map(|i| [residue(0, i), residue(1, i)])
                .collect();
            if let (Some(w), Some(path)) = (&writer, &cfg.checkpoint) {
                let line = serde_json::to_string(&CheckpointLine::Shard { id: k, keys: keys.clone() }).unwrap();
                let mut file = w.lock().unwrap();
                writeln!(file, "{line}")
                    .and_then(|_| file.flush())
                    .map_err(|source| CollideError::Checkpoint {
                        path: path.clone(),
                        source,
                    })?;
            }
            Ok((k, keys))
        })
        .collect::<Result<_, CollideError>>()?;
    done.extend(fresh);

    if interrupted {
        return Err(CollideError::Interrupted {
            completed: done.len(),
            total: shards,
        });
    }

    let keys: Vec<[u64; 2]> = done.into_values().flatten().collect();
    debug_assert_eq!(keys.len(), npairs);
    let (groups, jstats) = equal_value_groups(
        &keys,
        cfg.join_shard_bits,
        |i| [residue(2, i), residue(3, i)],
        |i| sp.value(i),
    );

    let mut collisions = Vec::new();
    for g in groups {
        let value = sp.value(g[0]);
        for (k, &i) in g.iter().enumerate() {
            for &j in &g[k + 1..] {
                collisions.push(Collision::new(sp.point(i), sp.point(j), value.clone()));
            }
        }
    }
    collisions.sort();

    Ok(CollisionReport {
        poly: sp.f.clone(),
        space,
        primes: primes.to_vec(),
        collisions,
        stats: SearchStats {
            inputs_evaluated: npairs as u64,
            fingerprint_candidates: jstats.candidates,
            exact_confirms: jstats.exact_confirms,
            wall_time_ms: started.elapsed().as_millis() as u64,
        },
        checkpoint: cfg.checkpoint.as_ref().map(|p| CheckpointInfo {
            path: p.display().to_string(),
            shards,
            completed_shards: shards,
        }),
        disclaimer: DISCLAIMER.to_string(),
    })
}

/// All-pairs exact comparison; the testing oracle for [`find_collisions`].
pub fn naive_collisions(f: &MultiPoly, space: SearchSpace) -> Result<CollisionReport, CollideError> {
    let started = Instant::now();
    let sp = Space::new(f, space)?;
    let n = sp.npairs();
    let values: Vec<Rational> = (0..n).map(|i| sp.value(i)).collect();
    let mut collisions = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if values[i] == values[j] {
                collisions.push(Collision::new(sp.point(i), sp.point(j), values[i].clone()));
            }
        }
    }
    collisions.sort();
    let n = n as u64;
    Ok(CollisionReport {
        poly: sp.f,
        space,
        primes: Vec::new(),
        collisions,
        stats: SearchStats {
            inputs_evaluated: n,
            fingerprint_candidates: 0,
            exact_confirms: n * n.saturating_sub(1) / 2,
            wall_time_ms: started.elapsed().as_millis() as u64,
        },
        checkpoint: None,
        disclaimer: DISCLAIMER.to_string(),
    })
}

/// Counts collisions per distinct value; handy for summarizing large reports.
pub fn collisions_by_value(report: &CollisionReport) -> HashMap<Rational, usize> {
    let mut m = HashMap::new();
    for c in &report.collisions {
        *m.entry(c.value.clone()).or_insert(0) += 1;
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_poly;

    fn r(n: i64) -> Rational {
        Rational::from(n)
    }

    fn has(report: &CollisionReport, a: (i64, i64), b: (i64, i64)) -> bool {
        let c = Collision::new((r(a.0), r(a.1)), (r(b.0), r(b.1)), Rational::zero());
        report
            .collisions
            .iter()
            .any(|x| x.first == c.first && x.second == c.second)
    }

    #[test]
    fn enumerate_examples() {
        assert_eq!(enumerate_inputs(1), vec![r(-1), r(0), r(1)]);
        let two: Vec<String> = enumerate_inputs(2).iter().map(|x| x.to_string()).collect();
        assert_eq!(two, ["-1/1", "0/1", "1/1", "-2/1", "-1/2", "1/2", "2/1"]);
        assert_eq!(enumerate_inputs(3).len(), 15);
    }

    #[test]
    fn find_examples() {
        let rep = find_collisions(&parse_poly("x + y").unwrap(), SearchSpace::integers(1)).unwrap();
        assert!(has(&rep, (0, 1), (1, 0)));
        let rep = find_collisions(&parse_poly("x^2 + y^2").unwrap(), SearchSpace::integers(1)).unwrap();
        assert!(has(&rep, (1, 0), (-1, 0)));
        let rep = find_collisions(&parse_poly("x^7 + 3*y^7").unwrap(), SearchSpace::integers(8)).unwrap();
        assert!(rep.collisions.is_empty());
        assert_eq!(rep.disclaimer, DISCLAIMER);
    }

    #[test]
    fn naive_examples() {
        let f = parse_poly("x + y").unwrap();
        let a = naive_collisions(&f, SearchSpace::integers(1)).unwrap();
        let b = find_collisions(&f, SearchSpace::integers(1)).unwrap();
        assert_eq!(a.collisions, b.collisions);
        let rep = naive_collisions(&parse_poly("x*y").unwrap(), SearchSpace::integers(2)).unwrap();
        assert!(has(&rep, (1, 2), (2, 1)));
        assert!(has(&rep, (-1, -2), (2, 1)));
        let rep = naive_collisions(&parse_poly("x").unwrap(), SearchSpace::integers(1)).unwrap();
        assert!(has(&rep, (0, -1), (0, 0)));
    }

    #[test]
    fn rejects_bad_inputs() {
        let f = parse_poly("x*z").unwrap();
        assert!(matches!(find_collisions(&f, SearchSpace::integers(1)), Err(CollideError::Variables(_))));
        let g = parse_poly("x").unwrap();
        assert!(matches!(find_collisions(&g, SearchSpace::integers(0)), Err(CollideError::ZeroHeight)));
        let cfg = SearchConfig { shards: 0, ..Default::default() };
        assert!(matches!(find_collisions_with(&g, SearchSpace::integers(1), &cfg), Err(CollideError::ZeroShards)));
    }

    #[test]
    fn shard_count_does_not_change_result() {
        let f = parse_poly("x^2 - y^2 + x*y").unwrap();
        let base = find_collisions(&f, SearchSpace::rationals(4)).unwrap().normalized();
        for shards in [1, 3, 7, 64] {
            let cfg = SearchConfig { shards, ..Default::default() };
            let rep = find_collisions_with(&f, SearchSpace::rationals(4), &cfg).unwrap().normalized();
            assert_eq!(rep, base);
        }
    }

    #[test]
    fn collisions_verify_and_group() {
        let f = parse_poly("x^2 + y^2").unwrap();
        let rep = find_collisions(&f, SearchSpace::integers(5)).unwrap();
        assert!(rep.collisions.iter().all(|c| c.verify(&f) && c.first < c.second));
        let by = collisions_by_value(&rep);
        // 25 = (±5)^2 + 0 = (±3)^2 + (±4)^2 = ...: 12 representations, 66 pairs
        assert_eq!(by[&r(25)], 66);
    }
}
