//! Fingerprint hash-join shared by the surface scan and the collision search.
//!
//! Items are bucketed by a two-prime fingerprint, buckets are sharded by the
//! top bits of the first residue, and every bucket with two or more members is
//! confirmed by exact evaluation. Buckets larger than [`ESCALATE_AT`] are
//! first split by two further primes.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::arith::{Rational, UNDEFINED};
use crate::poly::{MultiPoly, PolyModQ};

/// Bucket size above which the extra fingerprint primes are consulted.
pub const ESCALATE_AT: usize = 1000;

pub(crate) type Key = [u64; 2];

#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub(crate) struct JoinStats {
    /// Unordered pairs sharing a fingerprint bucket.
    pub candidates: u64,
    /// Exact evaluations performed during confirmation.
    pub exact_confirms: u64,
    pub escalated_buckets: u64,
}

/// Groups of item indices (each sorted, size >= 2) whose exact values agree,
/// ordered by their smallest index.
pub(crate) fn equal_value_groups<E, X>(
    keys: &[Key],
    shard_bits: u32,
    extra_key: E,
    exact: X,
) -> (Vec<Vec<usize>>, JoinStats)
where
    E: Fn(usize) -> Key + Sync,
    X: Fn(usize) -> Rational + Sync,
{
    let shard_bits = shard_bits.min(16);
    let nshards = 1usize << shard_bits;
    let mut shards: Vec<Vec<usize>> = vec![Vec::new(); nshards];
    for (i, k) in keys.iter().enumerate() {
        let s = if shard_bits == 0 { 0 } else { (k[0] >> (64 - shard_bits)) as usize };
        shards[s].push(i);
    }

    let per_shard: Vec<(Vec<Vec<usize>>, JoinStats)> = shards
        .into_par_iter()
        .map(|members| {
            let mut buckets: HashMap<Key, Vec<usize>> = HashMap::new();
            for i in members {
                buckets.entry(keys[i]).or_default().push(i);
            }
            let mut stats = JoinStats::default();
            let mut groups = Vec::new();
            for (_, bucket) in buckets {
                if bucket.len() < 2 {
                    continue;
                }
                let n = bucket.len() as u64;
                stats.candidates += n * (n - 1) / 2;
                if bucket.len() > ESCALATE_AT {
                    stats.escalated_buckets += 1;
                    let mut sub: HashMap<Key, Vec<usize>> = HashMap::new();
                    for i in bucket {
                        sub.entry(extra_key(i)).or_default().push(i);
                    }
                    for (_, b) in sub {
                        confirm(b, &exact, &mut groups, &mut stats);
                    }
                } else {
                    confirm(bucket, &exact, &mut groups, &mut stats);
                }
            }
            (groups, stats)
        })
        .collect();

    let mut stats = JoinStats::default();
    let mut groups = Vec::new();
    for (g, s) in per_shard {
        groups.extend(g);
        stats.candidates += s.candidates;
        stats.exact_confirms += s.exact_confirms;
        stats.escalated_buckets += s.escalated_buckets;
    }
    groups.sort_unstable_by_key(|g| g[0]);
    (groups, stats)
}

fn confirm<X>(bucket: Vec<usize>, exact: &X, groups: &mut Vec<Vec<usize>>, stats: &mut JoinStats)
where
    X: Fn(usize) -> Rational,
{
    if bucket.len() < 2 {
        return;
    }
    stats.exact_confirms += bucket.len() as u64;
    let mut vals: Vec<(Rational, usize)> = bucket.into_iter().map(|i| (exact(i), i)).collect();
    vals.sort();
    let mut start = 0;
    while start < vals.len() {
        let mut end = start + 1;
        while end < vals.len() && vals[end].0 == vals[start].0 {
            end += 1;
        }
        if end - start >= 2 {
            let mut g: Vec<usize> = vals[start..end].iter().map(|(_, i)| *i).collect();
            g.sort_unstable();
            groups.push(g);
        }
        start = end;
    }
}

/// Evaluates a polynomial modulo each fingerprint prime, falling back to exact
/// evaluation when a denominator is not invertible.
pub(crate) struct Fingerprinter {
    poly: MultiPoly,
    primes: Vec<u64>,
    modq: Vec<Option<PolyModQ>>,
}

impl Fingerprinter {
    pub fn new(poly: &MultiPoly, primes: &[u64]) -> Self {
        Fingerprinter {
            poly: poly.clone(),
            primes: primes.to_vec(),
            modq: primes.iter().map(|&q| PolyModQ::new(poly, q)).collect(),
        }
    }

    /// Residue of the value at `point` modulo `primes[slot]`; `coords` holds
    /// the residues of the point's coordinates modulo that prime.
    pub fn residue(&self, slot: usize, coords: &[Option<u64>], point: impl FnOnce() -> Vec<Rational>) -> u64 {
        if let Some(m) = &self.modq[slot] {
            let defined: Option<Vec<u64>> = coords.iter().copied().collect();
            if let Some(c) = defined {
                return m.eval(&c);
            }
        }
        self.poly
            .eval(&point())
            .expect("arity checked by caller")
            .residue(self.primes[slot])
            .unwrap_or(UNDEFINED)
    }
}

/// `residue` of each input value modulo each prime: `table[slot][i]`.
pub(crate) fn residue_table(inputs: &[Rational], primes: &[u64]) -> Vec<Vec<Option<u64>>> {
    primes
        .iter()
        .map(|&q| inputs.iter().map(|r| r.residue(q)).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::DEFAULT_PRIMES;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn keys_for(vals: &[Rational], primes: &[u64]) -> Vec<Key> {
        vals.iter()
            .map(|v| {
                let fp = v.fingerprint(primes);
                [fp.residues[0].unwrap_or(UNDEFINED), fp.residues[1].unwrap_or(UNDEFINED)]
            })
            .collect()
    }

    #[test]
    fn distinct_values_never_grouped() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut vals: Vec<Rational> = (0..10_000)
            .map(|_| Rational::new(rng.gen_range(-1_000_000i64..=1_000_000), rng.gen_range(1i64..=1_000_000)).unwrap())
            .collect();
        vals.sort();
        vals.dedup();
        let keys = keys_for(&vals, &DEFAULT_PRIMES[..2]);
        let (groups, _) = equal_value_groups(&keys, 4, |_| [0, 0], |i| vals[i].clone());
        assert!(groups.is_empty());
    }

    #[test]
    fn tiny_primes_force_candidates_but_confirmation_splits() {
        let vals: Vec<Rational> = (0..200).map(|i| Rational::from(i % 50)).collect();
        let keys = keys_for(&vals, &[3, 5]);
        let (groups, stats) = equal_value_groups(&keys, 2, |_| [0, 0], |i| vals[i].clone());
        assert_eq!(groups.len(), 50);
        for g in &groups {
            assert_eq!(g.len(), 4);
            assert!(g.iter().all(|&i| vals[i] == vals[g[0]]));
        }
        assert!(stats.candidates > 50 * 6);
    }

    #[test]
    fn escalation_splits_large_buckets() {
        // all keys equal: one bucket of 3000, escalated by the extra key
        let vals: Vec<Rational> = (0..3000).map(|i| Rational::from(i % 1500)).collect();
        let keys = vec![[1, 1]; vals.len()];
        let (groups, stats) = equal_value_groups(&keys, 3, |i| [(i % 1500) as u64, 0], |i| vals[i].clone());
        assert_eq!(stats.escalated_buckets, 1);
        assert_eq!(groups.len(), 1500);
        assert_eq!(stats.exact_confirms, 3000);
    }

    #[test]
    fn undefined_residues_only_match_undefined() {
        let vals = vec![
            Rational::new(1, 3).unwrap(),
            Rational::new(2, 3).unwrap(),
            Rational::from(0),
        ];
        let keys = keys_for(&vals, &[3, 7]);
        assert_eq!(keys[0][0], UNDEFINED);
        assert_eq!(keys[1][0], UNDEFINED);
        assert_ne!(keys[2][0], UNDEFINED);
        let (groups, stats) = equal_value_groups(&keys, 0, |_| [0, 0], |i| vals[i].clone());
        assert!(groups.is_empty());
        assert_eq!(stats.candidates, 0);
    }
}
