use super::{Exponents, MultiPoly};
use crate::arith::{add_mod, mul_mod};

/// A polynomial with coefficients reduced modulo a word-sized prime, for fast
/// fingerprint evaluation. Only exists when no coefficient denominator is
/// divisible by the prime.
#[derive(Debug, Clone)]
pub struct PolyModQ {
    q: u64,
    terms: Vec<(Exponents, u64)>,
    max_exp: Vec<usize>,
}

impl PolyModQ {
    pub fn new(p: &MultiPoly, q: u64) -> Option<Self> {
        let mut terms = Vec::with_capacity(p.num_terms());
        for (e, c) in &p.terms {
            terms.push((e.clone(), c.residue(q)?));
        }
        let max_exp = (0..p.vars.len())
            .map(|i| terms.iter().map(|(e, _)| e[i] as usize).max().unwrap_or(0))
            .collect();
        Some(PolyModQ { q, terms, max_exp })
    }

    pub fn modulus(&self) -> u64 {
        self.q
    }

    /// Value at a point given by residues (already reduced mod q).
    pub fn eval(&self, point: &[u64]) -> u64 {
        debug_assert_eq!(point.len(), self.max_exp.len());
        let q = self.q;
        let powers: Vec<Vec<u64>> = point
            .iter()
            .zip(&self.max_exp)
            .map(|(&v, &m)| {
                let mut pw = Vec::with_capacity(m + 1);
                pw.push(1 % q);
                for k in 1..=m {
                    pw.push(mul_mod(pw[k - 1], v, q));
                }
                pw
            })
            .collect();
        let mut acc = 0;
        for (e, c) in &self.terms {
            let mut t = *c;
            for (i, &k) in e.iter().enumerate() {
                if k > 0 {
                    t = mul_mod(t, powers[i][k as usize], q);
                }
            }
            acc = add_mod(acc, t, q);
        }
        acc
    }
}
