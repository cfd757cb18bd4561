//! Sparse exact polynomials in up to four variables `x, y, z, w`, and
//! homogeneous binary forms.

mod form;
mod modq;
pub mod upoly;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::arith::Rational;

pub use form::BinaryForm;
pub use modq::PolyModQ;

/// Upper bound on total degree accepted by any constructor or operation.
pub const MAX_DEGREE: u32 = 100_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("expected {expected} coordinates, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("variable {0} is not mapped by the substitution")]
    UnmappedVariable(Var),
    #[error("variable {0} is not in the target variable list")]
    MissingVariable(Var),
    #[error("duplicate variable {0}")]
    DuplicateVariable(Var),
    #[error("exponent overflow (degree limit {MAX_DEGREE})")]
    ExponentOverflow,
    #[error("the zero polynomial has no degree")]
    ZeroPolynomial,
    #[error("not a binary form: {0}")]
    NotBinaryForm(String),
    #[error("exponent vector of length {got}, expected {expected}")]
    BadExponent { expected: usize, got: usize },
    #[error("stored zero coefficient")]
    ZeroCoefficient,
}

/// One of the four coordinate variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Var {
    X,
    Y,
    Z,
    W,
}

impl Var {
    pub const ALL: [Var; 4] = [Var::X, Var::Y, Var::Z, Var::W];

    pub fn name(self) -> char {
        match self {
            Var::X => 'x',
            Var::Y => 'y',
            Var::Z => 'z',
            Var::W => 'w',
        }
    }

    pub fn from_name(c: char) -> Option<Var> {
        match c {
            'x' => Some(Var::X),
            'y' => Some(Var::Y),
            'z' => Some(Var::Z),
            'w' => Some(Var::W),
            _ => None,
        }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())
    }
}

pub type Exponents = Vec<u32>;

/// Sparse polynomial: exponent vectors (indexed like `vars`) to nonzero
/// rational coefficients.
///
/// Equality is semantic: two polynomials over different variable lists are
/// equal when they agree after embedding both into the union of variables.
#[derive(Clone)]
pub struct MultiPoly {
    vars: Vec<Var>,
    terms: BTreeMap<Exponents, Rational>,
}

/// Graded-lex comparison: total degree first, then lexicographic.
fn grlex(a: &[u32], b: &[u32]) -> std::cmp::Ordering {
    let da: u64 = a.iter().map(|&e| e as u64).sum();
    let db: u64 = b.iter().map(|&e| e as u64).sum();
    da.cmp(&db).then_with(|| a.cmp(b))
}

impl MultiPoly {
    pub fn zero(vars: &[Var]) -> Result<Self, PolyError> {
        check_vars(vars)?;
        Ok(MultiPoly {
            vars: vars.to_vec(),
            terms: BTreeMap::new(),
        })
    }

    pub fn constant(vars: &[Var], c: Rational) -> Result<Self, PolyError> {
        let mut p = Self::zero(vars)?;
        if !c.is_zero() {
            p.terms.insert(vec![0; vars.len()], c);
        }
        Ok(p)
    }

    /// The polynomial consisting of the single variable `v`.
    pub fn var(vars: &[Var], v: Var) -> Result<Self, PolyError> {
        let mut p = Self::zero(vars)?;
        let i = p.index_of(v).ok_or(PolyError::MissingVariable(v))?;
        let mut e = vec![0; vars.len()];
        e[i] = 1;
        p.terms.insert(e, Rational::one());
        Ok(p)
    }

    /// Builds a polynomial from `(exponents, coefficient)` pairs, summing
    /// repeated monomials and dropping zeros.
    pub fn from_terms<I>(vars: &[Var], terms: I) -> Result<Self, PolyError>
    where
        I: IntoIterator<Item = (Exponents, Rational)>,
    {
        let mut p = Self::zero(vars)?;
        for (e, c) in terms {
            if e.len() != vars.len() {
                return Err(PolyError::BadExponent {
                    expected: vars.len(),
                    got: e.len(),
                });
            }
            check_degree(&e)?;
            p.add_term(e, c);
        }
        Ok(p)
    }

    fn add_term(&mut self, e: Exponents, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(e) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = o.get() + &c;
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn vars(&self) -> &[Var] {
        &self.vars
    }

    pub fn index_of(&self, v: Var) -> Option<usize> {
        self.vars.iter().position(|&u| u == v)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, e: &[u32]) -> Option<&Rational> {
        self.terms.get(e)
    }

    /// Terms in descending graded-lex order (leading term first).
    pub fn terms(&self) -> Vec<(&Exponents, &Rational)> {
        let mut ts: Vec<_> = self.terms.iter().collect();
        ts.sort_by(|a, b| grlex(b.0, a.0));
        ts
    }

    /// Variables that occur with a positive exponent, in canonical order.
    pub fn used_vars(&self) -> Vec<Var> {
        let mut used = BTreeSet::new();
        for e in self.terms.keys() {
            for (i, &k) in e.iter().enumerate() {
                if k > 0 {
                    used.insert(self.vars[i]);
                }
            }
        }
        used.into_iter().collect()
    }

    /// Total degree, `None` for the zero polynomial.
    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    /// Degree in a single variable (0 if it does not occur).
    pub fn degree_in(&self, v: Var) -> u32 {
        match self.index_of(v) {
            Some(i) => self.terms.keys().map(|e| e[i]).max().unwrap_or(0),
            None => 0,
        }
    }

    /// `Some(d)` when every term has total degree `d`.
    pub fn homogeneity(&self) -> Result<Option<u32>, PolyError> {
        let mut degs = self.terms.keys().map(|e| e.iter().sum::<u32>());
        let d = degs.next().ok_or(PolyError::ZeroPolynomial)?;
        Ok(degs.all(|k| k == d).then_some(d))
    }

    /// Re-expresses this polynomial over `vars`, which must contain every
    /// variable that occurs.
    pub fn with_vars(&self, vars: &[Var]) -> Result<Self, PolyError> {
        check_vars(vars)?;
        let map: Vec<Option<usize>> = self
            .vars
            .iter()
            .map(|v| vars.iter().position(|u| u == v))
            .collect();
        let mut out = BTreeMap::new();
        for (e, c) in &self.terms {
            let mut ne = vec![0; vars.len()];
            for (i, &k) in e.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                let j = map[i].ok_or(PolyError::MissingVariable(self.vars[i]))?;
                ne[j] = k;
            }
            out.insert(ne, c.clone());
        }
        Ok(MultiPoly {
            vars: vars.to_vec(),
            terms: out,
        })
    }

    /// Embeds two polynomials into the canonical union of their variables.
    fn unify(&self, other: &Self) -> (Self, Self) {
        if self.vars == other.vars {
            return (self.clone(), other.clone());
        }
        let vars = union_vars(&self.vars, &other.vars);
        (
            self.with_vars(&vars).expect("superset"),
            other.with_vars(&vars).expect("superset"),
        )
    }

    pub fn add(&self, other: &Self) -> Self {
        let (mut a, b) = self.unify(other);
        for (e, c) in b.terms {
            a.add_term(e, c);
        }
        a
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        self.scale(&-Rational::one())
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return MultiPoly {
                vars: self.vars.clone(),
                terms: BTreeMap::new(),
            };
        }
        MultiPoly {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(e, k)| (e.clone(), k * c)).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Result<Self, PolyError> {
        let (a, b) = self.unify(other);
        let mut acc: HashMap<Exponents, Rational> = HashMap::new();
        for (ea, ca) in &a.terms {
            for (eb, cb) in &b.terms {
                let mut e = Vec::with_capacity(ea.len());
                for (x, y) in ea.iter().zip(eb) {
                    e.push(x.checked_add(*y).ok_or(PolyError::ExponentOverflow)?);
                }
                check_degree(&e)?;
                let c = ca * cb;
                match acc.get_mut(&e) {
                    Some(s) => *s = &*s + &c,
                    None => {
                        acc.insert(e, c);
                    }
                }
            }
        }
        Ok(MultiPoly {
            vars: a.vars,
            terms: acc.into_iter().filter(|(_, c)| !c.is_zero()).collect(),
        })
    }

    pub fn pow(&self, e: u32) -> Result<Self, PolyError> {
        if let Some(d) = self.total_degree() {
            if (d as u64) * (e as u64) > MAX_DEGREE as u64 {
                return Err(PolyError::ExponentOverflow);
            }
        }
        let mut result = MultiPoly::constant(&self.vars, Rational::one())?;
        let mut base = self.clone();
        let mut k = e;
        while k > 0 {
            if k & 1 == 1 {
                result = result.mul(&base)?;
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base)?;
            }
        }
        Ok(result)
    }

    /// Exact value at `point`, whose coordinates follow `vars()`.
    pub fn eval(&self, point: &[Rational]) -> Result<Rational, PolyError> {
        if point.len() != self.vars.len() {
            return Err(PolyError::Arity {
                expected: self.vars.len(),
                got: point.len(),
            });
        }
        let mut powers: Vec<Vec<Rational>> = Vec::with_capacity(point.len());
        for (i, v) in point.iter().enumerate() {
            let maxe = self.terms.keys().map(|e| e[i]).max().unwrap_or(0) as usize;
            let mut pw = Vec::with_capacity(maxe + 1);
            pw.push(Rational::one());
            for k in 1..=maxe {
                let next = &pw[k - 1] * v;
                pw.push(next);
            }
            powers.push(pw);
        }
        let mut acc = Rational::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (i, &k) in e.iter().enumerate() {
                if k > 0 {
                    t = t * &powers[i][k as usize];
                }
            }
            acc = acc + t;
        }
        Ok(acc)
    }

    /// Evaluates by variable name; every occurring variable must be assigned.
    pub fn eval_named(&self, assign: &[(Var, Rational)]) -> Result<Rational, PolyError> {
        let point = self
            .vars
            .iter()
            .map(|v| {
                assign
                    .iter()
                    .find(|(u, _)| u == v)
                    .map(|(_, r)| r.clone())
                    .or_else(|| (self.degree_in(*v) == 0).then(Rational::zero))
                    .ok_or(PolyError::UnmappedVariable(*v))
            })
            .collect::<Result<Vec<_>, _>>()?;
        self.eval(&point)
    }

    /// Composes with `map`: every occurring variable `v` is replaced by
    /// `map[v]`, and the result is expanded exactly.
    pub fn substitute(&self, map: &BTreeMap<Var, MultiPoly>) -> Result<Self, PolyError> {
        for v in self.used_vars() {
            if !map.contains_key(&v) {
                return Err(PolyError::UnmappedVariable(v));
            }
        }
        let target = map
            .values()
            .fold(Vec::new(), |acc, p| union_vars(&acc, &p.vars));
        let images: BTreeMap<Var, MultiPoly> = map
            .iter()
            .map(|(v, p)| Ok((*v, p.with_vars(&target)?)))
            .collect::<Result<_, PolyError>>()?;

        // powers[i][k] = image(vars[i])^k, built incrementally up to the max exponent used
        let mut powers: Vec<Vec<MultiPoly>> = Vec::with_capacity(self.vars.len());
        for (i, v) in self.vars.iter().enumerate() {
            let maxe = self.terms.keys().map(|e| e[i]).max().unwrap_or(0) as usize;
            let mut pw = vec![MultiPoly::constant(&target, Rational::one())?];
            if maxe > 0 {
                let img = &images[v];
                for k in 1..=maxe {
                    let next = pw[k - 1].mul(img)?;
                    pw.push(next);
                }
            }
            powers.push(pw);
        }

        let mut acc = MultiPoly::zero(&target)?;
        for (e, c) in &self.terms {
            let mut t = MultiPoly::constant(&target, c.clone())?;
            for (i, &k) in e.iter().enumerate() {
                if k > 0 {
                    t = t.mul(&powers[i][k as usize])?;
                }
            }
            for (te, tc) in t.terms {
                acc.add_term(te, tc);
            }
        }
        Ok(acc)
    }

    /// Formal partial derivative.
    pub fn derivative(&self, v: Var) -> Self {
        let Some(i) = self.index_of(v) else {
            return MultiPoly {
                vars: self.vars.clone(),
                terms: BTreeMap::new(),
            };
        };
        let mut out = MultiPoly {
            vars: self.vars.clone(),
            terms: BTreeMap::new(),
        };
        for (e, c) in &self.terms {
            if e[i] == 0 {
                continue;
            }
            let mut ne = e.clone();
            ne[i] -= 1;
            out.add_term(ne, c * &Rational::from(e[i] as i64));
        }
        out
    }

    /// Deterministic infix rendering in descending graded-lex order, e.g.
    /// `x^7 + 3*y^7` or `-1/2*x*y^2 - 3`. Parsing the output reproduces the
    /// polynomial.
    pub fn render(&self) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (k, (e, c)) in self.terms().into_iter().enumerate() {
            let neg = c.is_negative();
            let mag = c.abs();
            if k == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let mut factors: Vec<String> = Vec::new();
            let is_const = e.iter().all(|&x| x == 0);
            if !mag.is_one() || is_const {
                if mag.is_integer() {
                    factors.push(mag.numer().to_string());
                } else {
                    factors.push(mag.to_string());
                }
            }
            for (i, &x) in e.iter().enumerate() {
                match x {
                    0 => {}
                    1 => factors.push(self.vars[i].to_string()),
                    _ => factors.push(format!("{}^{}", self.vars[i], x)),
                }
            }
            out.push_str(&factors.join("*"));
        }
        out
    }
}

fn check_vars(vars: &[Var]) -> Result<(), PolyError> {
    for (i, v) in vars.iter().enumerate() {
        if vars[..i].contains(v) {
            return Err(PolyError::DuplicateVariable(*v));
        }
    }
    Ok(())
}

fn check_degree(e: &[u32]) -> Result<(), PolyError> {
    let d: u64 = e.iter().map(|&k| k as u64).sum();
    if d > MAX_DEGREE as u64 {
        Err(PolyError::ExponentOverflow)
    } else {
        Ok(())
    }
}

/// Union of two variable lists in canonical `x, y, z, w` order.
pub fn union_vars(a: &[Var], b: &[Var]) -> Vec<Var> {
    Var::ALL
        .into_iter()
        .filter(|v| a.contains(v) || b.contains(v))
        .collect()
}

impl PartialEq for MultiPoly {
    fn eq(&self, other: &Self) -> bool {
        let (a, b) = self.unify(other);
        a.terms == b.terms
    }
}

impl Eq for MultiPoly {}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl fmt::Debug for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MultiPoly[{}]({})", self.vars.iter().map(|v| v.name()).collect::<String>(), self.render())
    }
}

#[derive(Serialize, Deserialize)]
struct TermRepr {
    exp: Exponents,
    coef: Rational,
}

#[derive(Serialize, Deserialize)]
struct PolyRepr {
    vars: Vec<Var>,
    terms: Vec<TermRepr>,
}

impl Serialize for MultiPoly {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        PolyRepr {
            vars: self.vars.clone(),
            terms: self
                .terms()
                .into_iter()
                .map(|(e, c)| TermRepr {
                    exp: e.clone(),
                    coef: c.clone(),
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for MultiPoly {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let repr = PolyRepr::deserialize(d)?;
        let mut p = MultiPoly::zero(&repr.vars).map_err(D::Error::custom)?;
        for t in repr.terms {
            if t.coef.is_zero() {
                return Err(D::Error::custom(PolyError::ZeroCoefficient));
            }
            if t.exp.len() != repr.vars.len() {
                return Err(D::Error::custom(PolyError::BadExponent {
                    expected: repr.vars.len(),
                    got: t.exp.len(),
                }));
            }
            check_degree(&t.exp).map_err(D::Error::custom)?;
            p.add_term(t.exp, t.coef);
        }
        Ok(p)
    }
}
