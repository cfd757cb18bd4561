use serde::{Deserialize, Serialize};

use super::upoly::UPoly;
use super::{MultiPoly, PolyError, Var};
use crate::arith::Rational;

/// A nonzero homogeneous polynomial `F(x, y)` of degree `d`, stored as the
/// coefficients of `x^(d-i) y^i` for `i = 0..=d`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "FormRepr", into = "FormRepr")]
pub struct BinaryForm {
    coeffs: Vec<Rational>,
}

#[derive(Serialize, Deserialize)]
struct FormRepr {
    degree: usize,
    coeffs: Vec<Rational>,
}

impl TryFrom<FormRepr> for BinaryForm {
    type Error = PolyError;

    fn try_from(r: FormRepr) -> Result<Self, PolyError> {
        if r.coeffs.len() != r.degree + 1 {
            return Err(PolyError::NotBinaryForm(format!(
                "degree {} needs {} coefficients, got {}",
                r.degree,
                r.degree + 1,
                r.coeffs.len()
            )));
        }
        BinaryForm::new(r.coeffs)
    }
}

impl From<BinaryForm> for FormRepr {
    fn from(f: BinaryForm) -> Self {
        FormRepr {
            degree: f.degree() as usize,
            coeffs: f.coeffs,
        }
    }
}

impl BinaryForm {
    pub fn new(coeffs: Vec<Rational>) -> Result<Self, PolyError> {
        if coeffs.iter().all(|c| c.is_zero()) {
            return Err(PolyError::NotBinaryForm("zero form".into()));
        }
        if coeffs.len() - 1 > super::MAX_DEGREE as usize {
            return Err(PolyError::ExponentOverflow);
        }
        Ok(BinaryForm { coeffs })
    }

    /// Accepts a nonzero homogeneous polynomial in (at most) `x` and `y`.
    pub fn from_poly(p: &MultiPoly) -> Result<Self, PolyError> {
        if p.is_zero() {
            return Err(PolyError::NotBinaryForm("zero form".into()));
        }
        for v in p.used_vars() {
            if !matches!(v, Var::X | Var::Y) {
                return Err(PolyError::NotBinaryForm(format!("uses variable {v}")));
            }
        }
        let d = p
            .homogeneity()?
            .ok_or_else(|| PolyError::NotBinaryForm(format!("{p} is not homogeneous")))?;
        let p = p.with_vars(&[Var::X, Var::Y])?;
        let coeffs = (0..=d)
            .map(|i| p.coeff(&[d - i, i]).cloned().unwrap_or_else(Rational::zero))
            .collect();
        BinaryForm::new(coeffs)
    }

    pub fn degree(&self) -> u32 {
        (self.coeffs.len() - 1) as u32
    }

    /// Coefficient of `x^(d-i) y^i`.
    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn to_poly(&self) -> MultiPoly {
        let d = self.degree();
        MultiPoly::from_terms(
            &[Var::X, Var::Y],
            self.coeffs
                .iter()
                .enumerate()
                .map(|(i, c)| (vec![d - i as u32, i as u32], c.clone())),
        )
        .expect("valid form")
    }

    pub fn eval(&self, x: &Rational, y: &Rational) -> Rational {
        let d = self.degree() as usize;
        let mut xp = vec![Rational::one(); d + 1];
        let mut yp = vec![Rational::one(); d + 1];
        for k in 1..=d {
            xp[k] = &xp[k - 1] * x;
            yp[k] = &yp[k - 1] * y;
        }
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| c * &xp[d - i] * &yp[i])
            .sum()
    }

    /// `F(x, 1)` as a univariate polynomial in `x`.
    pub fn dehomogenize(&self) -> UPoly {
        UPoly::new(self.coeffs.iter().rev().cloned().collect())
    }

    /// Largest `m` with `y^m | F`, i.e. the multiplicity of the root at infinity
    /// of `F(x, 1)`.
    pub fn y_multiplicity(&self) -> u32 {
        self.coeffs.iter().take_while(|c| c.is_zero()).count() as u32
    }

    /// Squarefree test: `gcd(g, g') = 1` for `g(x) = F(x, 1)`, and `y^2` does
    /// not divide `F`.
    pub fn is_separable(&self) -> bool {
        if self.y_multiplicity() >= 2 {
            return false;
        }
        let g = self.dehomogenize();
        g.gcd(&g.derivative()).degree() == Some(0)
    }
}

impl std::fmt::Display for BinaryForm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.to_poly().render())
    }
}
