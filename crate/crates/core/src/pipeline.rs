//! The reduction from a binary form to a candidate injection `f`.
//!
//! 1. Pick a prime `p > 3` not dividing the number of roots of unity.
//! 2. While the bounded-height scan of `F(x, y) = F(z, w)` finds exceptional
//!    points, replace `F` by `F(a x^p + b y^p, c x^p + d y^p)` for a random
//!    integer matrix.
//! 3. `G(x, y) = F(x^p + 1, y^p + 1)`.
//! 4. `f(x, y) = G(a x^p + b, a y^p + b)` for random rationals `a != 0, b`,
//!    redrawn while a known collision of `G` would survive.
//!
//! Every random draw is logged in the [`ConstructionTrace`], and
//! [`replay`] rebuilds the trace from its own seed.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{is_prime_u64, Rational};
use crate::collide::{find_collisions, Collision, CollideError, SearchSpace};
use crate::poly::{BinaryForm, MultiPoly, PolyError, Var};
use crate::surface::{scan_surface, PointSet, ProjPoint, SurfaceError};

/// Roots of unity in `Q`.
pub const W_RATIONALS: u64 = 2;

/// Default budget for the total degree of `f`.
pub const DEFAULT_MAX_F_DEGREE: u32 = 625;

/// Draws of `(a, b)` before giving up.
pub const MAX_COEFFICIENT_DRAWS: usize = 10_000;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("singular matrix")]
    SingularMatrix,
    #[error("a must be nonzero")]
    ZeroScale,
    #[error("w must be a positive even integer, got {0}")]
    BadRootCount(u64),
    #[error("height bound must be at least 1")]
    ZeroHeight,
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Surface(#[from] SurfaceError),
    #[error(transparent)]
    Collide(#[from] CollideError),
    #[error("no admissible (a, b) in {0} draws")]
    CoefficientsExhausted(usize),
}

/// Smallest prime `p > 3` with `p` not dividing `w`.
pub fn choose_prime(w: u64) -> Result<u64, PipelineError> {
    if w == 0 || !w.is_multiple_of(2) {
        return Err(PipelineError::BadRootCount(w));
    }
    Ok((5..).find(|&p| is_prime_u64(p) && !w.is_multiple_of(p)).expect("infinitely many primes"))
}

/// `[[a, b], [c, d]]`.
pub type Matrix = [[i64; 2]; 2];

pub fn det(m: &Matrix) -> i128 {
    m[0][0] as i128 * m[1][1] as i128 - m[0][1] as i128 * m[1][0] as i128
}

fn xy_map(px: MultiPoly, py: MultiPoly) -> BTreeMap<Var, MultiPoly> {
    BTreeMap::from([(Var::X, px), (Var::Y, py)])
}

fn xy() -> (MultiPoly, MultiPoly) {
    let vars = [Var::X, Var::Y];
    (
        MultiPoly::var(&vars, Var::X).expect("listed"),
        MultiPoly::var(&vars, Var::Y).expect("listed"),
    )
}

/// `F(a x^p + b y^p, c x^p + d y^p)`.
pub fn twist(form: &BinaryForm, m: &Matrix, p: u32) -> Result<BinaryForm, PipelineError> {
    if det(m) == 0 {
        return Err(PipelineError::SingularMatrix);
    }
    let (x, y) = xy();
    let (xp, yp) = (x.pow(p)?, y.pow(p)?);
    let lin = |r: [i64; 2]| {
        xp.scale(&Rational::from(r[0]))
            .add(&yp.scale(&Rational::from(r[1])))
    };
    let out = form.to_poly().substitute(&xy_map(lin(m[0]), lin(m[1])))?;
    Ok(BinaryForm::from_poly(&out)?)
}

/// `F(x^p + 1, y^p + 1)`.
#[allow(non_snake_case)]
pub fn make_G(form: &BinaryForm, p: u32) -> Result<MultiPoly, PipelineError> {
    let one = Rational::one();
    shift_substitute(&form.to_poly(), &one, &one, p)
}

/// `G(a x^p + b, a y^p + b)`.
pub fn make_f(g: &MultiPoly, a: &Rational, b: &Rational, p: u32) -> Result<MultiPoly, PipelineError> {
    if a.is_zero() {
        return Err(PipelineError::ZeroScale);
    }
    shift_substitute(g, a, b, p)
}

fn shift_substitute(g: &MultiPoly, a: &Rational, b: &Rational, p: u32) -> Result<MultiPoly, PipelineError> {
    let g = g.with_vars(&[Var::X, Var::Y])?;
    let (x, y) = xy();
    let vars = [Var::X, Var::Y];
    let c = MultiPoly::constant(&vars, b.clone())?;
    let img = |v: MultiPoly| -> Result<MultiPoly, PolyError> { Ok(v.pow(p)?.scale(a).add(&c)) };
    Ok(g.substitute(&xy_map(img(x)?, img(y)?))?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuildConfig {
    pub height_bound: u64,
    pub max_twists: usize,
    /// No twist is applied if it would push `deg f` past this.
    pub max_f_degree: u32,
    pub rng_seed: u64,
    /// Number of roots of unity in the base field.
    pub w: u64,
    /// Search space for the residual collisions of `G`.
    pub g_rationals: bool,
}

impl BuildConfig {
    pub fn new(height_bound: u64, rng_seed: u64) -> Self {
        BuildConfig {
            height_bound,
            max_twists: 3,
            max_f_degree: DEFAULT_MAX_F_DEGREE,
            rng_seed,
            w: W_RATIONALS,
            g_rationals: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// The last scan found no exceptional points.
    Reduced,
    MaxTwists,
    DegreeBudget,
}

/// One random draw, in draw order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Draw {
    Matrix { matrix: Matrix, accepted: bool },
    Coefficients { a: Rational, b: Rational, accepted: bool, reason: Option<String> },
}

/// What a twist does to one exceptional point of the surface before it.
///
/// With `M^-1 (x, y) = (u0, u1)` and `M^-1 (z, w) = (u2, u3)`, a rational
/// point of the twisted surface lies over `(x:y:z:w)` iff some common
/// multiple of the `u_i` consists of `p`-th powers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointCheck {
    pub point: ProjPoint,
    /// `u0 / u1`, absent when `u1 = 0`.
    pub ratio: Option<Rational>,
    pub ratio_is_pth_power: bool,
    pub has_rational_preimage: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwistStep {
    pub matrix: Matrix,
    pub checks: Vec<PointCheck>,
    pub form: BinaryForm,
    pub scan: PointSet,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstructionTrace {
    pub base_form: BinaryForm,
    pub w: u64,
    pub p: u64,
    pub rng_seed: u64,
    pub height_bound: u64,
    pub max_twists: usize,
    pub max_f_degree: u32,
    pub base_scan: PointSet,
    pub twists: Vec<TwistStep>,
    /// The last scan still had exceptional points when twisting stopped.
    pub unreduced: bool,
    pub stop: StopReason,
    pub g_poly: MultiPoly,
    pub g_space: SearchSpace,
    pub g_collisions: Vec<Collision>,
    pub a: Rational,
    pub b: Rational,
    pub f_poly: MultiPoly,
    pub draws: Vec<Draw>,
}

impl ConstructionTrace {
    pub fn final_form(&self) -> &BinaryForm {
        self.twists.last().map_or(&self.base_form, |t| &t.form)
    }

    pub fn config(&self) -> BuildConfig {
        BuildConfig {
            height_bound: self.height_bound,
            max_twists: self.max_twists,
            max_f_degree: self.max_f_degree,
            rng_seed: self.rng_seed,
            w: self.w,
            g_rationals: self.g_space.mode == crate::collide::Mode::Rationals,
        }
    }

    /// Recomputes `G` and `f` from the recorded data and checks the matrices.
    pub fn check(&self) -> Result<(), String> {
        let p = self.p as u32;
        if let Some(t) = self.twists.iter().find(|t| det(&t.matrix) == 0) {
            return Err(format!("singular matrix {:?}", t.matrix));
        }
        let mut form = self.base_form.clone();
        for t in &self.twists {
            form = twist(&form, &t.matrix, p).map_err(|e| e.to_string())?;
            if form != t.form {
                return Err(format!("twist by {:?} does not reproduce the recorded form", t.matrix));
            }
        }
        let g = make_G(&form, p).map_err(|e| e.to_string())?;
        if g != self.g_poly {
            return Err("g_poly does not match the final form".into());
        }
        let f = make_f(&g, &self.a, &self.b, p).map_err(|e| e.to_string())?;
        if f != self.f_poly {
            return Err("f_poly does not match g_poly, a, b".into());
        }
        Ok(())
    }
}

fn draw_matrix<R: Rng>(rng: &mut R, h: i64) -> Matrix {
    let mut e = || rng.gen_range(-h..=h);
    [[e(), e()], [e(), e()]]
}

fn draw_rational<R: Rng>(rng: &mut R, h: i64) -> Rational {
    let n = rng.gen_range(-h..=h);
    let d = rng.gen_range(1..=h);
    Rational::new(n, d).expect("positive denominator")
}

fn point_check(pt: &ProjPoint, m: &Matrix, p: u32) -> PointCheck {
    // M^-1 = adj(M) / det; the scalar is common to all coordinates
    let adj = [[m[1][1], -m[0][1]], [-m[1][0], m[0][0]]];
    let c = pt.coords();
    let apply = |s: &BigInt, t: &BigInt| -> [BigInt; 2] {
        [adj[0][0] * s + adj[0][1] * t, adj[1][0] * s + adj[1][1] * t]
    };
    let [u0, u1] = apply(&c[0], &c[1]);
    let [u2, u3] = apply(&c[2], &c[3]);
    let u = [u0, u1, u2, u3];
    let ratio = (!u[1].is_zero()).then(|| {
        Rational::from(u[0].clone())
            .checked_div(&Rational::from(u[1].clone()))
            .expect("nonzero")
    });
    let ratio_is_pth_power = ratio.as_ref().is_some_and(|r| r.exact_root(p).is_some());
    let k = u.iter().position(|v| !v.is_zero()).expect("M is invertible");
    let uk = Rational::from(u[k].clone());
    let has_rational_preimage = u.iter().all(|v| {
        Rational::from(v.clone())
            .checked_div(&uk)
            .expect("nonzero")
            .exact_root(p)
            .is_some()
    });
    PointCheck {
        point: pt.clone(),
        ratio,
        ratio_is_pth_power,
        has_rational_preimage,
    }
}

/// Why `(a, b)` would let a known collision of `G` through, if it would.
fn coefficient_obstruction(g_collisions: &[Collision], a: &Rational, b: &Rational, p: u32) -> Option<String> {
    for c in g_collisions {
        for v in [&c.first.0, &c.first.1, &c.second.0, &c.second.1] {
            let t = (v - b).checked_div(a).expect("a != 0");
            if let Some(s) = t.exact_root(p) {
                return Some(format!("{v} = a*({s})^{p} + b"));
            }
        }
    }
    None
}

pub fn build_injection(base: &BinaryForm, cfg: &BuildConfig) -> Result<ConstructionTrace, PipelineError> {
    if cfg.height_bound == 0 {
        return Err(PipelineError::ZeroHeight);
    }
    let p = choose_prime(cfg.w)?;
    let p32 = p as u32;
    let h = cfg.height_bound.min(i64::MAX as u64) as i64;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let mut draws = Vec::new();

    let base_scan = scan_surface(base, cfg.height_bound)?;
    let mut form = base.clone();
    let mut exceptional = base_scan.exceptional.clone();
    let mut twists = Vec::new();
    let f_degree = |form: &BinaryForm| form.degree() as u64 * p * p;
    let stop = loop {
        if exceptional.is_empty() {
            break StopReason::Reduced;
        }
        if twists.len() >= cfg.max_twists {
            break StopReason::MaxTwists;
        }
        if f_degree(&form) * p > cfg.max_f_degree as u64 {
            break StopReason::DegreeBudget;
        }
        let m = loop {
            let m = draw_matrix(&mut rng, h);
            let ok = det(&m) != 0;
            draws.push(Draw::Matrix { matrix: m, accepted: ok });
            if ok {
                break m;
            }
        };
        let checks = exceptional.iter().map(|pt| point_check(pt, &m, p32)).collect();
        form = twist(&form, &m, p32)?;
        let scan = scan_surface(&form, cfg.height_bound)?;
        exceptional = scan.exceptional.clone();
        twists.push(TwistStep {
            matrix: m,
            checks,
            form: form.clone(),
            scan,
        });
    };
    let unreduced = stop != StopReason::Reduced;

    let g_poly = make_G(&form, p32)?;
    let g_space = if cfg.g_rationals {
        SearchSpace::rationals(cfg.height_bound)
    } else {
        SearchSpace::integers(cfg.height_bound)
    };
    let g_collisions = find_collisions(&g_poly, g_space)?.collisions;

    let mut chosen = None;
    for _ in 0..MAX_COEFFICIENT_DRAWS {
        let a = draw_rational(&mut rng, h);
        let b = draw_rational(&mut rng, h);
        let reason = if a.is_zero() {
            Some("a = 0".to_string())
        } else {
            coefficient_obstruction(&g_collisions, &a, &b, p32)
        };
        let accepted = reason.is_none();
        draws.push(Draw::Coefficients {
            a: a.clone(),
            b: b.clone(),
            accepted,
            reason,
        });
        if accepted {
            chosen = Some((a, b));
            break;
        }
    }
    let (a, b) = chosen.ok_or(PipelineError::CoefficientsExhausted(MAX_COEFFICIENT_DRAWS))?;
    let f_poly = make_f(&g_poly, &a, &b, p32)?;

    Ok(ConstructionTrace {
        base_form: base.clone(),
        w: cfg.w,
        p,
        rng_seed: cfg.rng_seed,
        height_bound: cfg.height_bound,
        max_twists: cfg.max_twists,
        max_f_degree: cfg.max_f_degree,
        base_scan,
        twists,
        unreduced,
        stop,
        g_poly,
        g_space,
        g_collisions,
        a,
        b,
        f_poly,
        draws,
    })
}

/// Reruns the construction recorded in `trace`.
pub fn replay(trace: &ConstructionTrace) -> Result<ConstructionTrace, PipelineError> {
    build_injection(&trace.base_form, &trace.config())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_poly;

    fn form(s: &str) -> BinaryForm {
        BinaryForm::from_poly(&parse_poly(s).unwrap()).unwrap()
    }

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d).unwrap()
    }

    #[test]
    fn prime_choice() {
        assert_eq!(choose_prime(2).unwrap(), 5);
        assert_eq!(choose_prime(6).unwrap(), 5);
        assert_eq!(choose_prime(10).unwrap(), 7);
        assert_eq!(choose_prime(70).unwrap(), 11);
        assert!(choose_prime(3).is_err());
    }

    #[test]
    fn twist_examples() {
        assert_eq!(twist(&form("x*y"), &[[1, 1], [0, 1]], 5).unwrap(), form("x^5*y^5 + y^10"));
        assert_eq!(twist(&form("x^2 + y^2"), &[[1, 0], [0, 1]], 5).unwrap(), form("x^10 + y^10"));
        let t = twist(&form("x^7 - 2*x*y^6 + y^7"), &[[2, -1], [3, 5]], 5).unwrap();
        assert_eq!(t.degree(), 35);
        assert!(matches!(
            twist(&form("x*y"), &[[1, 2], [2, 4]], 5),
            Err(PipelineError::SingularMatrix)
        ));
    }

    #[test]
    fn twist_matches_composite() {
        let f = form("x^3 - 4*x*y^2 + 7*y^3");
        let m = [[3, -2], [1, 4]];
        let t = twist(&f, &m, 5).unwrap();
        for (s, u) in [(r(1, 2), r(-3, 1)), (r(2, 7), r(5, 3)), (r(0, 1), r(-1, 4))] {
            let (s5, u5) = (s.pow(5), u.pow(5));
            let x = &(&s5 * &Rational::from(3)) - &(&u5 * &Rational::from(2));
            let y = &s5 + &(&u5 * &Rational::from(4));
            assert_eq!(t.eval(&s, &u), f.eval(&x, &y));
        }
    }

    #[test]
    fn g_and_f_examples() {
        assert_eq!(make_G(&form("x^2"), 5).unwrap(), parse_poly("x^10 + 2*x^5 + 1").unwrap());
        assert_eq!(make_G(&form("x*y"), 5).unwrap(), parse_poly("x^5*y^5 + x^5 + y^5 + 1").unwrap());
        let g = make_G(&form("x^5 + 3*y^5"), 5).unwrap();
        assert_eq!(g.eval(&[r(1, 1), r(1, 1)]).unwrap(), Rational::from(128));
        assert_eq!(g.total_degree(), Some(25));

        let g = parse_poly("x + y").unwrap();
        let f = make_f(&g, &r(1, 1), &r(1, 1), 5).unwrap();
        assert_eq!(f.eval(&[r(1, 1), r(1, 1)]).unwrap(), Rational::from(4));
        let f0 = make_f(&g, &r(1, 1), &r(0, 1), 5).unwrap();
        assert_eq!(f0, parse_poly("x^5 + y^5").unwrap());
        assert!(matches!(make_f(&g, &r(0, 1), &r(1, 1), 5), Err(PipelineError::ZeroScale)));
    }

    #[test]
    fn point_checks() {
        // identity matrix: (1:12:9:10) has ratios 1/12, not a fifth power
        let c = point_check(&ProjPoint::from_i64([1, 12, 9, 10]).unwrap(), &[[1, 0], [0, 1]], 5);
        assert_eq!(c.ratio, Some(r(1, 12)));
        assert!(!c.ratio_is_pth_power && !c.has_rational_preimage);
        // 1/32 = (1/2)^5 but w/x = 2 is not a fifth power
        let c = point_check(&ProjPoint::from_i64([1, 32, 1, 2]).unwrap(), &[[1, 0], [0, 1]], 5);
        assert!(c.ratio_is_pth_power && !c.has_rational_preimage);
        let c = point_check(&ProjPoint::from_i64([1, 32, -243, 1]).unwrap(), &[[1, 0], [0, 1]], 5);
        assert!(c.has_rational_preimage);
    }

    #[test]
    fn taxicab_needs_a_twist() {
        let t = build_injection(&form("x^3 + y^3"), &BuildConfig::new(12, 7)).unwrap();
        assert!(!t.base_scan.exceptional.is_empty());
        assert!(!t.twists.is_empty());
        assert!(t.twists.iter().all(|s| det(&s.matrix) != 0));
        assert_eq!(t.twists[0].checks.len(), t.base_scan.exceptional.len());
        t.check().unwrap();
    }

    #[test]
    fn zagier_form_trace() {
        let cfg = BuildConfig::new(6, 1);
        let t = build_injection(&form("x^5 + 3*y^5"), &cfg).unwrap();
        assert_eq!(t.p, 5);
        assert!(t.twists.is_empty() && !t.unreduced);
        assert_eq!(t.f_poly.total_degree(), Some(125));
        assert!(!t.a.is_zero());
        t.check().unwrap();
        let again = replay(&t).unwrap();
        assert_eq!(serde_json::to_string(&t).unwrap(), serde_json::to_string(&again).unwrap());
    }

    #[test]
    fn unreduced_is_flagged() {
        let t = build_injection(&form("x^2 + y^2"), &BuildConfig { max_twists: 0, ..BuildConfig::new(3, 0) }).unwrap();
        assert!(t.unreduced);
        assert_eq!(t.stop, StopReason::MaxTwists);
        assert!(t.twists.is_empty());
        t.check().unwrap();
    }

    #[test]
    fn degree_budget_stops_twisting() {
        let cfg = BuildConfig { max_f_degree: 300, ..BuildConfig::new(3, 0) };
        let t = build_injection(&form("x*y"), &cfg).unwrap();
        assert_eq!(t.stop, StopReason::DegreeBudget);
        assert!(t.unreduced);
        assert_eq!(t.twists.len(), 1);
        assert!(t.f_poly.total_degree().unwrap() <= 300);
    }

    #[test]
    fn obstruction_detects_surviving_collision() {
        let c = Collision {
            first: (r(33, 1), r(0, 1)),
            second: (r(0, 1), r(33, 1)),
            value: r(0, 1),
        };
        // 33 = 1 * 2^5 + 1
        assert!(coefficient_obstruction(std::slice::from_ref(&c), &r(1, 1), &r(1, 1), 5).is_some());
        assert!(coefficient_obstruction(&[c], &r(1, 1), &r(2, 1), 5).is_none());
    }
}
