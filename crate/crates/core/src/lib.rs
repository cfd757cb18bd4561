//! Exact-arithmetic laboratory for polynomial injections `Q x Q -> Q`.
//!
//! The construction starts from a binary form `F(x, y)` whose surface
//! `F(x, y) = F(z, w)` in `P^3` has few rational points off the trivial
//! lines, twists it by `F(a x^p + b y^p, c x^p + d y^p)` until bounded-height
//! scans find no exceptional points, then forms
//! `G(x, y) = F(x^p + 1, y^p + 1)` and `f(x, y) = G(a x^p + b, a y^p + b)`.
//!
//! Modules:
//! - [`arith`]: exact rationals and modular fingerprints
//! - [`poly`]: sparse polynomials and binary forms
//! - [`parse`]: the expression language (`x^7 + 3*y^7`)
//! - [`surface`]: bounded-height rational points on `F(x, y) = F(z, w)`
//! - [`collide`]: exhaustive collision search for `f(x, y) = f(z, w)`
//! - [`pipeline`]: the randomized construction with a replayable trace
//! - [`local`]: real and p-adic collisions near a smooth point
//! - [`ffield`]: the injection `x^p + t y^p` over `F_p(t)`
//! - [`cli`]: the `polyinj` command line

pub mod arith;
pub mod cli;
pub mod collide;
pub mod ffield;
mod join;
pub mod local;
pub mod parse;
pub mod pipeline;
pub mod poly;
pub mod surface;

pub use arith::Rational;
pub use parse::parse_poly;
pub use poly::{BinaryForm, MultiPoly, Var};
