//! The expression language: parse, inspect, render, serialize.
//!
//! cargo run --example parse_render -- "(x + 1/2*y)^3 - 2*z"

use polyinj::parse::{parse, ExprError};
use polyinj::parse_poly;

fn main() {
    let src = std::env::args().nth(1).unwrap_or_else(|| "(x + 1/2*y)^3 - 2*z".into());
    match parse_poly(&src) {
        Ok(p) => {
            println!("expanded: {}", p.render());
            println!("total degree: {:?}", p.total_degree());
            println!("homogeneous of degree: {:?}", p.homogeneity().unwrap());
            println!("json: {}", serde_json::to_string(&p).unwrap());
            println!("tree: {:?}", parse(&src).unwrap());
        }
        Err(ExprError::Parse(e)) => println!("parse error: {e}"),
        Err(e) => println!("error: {e}"),
    }
    for bad in ["3y", "x^-1", "x + (y", "x/0", "q^2"] {
        println!("{bad:>8} -> {}", parse_poly(bad).unwrap_err());
    }
}
