//! Rational points of height <= 12 on x^3 + y^3 = z^3 + w^3.
//!
//! cargo run --example taxicab_surface

use polyinj::surface::{scan_surface_with, ScanConfig};
use polyinj::{parse_poly, BinaryForm};

fn main() {
    let form = BinaryForm::from_poly(&parse_poly("x^3 + y^3").unwrap()).unwrap();
    let (points, stats) = scan_surface_with(&form, 12, &ScanConfig::default()).unwrap();
    println!("F = {form}, height <= 12");
    println!("{} pairs, {} fingerprint candidates", stats.pairs, stats.fingerprint_candidates);
    println!("{} points on trivial lines", points.trivial.len());
    println!("{} exceptional points, with all coordinates positive:", points.exceptional.len());
    for p in &points.exceptional {
        if p.coords().iter().all(|c| c.sign() == num_bigint::Sign::Plus) {
            println!("  {p}");
        }
    }
}
