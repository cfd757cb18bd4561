//! Runs the construction on a binary form and prints a summary of the trace.
//!
//! cargo run --example build_injection -- "x^3 + y^3" 12 7

use polyinj::collide::{find_collisions, SearchSpace};
use polyinj::pipeline::{build_injection, replay, BuildConfig};
use polyinj::{parse_poly, BinaryForm};

fn main() {
    let mut args = std::env::args().skip(1);
    let src = args.next().unwrap_or_else(|| "x^3 + y^3".into());
    let h: u64 = args.next().map_or(12, |s| s.parse().expect("height"));
    let seed: u64 = args.next().map_or(7, |s| s.parse().expect("seed"));

    let form = BinaryForm::from_poly(&parse_poly(&src).unwrap()).unwrap();
    let trace = build_injection(&form, &BuildConfig::new(h, seed)).unwrap();
    println!("F = {form}, p = {}, height bound {h}, seed {seed}", trace.p);
    println!("base scan: {} exceptional points", trace.base_scan.exceptional.len());
    for (i, t) in trace.twists.iter().enumerate() {
        let lifted = t.checks.iter().filter(|c| c.has_rational_preimage).count();
        println!(
            "twist {}: M = {:?}, {} of {} old points lift, {} exceptional after",
            i + 1,
            t.matrix,
            lifted,
            t.checks.len(),
            t.scan.exceptional.len()
        );
    }
    println!("stop: {:?}", trace.stop);
    println!("G: degree {:?}, {} terms, {} residual collisions", trace.g_poly.total_degree(), trace.g_poly.num_terms(), trace.g_collisions.len());
    println!("a = {}, b = {}", trace.a, trace.b);
    println!("f: degree {:?}, {} terms", trace.f_poly.total_degree(), trace.f_poly.num_terms());

    trace.check().unwrap();
    assert_eq!(replay(&trace).unwrap(), trace);
    println!("trace replays identically");

    let rep = find_collisions(&trace.f_poly, SearchSpace::integers(4)).unwrap();
    println!("collisions of f on [-4, 4]^2: {}", rep.collisions.len());
}
