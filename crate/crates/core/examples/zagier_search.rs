//! Exhaustive collision search for x^7 + 3y^7 with a checkpoint that
//! survives an interruption.
//!
//! cargo run --release --example zagier_search -- [height]

use polyinj::collide::{find_collisions_with, CollideError, SearchConfig, SearchSpace};
use polyinj::parse_poly;

fn main() {
    let h: u64 = std::env::args().nth(1).map_or(100, |s| s.parse().expect("height"));
    let f = parse_poly("x^7 + 3*y^7").unwrap();
    let dir = tempfile::tempdir().unwrap();
    let ckpt = dir.path().join("zagier.jsonl");
    let cfg = SearchConfig {
        shards: 32,
        checkpoint: Some(ckpt.clone()),
        ..SearchConfig::default()
    };

    let first = SearchConfig { stop_after_shards: Some(10), ..cfg.clone() };
    match find_collisions_with(&f, SearchSpace::integers(h), &first) {
        Err(CollideError::Interrupted { completed, total }) => println!("stopped after {completed}/{total} shards"),
        other => panic!("expected an interruption, got {other:?}"),
    }
    let resume = SearchConfig { resume: true, ..cfg };
    let report = find_collisions_with(&f, SearchSpace::integers(h), &resume).unwrap();
    println!(
        "{} inputs in [-{h}, {h}]^2, {} collisions, {} candidates, {} ms",
        report.stats.inputs_evaluated,
        report.collisions.len(),
        report.stats.fingerprint_candidates,
        report.stats.wall_time_ms
    );
    println!("{}", report.disclaimer);
}
