use std::collections::BTreeSet;

use proptest::prelude::*;

use polyinj::collide::{
    enumerate_inputs, find_collisions, find_collisions_with, CollideError, SearchConfig, SearchSpace,
};
use polyinj::{parse_poly, MultiPoly, Rational, Var};

type Pt = (i64, i64);

/// Integer-coefficient polynomial in i128, all unordered colliding pairs.
fn brute_int(terms: &[(u32, u32, i64)], h: i64) -> BTreeSet<(Pt, Pt)> {
    let val = |x: i64, y: i64| -> i128 {
        terms
            .iter()
            .map(|&(a, b, c)| c as i128 * (x as i128).pow(a) * (y as i128).pow(b))
            .sum()
    };
    let pts: Vec<(Pt, i128)> = (-h..=h)
        .flat_map(|x| (-h..=h).map(move |y| (x, y)))
        .map(|p| (p, val(p.0, p.1)))
        .collect();
    let mut out = BTreeSet::new();
    for (i, (p, v)) in pts.iter().enumerate() {
        for (q, w) in &pts[i + 1..] {
            if v == w {
                out.insert(if p < q { (*p, *q) } else { (*q, *p) });
            }
        }
    }
    out
}

fn to_poly(terms: &[(u32, u32, i64)]) -> MultiPoly {
    MultiPoly::from_terms(
        &[Var::X, Var::Y],
        terms.iter().map(|&(a, b, c)| (vec![a, b], Rational::from(c))),
    )
    .unwrap()
}

fn as_int(r: &Rational) -> i64 {
    assert!(r.is_integer());
    i64::try_from(r.numer()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn integer_mode_matches_brute_force(
        terms in prop::collection::vec((0u32..=4, 0u32..=4, -3i64..=3), 1..5),
        h in 1i64..=9,
    ) {
        let f = to_poly(&terms);
        let rep = find_collisions(&f, SearchSpace::integers(h as u64)).unwrap();
        let got: BTreeSet<(Pt, Pt)> = rep
            .collisions
            .iter()
            .map(|c| ((as_int(&c.first.0), as_int(&c.first.1)), (as_int(&c.second.0), as_int(&c.second.1))))
            .collect();
        prop_assert_eq!(got.len(), rep.collisions.len());
        prop_assert_eq!(got, brute_int(&terms, h));
        prop_assert!(rep.collisions.iter().all(|c| c.verify(&f)));
    }

    #[test]
    fn shard_count_invariance(shards in 1usize..40, h in 1u64..=4) {
        let f = parse_poly("x^2*y - y^3 + x").unwrap();
        let base = find_collisions(&f, SearchSpace::rationals(h)).unwrap().normalized();
        let cfg = SearchConfig { shards, ..SearchConfig::default() };
        let rep = find_collisions_with(&f, SearchSpace::rationals(h), &cfg).unwrap().normalized();
        prop_assert_eq!(rep, base);
    }
}

#[test]
fn enumeration_is_exact() {
    for h in 1..=12u64 {
        let vals = enumerate_inputs(h);
        let mut brute = BTreeSet::new();
        for d in 1..=h as i64 {
            for n in -(h as i64)..=h as i64 {
                brute.insert(Rational::new(n, d).unwrap());
            }
        }
        let got: BTreeSet<Rational> = vals.iter().cloned().collect();
        assert_eq!(got.len(), vals.len(), "duplicates at H={h}");
        assert_eq!(got, brute, "H={h}");
        assert!(vals.windows(2).all(|w| w[0].height() <= w[1].height()));
    }
}

#[test]
fn rational_mode_finds_scaling_collisions() {
    // x*y is constant along hyperbolas: (1/2, 2) ~ (1, 1)
    let f = parse_poly("x*y").unwrap();
    let rep = find_collisions(&f, SearchSpace::rationals(2)).unwrap();
    let half = Rational::new(1, 2).unwrap();
    let two = Rational::from(2);
    let one = Rational::from(1);
    assert!(rep.collisions.iter().any(|c| {
        (c.first == (half.clone(), two.clone()) && c.second == (one.clone(), one.clone()))
            || (c.second == (half.clone(), two.clone()) && c.first == (one.clone(), one.clone()))
    }));
}

#[test]
fn checkpoint_guards() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ck.jsonl");
    let f = parse_poly("x^3 + y^3").unwrap();
    let space = SearchSpace::integers(12);
    let cfg = SearchConfig { shards: 6, checkpoint: Some(path.clone()), ..SearchConfig::default() };
    let full = find_collisions_with(&f, space, &cfg).unwrap();

    // interrupted twice, resumed each time
    std::fs::remove_file(&path).unwrap();
    let kill = SearchConfig { stop_after_shards: Some(2), ..cfg.clone() };
    assert!(matches!(
        find_collisions_with(&f, space, &kill),
        Err(CollideError::Interrupted { completed: 2, total: 6 })
    ));
    let kill_resume = SearchConfig { resume: true, ..kill.clone() };
    assert!(matches!(
        find_collisions_with(&f, space, &kill_resume),
        Err(CollideError::Interrupted { completed: 4, total: 6 })
    ));
    let resume = SearchConfig { resume: true, ..cfg.clone() };
    let again = find_collisions_with(&f, space, &resume).unwrap();
    assert_eq!(again.normalized(), full.normalized());

    // different shard count is a mismatch
    let other = SearchConfig { shards: 7, resume: true, ..cfg.clone() };
    assert!(matches!(
        find_collisions_with(&f, space, &other),
        Err(CollideError::CheckpointMismatch { .. })
    ));

    // corruption before the final line is a mismatch, not a silent skip
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    lines[1] = "{garbage".into();
    std::fs::write(&path, lines.join("\n") + "\n").unwrap();
    assert!(matches!(
        find_collisions_with(&f, space, &resume),
        Err(CollideError::CheckpointMismatch { .. })
    ));
}
