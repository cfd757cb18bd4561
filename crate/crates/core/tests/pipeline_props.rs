use proptest::prelude::*;

use polyinj::collide::{find_collisions, SearchSpace};
use polyinj::pipeline::{build_injection, det, make_G, make_f, replay, twist, BuildConfig, Draw};
use polyinj::surface::ProjPoint;
use polyinj::{parse_poly, BinaryForm, Rational};

fn form(s: &str) -> BinaryForm {
    BinaryForm::from_poly(&parse_poly(s).unwrap()).unwrap()
}

fn rational() -> impl Strategy<Value = Rational> {
    (-30i64..=30, 1i64..=30).prop_map(|(n, d)| Rational::new(n, d).unwrap())
}

fn small_form() -> impl Strategy<Value = BinaryForm> {
    (1usize..=4)
        .prop_flat_map(|d| prop::collection::vec(-5i64..=5, d + 1))
        .prop_filter_map("nonzero", |c| BinaryForm::new(c.into_iter().map(Rational::from).collect()).ok())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn g_and_f_compose_with_eval(f in small_form(), a in rational(), b in rational(), s in rational(), t in rational()) {
        prop_assume!(!a.is_zero());
        let g = make_G(&f, 5).unwrap();
        let one = Rational::one();
        let gx = &s.pow(5) + &one;
        let gy = &t.pow(5) + &one;
        prop_assert_eq!(g.eval(&[s.clone(), t.clone()]).unwrap(), f.eval(&gx, &gy));
        let fp = make_f(&g, &a, &b, 5).unwrap();
        let u = &(&a * &s.pow(5)) + &b;
        let v = &(&a * &t.pow(5)) + &b;
        prop_assert_eq!(fp.eval(&[s, t]).unwrap(), g.eval(&[u, v]).unwrap());
    }

    #[test]
    fn twist_keeps_trivial_lines(f in small_form(), m in prop::array::uniform4(-6i64..=6), x in rational(), y in rational()) {
        let m = [[m[0], m[1]], [m[2], m[3]]];
        prop_assume!(det(&m) != 0);
        prop_assume!(!(x.is_zero() && y.is_zero()));
        let t = twist(&f, &m, 5).unwrap();
        prop_assert_eq!(t.degree(), f.degree() * 5);
        let scale = x.denom() * y.denom();
        let xi = x.numer() * (&scale / x.denom());
        let yi = y.numer() * (&scale / y.denom());
        let diag = ProjPoint::new([xi.clone(), yi.clone(), xi.clone(), yi.clone()]).unwrap();
        prop_assert!(diag.lies_on(&t));
        if t.degree().is_multiple_of(2) {
            let anti = ProjPoint::new([xi.clone(), yi.clone(), -xi, -yi]).unwrap();
            prop_assert!(anti.lies_on(&t));
        }
    }
}

#[test]
fn traces_replay_for_many_seeds() {
    for (s, h) in [("x^3 + y^3", 6), ("x^2 + 3*y^2", 5), ("x^5 + 3*y^5", 8), ("x*y", 3)] {
        for seed in [0u64, 1, 2, 99] {
            let t = build_injection(&form(s), &BuildConfig::new(h, seed)).unwrap();
            t.check().unwrap();
            let r = replay(&t).unwrap();
            assert_eq!(serde_json::to_vec(&r).unwrap(), serde_json::to_vec(&t).unwrap(), "{s} seed {seed}");
            // every accepted draw appears in the trace, in order
            let accepted: Vec<&Draw> = t
                .draws
                .iter()
                .filter(|d| matches!(d, Draw::Matrix { accepted: true, .. }))
                .collect();
            assert_eq!(accepted.len(), t.twists.len());
            assert!(matches!(t.draws.last(), Some(Draw::Coefficients { accepted: true, .. })));
            let degree = t.final_form().degree() * 25;
            assert_eq!(t.f_poly.total_degree(), Some(degree));
        }
    }
}

#[test]
fn different_seeds_differ() {
    let f = form("x^3 + y^3");
    let a = build_injection(&f, &BuildConfig::new(6, 1)).unwrap();
    let b = build_injection(&f, &BuildConfig::new(6, 2)).unwrap();
    assert_ne!(a.draws, b.draws);
}

#[test]
fn reduced_trace_has_no_small_collisions_off_the_diagonal() {
    let t = build_injection(&form("x^3 + 2*y^3"), &BuildConfig::new(5, 3)).unwrap();
    assert!(!t.unreduced);
    let rep = find_collisions(&t.f_poly, SearchSpace::integers(3)).unwrap();
    assert!(rep.collisions.is_empty());
}

#[test]
fn trace_json_round_trips() {
    let t = build_injection(&form("x^3 + y^3"), &BuildConfig::new(6, 5)).unwrap();
    let js = serde_json::to_string(&t).unwrap();
    let back: polyinj::pipeline::ConstructionTrace = serde_json::from_str(&js).unwrap();
    assert_eq!(back, t);
}
