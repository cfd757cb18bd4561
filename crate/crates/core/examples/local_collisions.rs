//! No polynomial is injective over R or Q_p: two nearby points with equal values.
//!
//! cargo run --example local_collisions

use num_bigint::BigInt;
use polyinj::local::{padic_collision, real_collision};
use polyinj::{parse_poly, Rational};

fn main() {
    let f = parse_poly("x^7 + 3*y^7").unwrap();
    let one = Rational::from(1);
    let r = real_collision(&f, &one, &one, 1e-12, None).unwrap();
    println!("over R: f(1, 1) = {} and f({}, {:.15}) is within {:.1e}", r.value, r.x, r.y, r.residual);

    let g = parse_poly("x^3 + y^3").unwrap();
    let a = padic_collision(&g, 5, 8, (BigInt::from(1), BigInt::from(1)), BigInt::from(5)).unwrap();
    println!(
        "over Q_5: f(1, 1) = f({}, y) mod 5^8 with y = {}; valuations per Newton step {:?}",
        a.x, a.y, a.iteration_valuations
    );
}
