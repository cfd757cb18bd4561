//! x^p + t y^p is injective on F_p(t): random search plus the p-th power test.
//!
//! cargo run --example function_field

use polyinj::ffield::{ff_collision_search, ff_eval_injection, is_pth_power, parse_ratfun, FpRatFun};

fn main() {
    for p in [2, 3, 5, 7] {
        let r = ff_collision_search(p, 3, 5_000, 1).unwrap();
        println!("p = {p}: {} trials, {} equal inputs, {} collisions", r.trials, r.equal_inputs, r.collisions);
    }
    let x = parse_ratfun(3, "1,1;0,1").unwrap();
    let y = parse_ratfun(3, "2").unwrap();
    let v = ff_eval_injection(&x, &y);
    println!("p = 3: f(({x}), ({y})) = {v}");
    println!("t is a cube: {}", is_pth_power(&FpRatFun::t(3)));
    println!("x^3 is a cube: {}", is_pth_power(&x.pow(3)));
}
