//! Exhaustive search over sign assignments, with and without a solution.

use wfcheck::checks::{formal_square, parity_search, ParityConstraint};

fn main() {
    let chain = [
        ParityConstraint::product(&["x", "y"], -1, "x y").unwrap(),
        ParityConstraint::product(&["y", "z"], -1, "y z").unwrap(),
    ];
    let r = parity_search(&chain, &[]).unwrap();
    println!("{:?}: {:?}", r.variables, r.satisfying);

    let mermin = [
        ParityConstraint::product(&["x", "y", "z"], 1, "xyz").unwrap(),
        ParityConstraint::product(&["x", "y"], -1, "xy").unwrap(),
        ParityConstraint::product(&["y", "z"], -1, "yz").unwrap(),
        ParityConstraint::product(&["x", "z"], -1, "xz").unwrap(),
    ];
    let r = parity_search(&mermin, &[]).unwrap();
    println!("{} of {} satisfy all four", r.satisfying.len(), r.domain_size);
    let f = formal_square(&[&mermin[1], &mermin[2], &mermin[3]], &[]).unwrap();
    println!("({})^2 = {}", f.monomial.join(" "), f.square);
}
