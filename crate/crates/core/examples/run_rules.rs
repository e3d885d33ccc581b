//! The EPR fixture under the three rule sets: does Bob's result match Alice's fact?

use wfcheck::interpret::{exact_branches, RuleSet};
use wfcheck::scenario::parse;

fn main() {
    let s = parse(include_str!("epr.wfs")).unwrap();
    for (name, rules) in [("orthodox", RuleSet::orthodox()), ("rqm5", RuleSet::rqm5()), ("cpl", RuleSet::cpl())] {
        let branches = exact_branches(&s, rules).unwrap();
        println!("{name}:");
        for b in &branches {
            println!("  ra = {}  rb = {}  weight {:.4}", b.value("ra").unwrap(), b.value("rb").unwrap(), b.weight);
        }
        let agree: f64 = branches.iter().filter(|b| b.value("ra") == b.value("rb")).map(|b| b.weight).sum();
        println!("  P(ra = rb) = {agree:.4}");
    }
}
