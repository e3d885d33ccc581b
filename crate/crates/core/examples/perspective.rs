//! What Bob faces before and after Alice's interaction, under each rule set.

use wfcheck::interpret::{perspective, RuleSet};
use wfcheck::qcore::partial_trace_density;
use wfcheck::scenario::parse;

fn main() {
    let s = parse(include_str!("cpl.wfs")).unwrap();
    for (name, rules) in [("orthodox", RuleSet::orthodox()), ("rqm5", RuleSet::rqm5())] {
        for after in [None, Some(1), Some(2)] {
            let p = perspective(&s, rules, "Bob", after).unwrap();
            let rho = p.density();
            let alice = partial_trace_density(&rho, &["rA"]).unwrap();
            println!(
                "{name:9} after {after:?}: {}, purity {:.3}, Alice's record diag {:?}",
                if p.as_pure().is_some() { "pure" } else { "mixed" },
                rho.purity(),
                alice.diagonal().iter().map(|x| format!("{x:.2}")).collect::<Vec<_>>()
            );
        }
    }
}
