//! Seeded sampling of the CPL fixture: pinned reads never disagree.

use std::collections::BTreeMap;

use wfcheck::interpret::{sample_runs, RuleSet};
use wfcheck::scenario::parse;

fn main() {
    let s = parse(include_str!("cpl.wfs")).unwrap();
    for rules in [RuleSet::rqm5(), RuleSet::cpl()] {
        let runs = sample_runs(&s, rules, 7, 10_000).unwrap();
        let mut counts: BTreeMap<(String, String), usize> = BTreeMap::new();
        for b in &runs {
            let key = (b.value("ra").unwrap().to_string(), b.value("rb").unwrap().to_string());
            *counts.entry(key).or_default() += 1;
        }
        let pinned: usize = runs.iter().map(|b| b.findings.len()).sum();
        println!("{:?}: {counts:?}, pinned reads overriding Born weight: {pinned}", rules.kind);
    }
}
