use super::*;
use crate::qcore::{apply_local, build_premeasurement, c, partial_trace, BasisSpec};
use crate::scenario::parse;

const EPR: &str = include_str!("../../examples/epr.wfs");
const CPL: &str = include_str!("../../examples/cpl.wfs");
const GHZ: &str = include_str!("../../examples/ghz.wfs");

fn o(v: i64) -> Outcome {
    Outcome::single(Label::Int(v))
}

fn match_prob(bs: &[Branch], x: &str, y: &str) -> f64 {
    bs.iter().filter(|b| b.value(x) == b.value(y)).map(|b| b.weight).sum()
}

#[test]
fn epr_orthodox_always_matches() {
    let s = parse(EPR).unwrap();
    let bs = exact_branches(&s, RuleSet::orthodox()).unwrap();
    assert!((match_prob(&bs, "ra", "rb") - 1.0).abs() < 1e-12);
    for seed in 0..20 {
        let r = run(&s, RuleSet::orthodox(), seed).unwrap();
        assert_eq!(Some(&r.outcomes["rb"].0[0]), r.ledger.value("ra"));
    }
}

#[test]
fn epr_rqm5_is_uncorrelated() {
    let s = parse(EPR).unwrap();
    let bs = exact_branches(&s, RuleSet::rqm5()).unwrap();
    assert_eq!(bs.len(), 4);
    assert!((match_prob(&bs, "ra", "rb") - 0.58).abs() < 1e-12);
    let free = predicted_distribution(&s, RuleSet::rqm5(), "Bob", "rb", &BTreeMap::new()).unwrap();
    for v in [0, 1] {
        let cond = BTreeMap::from([("ra".to_string(), Label::Int(v))]);
        let d = predicted_distribution(&s, RuleSet::rqm5(), "Bob", "rb", &cond).unwrap();
        assert!(d.max_abs_diff(&free) < 1e-12);
    }
    assert!((free.prob(&o(0)) - 0.3).abs() < 1e-12);
}

#[test]
fn joint_partition_restores_correlation() {
    let src = EPR.replace("prepare", "partition joint = Alice,Bob\nprepare");
    let s = parse(&src).unwrap();
    let bs = exact_branches(&s, RuleSet::rqm5()).unwrap();
    assert!((match_prob(&bs, "ra", "rb") - 1.0).abs() < 1e-12);
}

#[test]
fn cpl_read_is_born_under_rqm5_and_pinned_under_cpl() {
    let s = parse(CPL).unwrap();
    let d = predicted_distribution(&s, RuleSet::rqm5(), "Bob", "rb", &BTreeMap::new()).unwrap();
    assert!((d.prob(&o(1)) - 0.7).abs() < 1e-12);
    let cond = BTreeMap::from([("ra".to_string(), Label::Int(1))]);
    let d = predicted_distribution(&s, RuleSet::cpl(), "Bob", "rb", &cond).unwrap();
    assert!((d.prob(&o(1)) - 1.0).abs() < 1e-12);
    for seed in 0..20 {
        let r = run(&s, RuleSet::cpl(), seed).unwrap();
        assert_eq!(Some(&r.outcomes["rb"].0[0]), r.ledger.value("ra"));
    }
}

#[test]
fn cpl_pin_overrides_born_weight() {
    // Bob faces the unreduced three-party copy state, so the pin disagrees with Born.
    let s = parse(CPL).unwrap();
    let bs = exact_branches(&s, RuleSet::cpl()).unwrap();
    let total: f64 = bs.iter().map(|b| b.weight).sum();
    assert!((total - 1.0).abs() < 1e-12);
    for b in &bs {
        let f = &b.findings[0];
        let want = if f.pinned == Label::Int(0) { 0.3 } else { 0.7 };
        assert!((f.born_probability - want).abs() < 1e-12);
    }
}

#[test]
fn zero_weight_pin_is_a_finding() {
    // Bob first measures S and collapses his own view; the pin then may be impossible.
    let src = "scenario z\nagent Alice\nobserver Bob\nsystem S 2\nagent Alice record rA dim 2 pointer comp init 0\n\
               prepare [0.6, 0.8] on S\ninteract Alice on S in comp record rA -> ra\n\
               measure Bob on S in comp -> m\nread Bob rA -> rb\n";
    let s = parse(src).unwrap();
    let bs = exact_branches(&s, RuleSet::cpl()).unwrap();
    let bad: f64 = bs.iter().filter(|b| b.findings.iter().any(|f| f.impossible)).map(|b| b.weight).sum();
    assert!((bad - 2.0 * 0.36 * 0.64).abs() < 1e-12);
    let p = perspective(&s, RuleSet::cpl(), "Bob", Some(3)).unwrap();
    assert!(!p.consistent);
}

#[test]
fn seed_determinism() {
    let s = parse(GHZ).unwrap();
    for r in [RuleSet::orthodox(), RuleSet::rqm5(), RuleSet::cpl()] {
        assert_eq!(run(&s, r, 11).unwrap(), run(&s, r, 11).unwrap());
    }
}

#[test]
fn perspective_before_any_event_is_product_state() {
    let s = parse(EPR).unwrap();
    let p = perspective(&s, RuleSet::rqm5(), "Bob", None).unwrap();
    let v = p.as_pure().unwrap();
    assert!((v.amplitudes()[0] - c(1.0, 0.0)).norm() < 1e-15);
}

#[test]
fn outside_view_after_interaction_is_entangled_vector() {
    let s = parse(EPR).unwrap();
    let p = perspective(&s, RuleSet::rqm5(), "Bob", Some(1)).unwrap();
    let v = p.as_pure().expect("outside observer faces a pure state");
    // layout S1, S2, rA: amplitudes c0 at |000⟩ and c1 at |111⟩
    let (c0, c1) = (0.3f64.sqrt(), 0.7f64.sqrt());
    assert!((v.amplitudes()[0] - c(c0, 0.0)).norm() < 1e-12);
    assert!((v.amplitudes()[7] - c(c1, 0.0)).norm() < 1e-12);

    let q = perspective(&s, RuleSet::orthodox(), "Bob", Some(1)).unwrap();
    let d = q.density();
    assert!(q.as_pure().is_none());
    assert!((d.purity() - (0.09 + 0.49)).abs() < 1e-12);
}

#[test]
fn readout_leaves_reduced_state_of_writer_unchanged() {
    let s = parse(CPL).unwrap();
    let before = perspective(&s, RuleSet::rqm5(), "Bob", Some(1)).unwrap();
    let b = before.as_pure().unwrap();
    let copy = build_premeasurement(
        &BasisSpec::computational("rA", 2).unwrap(),
        &BasisSpec::computational("rB", 2).unwrap(),
        &Label::Int(0),
    )
    .unwrap();
    let after = apply_local(&copy, b).unwrap();
    let d = partial_trace(b, &["rA"]).unwrap().distance(&partial_trace(&after, &["rA"]).unwrap());
    assert!(d < 1e-12);
}

#[test]
fn both_parties_adds_system_entries() {
    let s = parse(GHZ).unwrap();
    let r = RuleSet::rqm5().with_fact_holder(FactHolderPolicy::BothParties);
    let out = run(&s, r, 3).unwrap();
    assert_eq!(out.ledger.len(), 6);
    assert!(out.ledger.entries().iter().any(|e| e.holder == "S2"));
}

#[test]
fn conditioning_errors() {
    let s = parse(EPR).unwrap();
    let cond = BTreeMap::from([("rb".to_string(), Label::Int(0))]);
    assert!(matches!(
        predicted_distribution(&s, RuleSet::rqm5(), "Bob", "rb", &cond),
        Err(EngineError::UnwrittenFact(_))
    ));
    assert!(matches!(
        predicted_distribution(&s, RuleSet::rqm5(), "Bob", "nope", &BTreeMap::new()),
        Err(EngineError::UnboundResult(_))
    ));
    assert!(matches!(perspective(&s, RuleSet::rqm5(), "Eve", None), Err(EngineError::UnknownObserver(_))));
}

#[test]
fn non_commuting_concurrent_measures_are_rejected() {
    let src = "scenario n\nobserver W\nsystem S 2\nprepare [1, 0] on S\n\
               measure W on S in basis1 -> x\nmeasure W on S in basis3 -> y concurrent\n";
    let s = parse(src).unwrap();
    assert!(matches!(run(&s, RuleSet::orthodox(), 0), Err(EngineError::NonCommuting { event: 2, previous: 1 })));
}

#[test]
fn ghz_all_basis2_parity_is_plus_one() {
    let s = parse(GHZ).unwrap();
    // orthodox collapse by A spoils it; the relative-fact rules leave W's view intact
    for r in [RuleSet::rqm5(), RuleSet::cpl()] {
        for b in exact_branches(&s, r).unwrap() {
            let p: i64 = ["B1", "B2", "B3"].iter().map(|n| b.outcomes[*n].int_product().unwrap()).product();
            assert_eq!(p, 1);
        }
    }
}
