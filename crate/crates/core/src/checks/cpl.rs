use std::collections::BTreeMap;

use super::{check_normalized, rules, CheckError, ContradictionReport, Finding, Verdict, VERDICT_TOL};
use crate::interpret::{predicted_distribution, RuleSet};
use crate::qcore::{
    apply_local, born_distribution, build_premeasurement, partial_trace, tensor_states, BasisSpec,
    Label, ObservableSpec, SpaceLayout, StateVector, C64, ZERO_PROB,
};
use crate::scenario::{BasisExpr, Scenario, ScenarioBuilder, StateExpr};

/// Alice copies `S` into `rA`; Bob then reads `rA` into his own `rB`.
pub fn cpl_scenario(c: &[C64]) -> Result<Scenario, CheckError> {
    let d = c.len();
    Ok(ScenarioBuilder::new("cpl")
        .system("S", d)
        .record("Alice", "rA", d, BasisExpr::Comp, Label::Int(0))
        .record("Bob", "rB", d, BasisExpr::Comp, Label::Int(0))
        .prepare(StateExpr::Amplitudes(c.to_vec()), &["S"])
        .interact("Alice", &["S"], BasisExpr::Comp, "rA", "ra")
        .read("Bob", "rA", Some("rB"), "rb")
        .build()?)
}

fn wrong_read_mass(d: &crate::qcore::Distribution, r_a: usize) -> f64 {
    d.iter().filter(|(o, _)| o.0[0] != Label::Int(r_a as i64)).map(|(_, p)| p).sum()
}

/// Born probability that Bob's readout of Alice's record disagrees with her
/// fact `r_a`, against the zero that cross-perspective links require.
pub fn cpl_probability_check(c: &[C64], r_a: usize) -> Result<ContradictionReport, CheckError> {
    let d = c.len();
    if d < 2 {
        return Err(CheckError::TooFewCoefficients(d));
    }
    if r_a >= d {
        return Err(CheckError::IndexOutOfRange { index: r_a, dim: d });
    }
    check_normalized(c.iter().map(|z| z.norm_sqr()))?;

    let layout = SpaceLayout::new([("S", d), ("rA", d), ("rB", d)])?;
    let comp = |id: &str| BasisSpec::computational(id, d);
    let system = StateVector::normalized(layout.select(&["S"])?, c.to_vec())?;
    let blank = StateVector::basis_state(layout.select(&["rA", "rB"])?, &[0, 0])?;
    let prepared = tensor_states(&[&system, &blank])?;
    let alice_copy = build_premeasurement(&comp("S")?, &comp("rA")?, &Label::Int(0))?;
    let written = apply_local(&alice_copy, &prepared)?;
    let bob_copy = build_premeasurement(&comp("rA")?, &comp("rB")?, &Label::Int(0))?;
    let read = apply_local(&bob_copy, &written)?;

    let before = partial_trace(&written, &["rA"])?;
    let after = partial_trace(&read, &["rA"])?;
    let reduced_shift = before.distance(&after);

    let dist = born_distribution(&read, &ObservableSpec::from_basis(comp("rB")?))?;
    let born = wrong_read_mass(&dist, r_a);
    let closed: f64 = c.iter().enumerate().filter(|(j, _)| *j != r_a).map(|(_, z)| z.norm_sqr()).sum();

    let mut findings = vec![Finding::new(
        format!("P(r_b != r_a) for r_a = {r_a}"),
        &[("born", born), ("closed_form", closed), ("cpl", 0.0)],
        born,
    )];
    findings.push(Finding::new(
        "closed form agrees with the built state",
        &[("born", born), ("closed_form", closed)],
        (born - closed).abs(),
    ));

    let mut compared = rules(&["born", "cpl"]);
    let mut engine_note = String::new();
    if c[r_a].norm_sqr() > ZERO_PROB {
        let s = cpl_scenario(c)?;
        let cond = BTreeMap::from([("ra".to_string(), Label::Int(r_a as i64))]);
        let rq = wrong_read_mass(&predicted_distribution(&s, RuleSet::rqm5(), "Bob", "rb", &cond)?, r_a);
        let pinned = wrong_read_mass(&predicted_distribution(&s, RuleSet::cpl(), "Bob", "rb", &cond)?, r_a);
        findings.push(Finding::new(
            format!("engine P(r_b != r_a) given r_a = {r_a}"),
            &[("rqm5", rq), ("cpl", pinned)],
            (rq - pinned).abs(),
        ));
        compared = rules(&["born", "rqm5", "cpl"]);
    } else {
        engine_note = format!(" Alice's fact r_a = {r_a} has probability zero, so no engine run conditions on it.");
    }
    findings.push(Finding::new(
        "Alice's reduced state is unchanged by Bob's readout",
        &[("trace_distance", reduced_shift)],
        reduced_shift,
    ));

    let verdict = if born > VERDICT_TOL { Verdict::Contradiction } else { Verdict::Consistent };
    let narrative = match verdict {
        Verdict::Contradiction => format!(
            "Bob reads Alice's record by a pre-measurement that leaves her reduced state unchanged. \
             On the resulting state the Born rule gives P(r_b != r_a) = {born:.12}, while \
             cross-perspective links require 0. The two rules are contradictory for these coefficients.{engine_note}"
        ),
        _ => format!(
            "Only the branch r_a = {r_a} carries weight, so Born and cross-perspective links agree.{engine_note}"
        ),
    };
    let mut parameters = BTreeMap::new();
    parameters.insert("c_re".into(), c.iter().map(|z| z.re).collect());
    parameters.insert("c_im".into(), c.iter().map(|z| z.im).collect());
    parameters.insert("c_squared".into(), c.iter().map(|z| z.norm_sqr()).collect());
    parameters.insert("r_a".into(), vec![r_a as f64]);
    Ok(ContradictionReport {
        check: "cpl".into(),
        rules_compared: compared,
        parameters,
        findings,
        verdict,
        narrative,
        search: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::c;

    fn real(xs: &[f64]) -> Vec<C64> {
        xs.iter().map(|&x| c(x, 0.0)).collect()
    }

    #[test]
    fn deterministic_branch_is_consistent() {
        let r = cpl_probability_check(&real(&[1.0, 0.0]), 0).unwrap();
        assert_eq!(r.verdict, Verdict::Consistent);
        assert!(r.findings[0].discrepancy.abs() < 1e-15);
    }

    #[test]
    fn uniform_pair_is_half() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let r = cpl_probability_check(&real(&[h, h]), 0).unwrap();
        assert_eq!(r.verdict, Verdict::Contradiction);
        assert!((r.findings[0].prediction("born").unwrap() - 0.5).abs() < 1e-12);
        assert!(r.is_well_formed());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(cpl_probability_check(&real(&[1.0, 1.0]), 0), Err(CheckError::Unnormalized(_))));
        assert!(matches!(cpl_probability_check(&real(&[1.0, 0.0]), 2), Err(CheckError::IndexOutOfRange { .. })));
        assert!(matches!(cpl_probability_check(&real(&[1.0]), 0), Err(CheckError::TooFewCoefficients(1))));
    }

    #[test]
    fn impossible_fact_skips_engine() {
        let r = cpl_probability_check(&real(&[1.0, 0.0]), 1).unwrap();
        assert_eq!(r.verdict, Verdict::Contradiction);
        assert!(r.finding("engine").is_none());
    }
}
