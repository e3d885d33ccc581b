use std::collections::BTreeMap;

use super::{check_normalized, rules, CheckError, ContradictionReport, Finding, Verdict, VERDICT_TOL};
use crate::interpret::{exact_branches, predicted_distribution, Branch, RuleSet};
use crate::qcore::{Label, SCHMIDT_DISTINCT};
use crate::scenario::{BasisExpr, Scenario, ScenarioBuilder, StateExpr};

/// Alice copies `S1` into `rA`; Bob measures `S2`. With `joint`, Alice and
/// Bob are declared one observer before anything happens.
pub fn epr_scenario(c: &[f64], joint: bool) -> Result<Scenario, CheckError> {
    let d = c.len();
    let mut b = ScenarioBuilder::new("epr")
        .system("S1", d)
        .system("S2", d)
        .record("Alice", "rA", d, BasisExpr::Comp, Label::Int(0))
        .observer("Bob");
    if joint {
        b = b.partition("joint", &[&["Alice", "Bob"]]);
    }
    Ok(b.prepare(StateExpr::Schmidt(c.to_vec()), &["S1", "S2"])
        .interact("Alice", &["S1"], BasisExpr::Comp, "rA", "ra")
        .measure("Bob", &["S2"], BasisExpr::Comp, "rb")
        .build()?)
}

fn match_probability(bs: &[Branch]) -> f64 {
    bs.iter().filter(|b| b.value("ra") == b.value("rb")).map(|b| b.weight).sum()
}

/// `P(r_a = r_b)` for a Schmidt pair under collapse, under relative facts
/// with Alice and Bob separate, and with the two as one observer.
pub fn epr_correlation_check(c: &[f64]) -> Result<ContradictionReport, CheckError> {
    let d = c.len();
    if d < 2 {
        return Err(CheckError::TooFewCoefficients(d));
    }
    check_normalized(c.iter().map(|x| x * x))?;
    if let Some(x) = c.iter().find(|x| **x <= SCHMIDT_DISTINCT) {
        return Err(CheckError::Degenerate(format!("coefficient {x} is not positive")));
    }
    for i in 0..d {
        for j in i + 1..d {
            if (c[i] - c[j]).abs() <= SCHMIDT_DISTINCT {
                return Err(CheckError::Degenerate(format!(
                    "coefficients {i} and {j} are equal, so the Schmidt basis is not unique"
                )));
            }
        }
    }
    let separate = epr_scenario(c, false)?;
    let joint = epr_scenario(c, true)?;
    let orth = match_probability(&exact_branches(&separate, RuleSet::orthodox())?);
    let sep = match_probability(&exact_branches(&separate, RuleSet::rqm5())?);
    let jnt = match_probability(&exact_branches(&joint, RuleSet::rqm5())?);
    let closed: f64 = c.iter().map(|x| x.powi(4)).sum();

    let free = predicted_distribution(&separate, RuleSet::rqm5(), "Bob", "rb", &BTreeMap::new())?;
    let mut shift: f64 = 0.0;
    for v in 0..d as i64 {
        let cond = BTreeMap::from([("ra".to_string(), Label::Int(v))]);
        let given = predicted_distribution(&separate, RuleSet::rqm5(), "Bob", "rb", &cond)?;
        shift = shift.max(given.max_abs_diff(&free));
    }

    let findings = vec![
        Finding::new(
            "P(r_a = r_b)",
            &[("orthodox", orth), ("rqm5_separate", sep), ("rqm5_joint", jnt)],
            (sep - jnt).abs(),
        ),
        Finding::new(
            "separate-systems value matches the sum of c^4",
            &[("rqm5_separate", sep), ("closed_form", closed)],
            (sep - closed).abs(),
        ),
        Finding::new(
            "conditioning Bob's distribution on r_a under rqm5",
            &[("max_abs_change", shift)],
            shift,
        ),
    ];
    let verdict = if (sep - jnt).abs() > VERDICT_TOL { Verdict::Ambiguity } else { Verdict::Consistent };
    let narrative = format!(
        "With collapse Bob always matches Alice (P = {orth:.12}). Treating Alice and Bob as separate \
         observers, relative facts give P = {sep:.12}: Bob's distribution ignores Alice's fact. Treating \
         them as one observer gives P = {jnt:.12}. The prediction depends on the partition chosen."
    );
    let mut parameters = BTreeMap::new();
    parameters.insert("c".into(), c.to_vec());
    parameters.insert("c_squared".into(), c.iter().map(|x| x * x).collect());
    Ok(ContradictionReport {
        check: "epr".into(),
        rules_compared: rules(&["orthodox", "rqm5_separate", "rqm5_joint"]),
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

    #[test]
    fn reference_pair() {
        let r = epr_correlation_check(&[0.3f64.sqrt(), 0.7f64.sqrt()]).unwrap();
        let f = &r.findings[0];
        assert!((f.prediction("orthodox").unwrap() - 1.0).abs() < 1e-12);
        assert!((f.prediction("rqm5_separate").unwrap() - 0.58).abs() < 1e-12);
        assert!((f.prediction("rqm5_joint").unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(r.verdict, Verdict::Ambiguity);
    }

    #[test]
    fn rejects_degenerate() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!(matches!(epr_correlation_check(&[h, h]), Err(CheckError::Degenerate(_))));
        assert!(matches!(epr_correlation_check(&[1.0, 0.0]), Err(CheckError::Degenerate(_))));
        assert!(matches!(epr_correlation_check(&[0.5, 0.5]), Err(CheckError::Unnormalized(_))));
    }
}
