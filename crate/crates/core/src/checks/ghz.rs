use std::collections::BTreeMap;

use super::parity::{formal_square, parity_search, Literal, ParityConstraint};
use super::{rules, CheckError, ContradictionReport, Finding, Verdict};
use crate::interpret::{exact_branches, perspective, Branch, FactHolderPolicy, RuleSet};
use crate::qcore::{
    apply_local, born_distribution, build_premeasurement, c, tensor_states, BasisSpec, Distribution,
    Label, ObservableSpec, Outcome, SpaceLayout, StateVector,
};
use crate::scenario::{BasisExpr, Scenario, ScenarioBuilder, StateExpr};

/// Outcomes below this weight are ignored by branchwise checks.
const BRANCH_FLOOR: f64 = 1e-12;

const SYSTEMS: [&str; 3] = ["S1", "S2", "S3"];
const RECORDS: [&str; 3] = ["a1", "a2", "a3"];

fn others(i: usize) -> (usize, usize) {
    match i {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    }
}

fn prefix() -> ScenarioBuilder {
    let mut b = ScenarioBuilder::new("ghz").agent("A").observer("W");
    for s in SYSTEMS {
        b = b.system(s, 2);
    }
    for r in RECORDS {
        b = b.record("A", r, 2, BasisExpr::Basis3, Label::Int(1));
    }
    b = b.prepare(StateExpr::Ghz, &SYSTEMS);
    for k in 0..3 {
        b = b.interact("A", &[SYSTEMS[k]], BasisExpr::Basis3, RECORDS[k], &format!("A{}", k + 1));
    }
    b
}

/// A copies each system in basis-3; W measures every (system, record) pair
/// in basis-2.
pub fn ghz_scenario() -> Result<Scenario, CheckError> {
    let mut b = prefix();
    for k in 0..3 {
        let e = crate::scenario::Event::Measure {
            observer: "W".into(),
            factors: vec![crate::scenario::MeasureFactor {
                targets: vec![SYSTEMS[k].into(), RECORDS[k].into()],
                basis: BasisExpr::Basis2,
            }],
            single: false,
            encoding: None,
            result: format!("B{}", k + 1),
            concurrent: k > 0,
        };
        b = b.event(e);
    }
    Ok(b.build()?)
}

/// Mixed context `i` (0-based): W measures pair `i` in basis-2 and reads the
/// other two records, binding `B{i+1}`, `R{j+1}` and `R{k+1}`.
pub fn ghz_context_scenario(i: usize) -> Result<Scenario, CheckError> {
    let (j, k) = others(i);
    Ok(prefix()
        .measure("W", &[SYSTEMS[i], RECORDS[i]], BasisExpr::Basis2, &format!("B{}", i + 1))
        .read("W", RECORDS[j], None, &format!("R{}", j + 1))
        .read("W", RECORDS[k], None, &format!("R{}", k + 1))
        .build()?)
}

/// The copied three-party state over `S1,S2,S3,a1,a2,a3`.
pub fn ghz_state() -> Result<StateVector, CheckError> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let systems = SpaceLayout::qubits(&SYSTEMS)?;
    let mut amps = vec![c(0.0, 0.0); 8];
    amps[0] = c(h, 0.0);
    amps[7] = c(h, 0.0);
    let mut parts = vec![StateVector::new(systems, amps)?];
    for r in RECORDS {
        let b3 = BasisSpec::basis3(r)?;
        parts.push(StateVector::new(SpaceLayout::qubits(&[r])?, b3.vectors()[0].clone())?);
    }
    let refs: Vec<&StateVector> = parts.iter().collect();
    let mut s = tensor_states(&refs)?;
    for k in 0..3 {
        let u = build_premeasurement(&BasisSpec::basis3(SYSTEMS[k])?, &BasisSpec::basis3(RECORDS[k])?, &Label::Int(1))?;
        s = apply_local(&u, &s)?;
    }
    Ok(s)
}

fn product_mass(d: &Distribution, want: i64) -> f64 {
    d.iter().filter(|(o, _)| o.int_product() == Some(want)).map(|(_, p)| p).sum()
}

fn engine_product_mass(bs: &[Branch], names: &[String], want: i64) -> f64 {
    bs.iter()
        .filter(|b| {
            let p: Option<i64> = names.iter().map(|n| b.value(n).and_then(|o| o.int_product())).product();
            p == Some(want)
        })
        .map(|b| b.weight)
        .sum()
}

/// The four parity relations over `B1..B3, A1..A3`.
fn relations() -> Result<Vec<ParityConstraint>, CheckError> {
    Ok(vec![
        ParityConstraint::product(&["B1", "B2", "B3"], 1, "all pairs in basis-2")?,
        ParityConstraint::product(&["B1", "A2", "A3"], -1, "pair 1 in basis-2, records 2 and 3 read")?,
        ParityConstraint::product(&["A1", "B2", "A3"], -1, "pair 2 in basis-2, records 1 and 3 read")?,
        ParityConstraint::product(&["A1", "A2", "B3"], -1, "pair 3 in basis-2, records 1 and 2 read")?,
    ])
}

/// Three-party parity argument: quantum parities of the four contexts, the
/// engine's relative-fact and pinned predictions for them, and the search
/// for a joint `±1` assignment of the recorded values.
pub fn ghz_check(policy: FactHolderPolicy) -> Result<ContradictionReport, CheckError> {
    let state = ghz_state()?;
    let mut findings = Vec::new();

    let rq = RuleSet::rqm5().with_fact_holder(policy);
    let cp = RuleSet::cpl().with_fact_holder(policy);
    let full = ghz_scenario()?;
    let view = perspective(&full, rq, "W", Some(3))?;
    let w = view.as_pure().ok_or_else(|| CheckError::Degenerate("W's view is not pure".into()))?;
    let overlap = 1.0 - w.inner(&state).norm_sqr();
    findings.push(Finding::new(
        "engine view of W matches the built state",
        &[("infidelity", overlap.abs())],
        overlap.abs(),
    ));

    let pairs: Vec<BasisSpec> =
        (0..3).map(|k| BasisSpec::basis2(SYSTEMS[k], RECORDS[k])).collect::<Result<_, _>>()?;
    let all_b = born_distribution(&state, &ObservableSpec::product(pairs.clone())?)?;
    let q = product_mass(&all_b, 1);
    let names: Vec<String> = (1..=3).map(|k| format!("B{k}")).collect();
    let e_rq = engine_product_mass(&exact_branches(&full, rq)?, &names, 1);
    let e_cp = engine_product_mass(&exact_branches(&full, cp)?, &names, 1);
    findings.push(Finding::new(
        "P(B1 B2 B3 = +1)",
        &[("quantum", q), ("rqm5", e_rq), ("cpl", e_cp)],
        (1.0 - q).abs().max((e_cp - q).abs()),
    ));

    let mut violations = 0usize;
    let mut violating_mass = 0.0;
    for i in 0..3 {
        let (j, k) = others(i);
        let ctx = ObservableSpec::product(vec![
            pairs[i].clone(),
            BasisSpec::basis3(RECORDS[j])?,
            BasisSpec::basis3(RECORDS[k])?,
        ])?;
        let d = born_distribution(&state, &ctx)?;
        let q = product_mass(&d, -1);
        for (o, &p) in d.iter() {
            if p <= BRANCH_FLOOR {
                continue;
            }
            let ok = match (o.0[0].as_int(), o.0[1].as_int(), o.0[2].as_int()) {
                (Some(b), Some(x), Some(y)) => b == -x * y,
                _ => false,
            };
            if !ok {
                violations += 1;
                violating_mass += p;
            }
        }
        let sc = ghz_context_scenario(i)?;
        let names = vec![format!("B{}", i + 1), format!("R{}", j + 1), format!("R{}", k + 1)];
        let e_rq = engine_product_mass(&exact_branches(&sc, rq)?, &names, -1);
        let e_cp = engine_product_mass(&exact_branches(&sc, cp)?, &names, -1);
        findings.push(Finding::new(
            format!("P(B{} A{} A{} = -1)", i + 1, j + 1, k + 1),
            &[("quantum", q), ("rqm5", e_rq), ("cpl", e_cp)],
            (1.0 - q).abs().max((e_cp - q).abs()),
        ));
    }
    findings.push(Finding::new(
        "B_i = -A_j A_k on every branch",
        &[("violating_branches", violations as f64), ("violating_mass", violating_mass)],
        violating_mass,
    ));

    let mut ledger: BTreeMap<Outcome, f64> = BTreeMap::new();
    for b in exact_branches(&full, cp)? {
        let a: Vec<Label> = (1..=3).map(|k| b.ledger.value(&format!("A{k}")).cloned().expect("fact")).collect();
        *ledger.entry(Outcome(a)).or_default() += b.weight;
    }
    let uniform = ledger.values().map(|p| (p - 0.125).abs()).fold(0.0, f64::max);
    findings.push(Finding::new(
        "ledger values (A1,A2,A3) are uniform",
        &[("assignments", ledger.len() as f64), ("max_deviation", uniform)],
        uniform + (8 - ledger.len().min(8)) as f64,
    ));

    let rel = relations()?;
    let joint = parity_search(&rel, &["A1", "A2", "A3", "B1", "B2", "B3"])?;
    let substituted: Vec<ParityConstraint> = rel
        .iter()
        .map(|c| {
            c.substitute("B1", &[Literal::neg("A2"), Literal::pos("A3")])
                .substitute("B2", &[Literal::neg("A1"), Literal::pos("A3")])
                .substitute("B3", &[Literal::neg("A1"), Literal::pos("A2")])
        })
        .collect();
    let mut search = parity_search(&substituted, &["A1", "A2", "A3"])?;
    let formal = formal_square(&[&rel[1], &rel[2], &rel[3]], &[&rel[0]]);
    search.formal_product = formal.clone();
    findings.push(Finding::new(
        "joint assignments of (B1,B2,B3,A1,A2,A3) satisfying all four relations",
        &[("found", joint.satisfying.len() as f64), ("domain", joint.domain_size as f64)],
        if joint.is_empty() { 1.0 } else { 0.0 },
    ));
    findings.push(Finding::new(
        "assignments of (A1,A2,A3) satisfying all four relations",
        &[("found", search.satisfying.len() as f64), ("domain", search.domain_size as f64)],
        if search.is_empty() { 1.0 } else { 0.0 },
    ));
    let square = formal.as_ref().map_or(1.0, |f| f.square as f64);
    findings.push(Finding::new(
        "(A1 A2 A3)^2 forced by the four relations",
        &[("formal", square), ("real_assignment", 1.0)],
        (1.0 - square).abs(),
    ));

    let verdict = if search.is_empty() && square < 0.0 { Verdict::Contradiction } else { Verdict::Consistent };
    let narrative = format!(
        "A copies each of three systems in basis-3. W can measure every (system, record) pair in \
         basis-2, where the parities give B1 B2 B3 = +1, or measure one pair and read the other two \
         records, where B_i A_j A_k = -1. Each context is an exact run from the same state. If the \
         recorded values were definite for every reader, as cross-perspective links demand, one \
         assignment of (A1,A2,A3) would satisfy all four relations. None of the {} does; multiplying \
         the relations forces (A1 A2 A3)^2 = {}, so A1 A2 A3 = {}. Pinned reads break the mixed-context \
         parity with probability {:.12}.",
        search.domain_size,
        square,
        formal.as_ref().map_or("undetermined", |f| f.value.as_str()),
        1.0 - findings[2].prediction("cpl").unwrap_or(1.0),
    );
    let mut parameters = BTreeMap::new();
    parameters.insert(
        "both_parties".into(),
        vec![if policy == FactHolderPolicy::BothParties { 1.0 } else { 0.0 }],
    );
    Ok(ContradictionReport {
        check: "ghz".into(),
        rules_compared: rules(&["quantum", "rqm5", "cpl"]),
        parameters,
        findings,
        verdict,
        narrative,
        search: Some(search),
    })
}
