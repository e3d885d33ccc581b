use std::fmt::Write;

use super::report::{ParseReport, ReportEnvelope, Results, RunReport, Table};
use crate::checks::ContradictionReport;

/// `x` with 12 significant digits, trailing zeros dropped.
pub fn num(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let mag = x.abs().log10().floor() as i32;
    if !(-5..=15).contains(&mag) {
        let s = format!("{x:.11e}");
        let (m, e) = s.split_once('e').expect("exponent form");
        let m = m.trim_end_matches('0').trim_end_matches('.');
        return format!("{m}e{e}");
    }
    let decimals = (11 - mag).max(0) as usize;
    let s = format!("{x:.decimals$}");
    let s = if s.contains('.') { s.trim_end_matches('0').trim_end_matches('.').to_string() } else { s };
    if s == "-0" {
        "0".into()
    } else {
        s
    }
}

pub fn render(env: &ReportEnvelope) -> String {
    let mut out = String::new();
    match &env.results {
        Results::Parse(p) => parse(&mut out, p),
        Results::Run(r) => run(&mut out, r, env.seed),
        Results::Check(c) => check(&mut out, c),
    }
    if let Some(t) = &env.timing {
        writeln!(out, "elapsed_ms: {}", num(t.elapsed_ms)).unwrap();
    }
    out
}

fn parse(out: &mut String, p: &ParseReport) {
    writeln!(out, "ok: scenario {} ({} events)", p.scenario, p.events).unwrap();
    out.push_str(&p.canonical);
}

fn table(out: &mut String, names: &[String], t: &Table) {
    writeln!(out, "  histories: {}", t.histories).unwrap();
    writeln!(out, "  joint ({}):", names.join(", ")).unwrap();
    for row in &t.joint {
        writeln!(out, "    {}  {}", row.values.join(" "), num(row.probability)).unwrap();
    }
    writeln!(out, "  marginals:").unwrap();
    for n in names {
        let Some(m) = t.marginals.get(n) else { continue };
        let parts: Vec<String> = m.iter().map(|(k, p)| format!("{k}: {}", num(*p))).collect();
        writeln!(out, "    {n}: {}", parts.join(", ")).unwrap();
    }
    writeln!(out, "  agreement:").unwrap();
    for a in &t.agreement {
        writeln!(out, "    P({} == {}) = {}", a.first, a.second, num(a.probability)).unwrap();
    }
}

fn run(out: &mut String, r: &RunReport, seed: Option<u64>) {
    let rules = serde_json::to_value(r.rules).expect("serializable");
    let holder = serde_json::to_value(r.fact_holder).expect("serializable");
    writeln!(out, "scenario: {}", r.scenario).unwrap();
    writeln!(out, "rules: {} (fact holder: {})", rules.as_str().unwrap_or(""), holder.as_str().unwrap_or("")).unwrap();
    if let Some(s) = seed {
        writeln!(out, "seed: {s}").unwrap();
    }
    writeln!(out, "tolerance: {}", num(r.tolerance)).unwrap();
    match &r.exact {
        Some(t) => {
            writeln!(out, "exact:").unwrap();
            table(out, &r.names, t);
        }
        None => writeln!(out, "exact: too many histories").unwrap(),
    }
    if !r.pins.is_empty() {
        writeln!(out, "pinned reads:").unwrap();
        for p in &r.pins {
            writeln!(
                out,
                "  event {}: {} reads {}: overridden Born weight {}, impossible weight {}",
                p.event,
                p.reader,
                p.record,
                num(p.expected_discrepancy),
                num(p.impossible_weight)
            )
            .unwrap();
        }
    }
    if let Some(t) = &r.sampled {
        writeln!(out, "sampled (n = {}):", r.samples).unwrap();
        table(out, &r.names, t);
    }
}

fn check(out: &mut String, c: &ContradictionReport) {
    writeln!(out, "check: {}", c.check).unwrap();
    writeln!(out, "rules: {}", c.rules_compared.join(", ")).unwrap();
    if !c.parameters.is_empty() {
        writeln!(out, "parameters:").unwrap();
        for (k, v) in &c.parameters {
            let vs: Vec<String> = v.iter().map(|x| num(*x)).collect();
            writeln!(out, "  {k}: {}", vs.join(", ")).unwrap();
        }
    }
    writeln!(out, "findings:").unwrap();
    for f in &c.findings {
        writeln!(out, "  - {}", f.claim).unwrap();
        for p in &f.predictions {
            writeln!(out, "      {}: {}", p.rule, num(p.value)).unwrap();
        }
        writeln!(out, "      discrepancy: {}", num(f.discrepancy)).unwrap();
    }
    if let Some(s) = &c.search {
        writeln!(out, "search:").unwrap();
        writeln!(out, "  variables: {}", s.variables.join(", ")).unwrap();
        writeln!(out, "  domain: {}", s.domain_size).unwrap();
        writeln!(out, "  satisfying: {}", s.satisfying.len()).unwrap();
        for a in &s.satisfying {
            let vs: Vec<String> = a.iter().map(|x| x.to_string()).collect();
            writeln!(out, "    ({})", vs.join(", ")).unwrap();
        }
        if let Some(f) = &s.formal_product {
            writeln!(out, "  formal: ({})^2 = {}, product = {}", f.monomial.join(" "), f.square, f.value).unwrap();
        }
    }
    let verdict = serde_json::to_value(c.verdict).expect("serializable");
    writeln!(out, "verdict: {}", verdict.as_str().unwrap_or("")).unwrap();
    writeln!(out, "narrative: {}", c.narrative).unwrap();
}
