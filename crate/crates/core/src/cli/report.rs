use std::collections::BTreeMap;

use serde::Serialize;

use crate::checks::ContradictionReport;
use crate::interpret::{Branch, FactHolderPolicy, RuleKind};
use crate::qcore::Outcome;
use crate::scenario::Scenario;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Timing {
    pub elapsed_ms: f64,
}

/// Top-level machine-readable document; one per invocation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportEnvelope {
    pub tool: String,
    pub version: String,
    pub invocation: Vec<String>,
    pub seed: Option<u64>,
    pub results: Results,
    /// Present only with `--timing`, so default output is byte-stable.
    pub timing: Option<Timing>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Results {
    Parse(ParseReport),
    Run(RunReport),
    Check(ContradictionReport),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParseReport {
    pub scenario: String,
    pub subsystems: Vec<String>,
    pub agents: Vec<String>,
    pub observers: Vec<String>,
    pub events: usize,
    pub canonical: String,
}

impl ParseReport {
    pub fn new(s: &Scenario) -> Self {
        ParseReport {
            scenario: s.name.clone(),
            subsystems: s.layout.ids().into_iter().map(String::from).collect(),
            agents: s.agents.iter().map(|a| a.name.clone()).collect(),
            observers: s.observers.clone(),
            events: s.timeline.len(),
            canonical: s.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JointRow {
    pub values: Vec<String>,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Agreement {
    pub first: String,
    pub second: String,
    pub probability: f64,
}

/// Pinned reads of one event, aggregated over histories.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PinSummary {
    pub event: usize,
    pub reader: String,
    pub record: String,
    /// Expected Born weight overridden by the pin.
    pub expected_discrepancy: f64,
    /// Total weight of histories where the pinned value was impossible.
    pub impossible_weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub histories: usize,
    pub joint: Vec<JointRow>,
    pub marginals: BTreeMap<String, BTreeMap<String, f64>>,
    pub agreement: Vec<Agreement>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub scenario: String,
    pub rules: RuleKind,
    pub fact_holder: FactHolderPolicy,
    pub tolerance: f64,
    /// Facts and results in timeline order; columns of the joint table.
    pub names: Vec<String>,
    /// `None` when the history count exceeds the exact-enumeration limit.
    pub exact: Option<Table>,
    pub pins: Vec<PinSummary>,
    pub sampled: Option<Table>,
    pub samples: usize,
}

fn value_text(b: &Branch, n: &str) -> String {
    b.value(n).map_or_else(|| "-".into(), |o: Outcome| o.to_string())
}

/// Joint table, marginals and pairwise agreement of weighted histories.
pub fn tabulate(branches: &[(f64, &Branch)], names: &[String], tol: f64) -> Table {
    let mut joint: BTreeMap<Vec<Option<Outcome>>, (Vec<String>, f64)> = BTreeMap::new();
    let mut marginals: BTreeMap<String, BTreeMap<String, f64>> = BTreeMap::new();
    for (w, b) in branches {
        let key: Vec<Option<Outcome>> = names.iter().map(|n| b.value(n)).collect();
        let text: Vec<String> = names.iter().map(|n| value_text(b, n)).collect();
        joint.entry(key).or_insert((text, 0.0)).1 += w;
        for n in names {
            *marginals.entry(n.clone()).or_default().entry(value_text(b, n)).or_default() += w;
        }
    }
    let mut agreement = Vec::new();
    for (i, x) in names.iter().enumerate() {
        for y in &names[i + 1..] {
            let p = branches.iter().filter(|(_, b)| b.value(x) == b.value(y)).map(|(w, _)| w).sum();
            agreement.push(Agreement { first: x.clone(), second: y.clone(), probability: p });
        }
    }
    Table {
        histories: branches.len(),
        joint: joint
            .into_values()
            .filter(|(_, p)| *p > tol)
            .map(|(values, probability)| JointRow { values, probability })
            .collect(),
        marginals,
        agreement,
    }
}

impl Table {
    /// Divides every probability by `n`; used to turn counts into frequencies.
    pub fn per(mut self, n: f64) -> Self {
        for r in &mut self.joint {
            r.probability /= n;
        }
        for m in self.marginals.values_mut() {
            for p in m.values_mut() {
                *p /= n;
            }
        }
        for a in &mut self.agreement {
            a.probability /= n;
        }
        self
    }
}

pub fn pin_summaries(branches: &[Branch]) -> Vec<PinSummary> {
    let mut by_event: BTreeMap<usize, PinSummary> = BTreeMap::new();
    for b in branches {
        for f in &b.findings {
            let e = by_event.entry(f.event).or_insert_with(|| PinSummary {
                event: f.event,
                reader: f.reader.clone(),
                record: f.record.clone(),
                expected_discrepancy: 0.0,
                impossible_weight: 0.0,
            });
            e.expected_discrepancy += b.weight * f.discrepancy();
            if f.impossible {
                e.impossible_weight += b.weight;
            }
        }
    }
    by_event.into_values().collect()
}
