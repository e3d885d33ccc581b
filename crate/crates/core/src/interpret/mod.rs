//! Execution of a [`Scenario`] under orthodox collapse, relative facts, or
//! relative facts with cross-perspective links.
//!
//! Under the relative-fact rules every agent and observer owns a perspective
//! state. Pre-measurements evolve all of them unitarily; an outcome collapses
//! only the perspective of whoever obtained it. A `partition` event merges the
//! perspectives of its groups' members. With cross-perspective links, reading
//! a record in its pointer basis returns the writer's ledger value; the Born
//! weight this overrides is reported as a [`PinFinding`].

mod engine;

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::qcore::{DensityMatrix, Distribution, Label, Outcome, QError, StateVector, ZERO_PROB};
use crate::scenario::{validate, Diagnostic, Event, ResolveError, Scenario};
use engine::Engine;

/// Exact enumeration is abandoned above this many live branches.
pub const MAX_BRANCHES: usize = 1_000_000;

/// Runs drawn by [`predicted_distribution`] when exact enumeration is too large.
pub const FALLBACK_SAMPLES: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RuleKind {
    Orthodox,
    Rqm5,
    #[serde(rename = "cpl")]
    Rqm5Cpl,
}

/// Who holds the relative fact produced by an interaction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FactHolderPolicy {
    #[default]
    InteractingOnly,
    /// The interacting agent and the interacted-with system(s).
    BothParties,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RuleSet {
    pub kind: RuleKind,
    pub fact_holder: FactHolderPolicy,
}

impl RuleSet {
    pub fn orthodox() -> Self {
        RuleSet { kind: RuleKind::Orthodox, fact_holder: FactHolderPolicy::default() }
    }

    pub fn rqm5() -> Self {
        RuleSet { kind: RuleKind::Rqm5, fact_holder: FactHolderPolicy::default() }
    }

    pub fn cpl() -> Self {
        RuleSet { kind: RuleKind::Rqm5Cpl, fact_holder: FactHolderPolicy::default() }
    }

    pub fn with_fact_holder(mut self, p: FactHolderPolicy) -> Self {
        self.fact_holder = p;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error("scenario is invalid: {}", .0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Diagnostic>),
    #[error(transparent)]
    Resolve(#[from] ResolveError),
    #[error(transparent)]
    Kernel(#[from] QError),
    #[error("event {event}: concurrent measurement does not commute with event {previous}")]
    NonCommuting { event: usize, previous: usize },
    #[error("ledger already holds an entry for event {event} and `{holder}`")]
    DuplicateLedgerEntry { event: usize, holder: String },
    #[error("unknown observer `{0}`")]
    UnknownObserver(String),
    #[error("no event binds `{0}`")]
    UnboundResult(String),
    #[error("`{result}` is not obtained by `{observer}`")]
    NotObservedBy { result: String, observer: String },
    #[error("cannot condition on `{0}`: no interaction writes it before the predicted result")]
    UnwrittenFact(String),
    #[error("conditioning has probability zero")]
    ImpossibleCondition,
    #[error("event index {index} is outside a timeline of {len} events")]
    EventOutOfRange { index: usize, len: usize },
    #[error("more than {MAX_BRANCHES} branches")]
    TooManyBranches,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LedgerEntry {
    pub event: usize,
    /// Agent (or, under [`FactHolderPolicy::BothParties`], system) holding the fact.
    pub holder: String,
    pub observable: String,
    pub fact: String,
    pub outcome: Label,
}

/// Relative facts in the order they were produced.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct RelativeFactLedger {
    entries: Vec<LedgerEntry>,
}

impl RelativeFactLedger {
    pub fn push(&mut self, e: LedgerEntry) -> Result<(), EngineError> {
        if self.entries.iter().any(|x| x.event == e.event && x.holder == e.holder) {
            return Err(EngineError::DuplicateLedgerEntry { event: e.event, holder: e.holder });
        }
        self.entries.push(e);
        Ok(())
    }

    pub fn entries(&self) -> &[LedgerEntry] {
        &self.entries
    }

    /// Value of `fact` as held by the interacting agent.
    pub fn value(&self, fact: &str) -> Option<&Label> {
        self.entries.iter().find(|e| e.fact == fact).map(|e| &e.outcome)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// A record read that was forced to the writer's ledger value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PinFinding {
    pub event: usize,
    pub reader: String,
    pub record: String,
    pub pinned: Label,
    /// Born probability of the pinned value on the reader's perspective.
    pub born_probability: f64,
    /// Set when the pinned value had probability zero; the perspective was
    /// then left unchanged.
    pub impossible: bool,
}

impl PinFinding {
    /// Born weight the pin overrides.
    pub fn discrepancy(&self) -> f64 {
        1.0 - self.born_probability
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PerspectiveKind {
    Pure(StateVector),
    Mixed(DensityMatrix),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerspectiveState {
    pub observer: String,
    pub state: PerspectiveKind,
    /// Facts and results the observer's perspective has been collapsed on.
    pub knowledge: Vec<String>,
    /// False once a pinned read with zero Born weight left it inconsistent.
    pub consistent: bool,
}

impl PerspectiveState {
    pub fn density(&self) -> DensityMatrix {
        match &self.state {
            PerspectiveKind::Pure(s) => DensityMatrix::pure(s),
            PerspectiveKind::Mixed(d) => d.clone(),
        }
    }

    pub fn as_pure(&self) -> Option<&StateVector> {
        match &self.state {
            PerspectiveKind::Pure(s) => Some(s),
            PerspectiveKind::Mixed(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub seed: u64,
    pub rules: RuleSet,
    pub ledger: RelativeFactLedger,
    /// Results of `measure` and `read` events.
    pub outcomes: BTreeMap<String, Outcome>,
    /// Final perspective of every agent and observer.
    pub perspectives: BTreeMap<String, PerspectiveState>,
    pub findings: Vec<PinFinding>,
    /// Product of the Born probabilities of the sampled outcomes.
    pub weight: f64,
}

/// One exactly enumerated history.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Branch {
    pub weight: f64,
    pub ledger: RelativeFactLedger,
    pub outcomes: BTreeMap<String, Outcome>,
    pub findings: Vec<PinFinding>,
}

impl Branch {
    /// Value bound to `name`: a stable result or an interacting agent's fact.
    pub fn value(&self, name: &str) -> Option<Outcome> {
        self.outcomes
            .get(name)
            .cloned()
            .or_else(|| self.ledger.value(name).cloned().map(Outcome::single))
    }
}

fn checked(s: &Scenario) -> Result<(), EngineError> {
    let d = validate(s);
    if d.is_empty() {
        Ok(())
    } else {
        Err(EngineError::Invalid(d))
    }
}

/// One sampled history, reproducible from `seed`.
pub fn run(s: &Scenario, r: RuleSet, seed: u64) -> Result<RunResult, EngineError> {
    checked(s)?;
    let e = Engine::compile(s, r)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let t = e.sample(s.timeline.len(), &mut rng)?;
    let perspectives = s
        .actors()
        .into_iter()
        .map(|a| e.perspective_of(&[(1.0, &t)], a).map(|p| (a.to_string(), p)))
        .collect::<Result<_, _>>()?;
    Ok(RunResult {
        seed,
        rules: r,
        ledger: t.ledger,
        outcomes: t.outcomes,
        perspectives,
        findings: t.findings,
        weight: t.weight,
    })
}

/// `n` independent runs from one seeded stream.
pub fn sample_runs(s: &Scenario, r: RuleSet, seed: u64, n: usize) -> Result<Vec<Branch>, EngineError> {
    checked(s)?;
    let e = Engine::compile(s, r)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| e.sample(s.timeline.len(), &mut rng).map(|t| t.into_branch()))
        .collect()
}

/// Every history with nonzero weight. Weights sum to one.
pub fn exact_branches(s: &Scenario, r: RuleSet) -> Result<Vec<Branch>, EngineError> {
    checked(s)?;
    let e = Engine::compile(s, r)?;
    Ok(e.enumerate(s.timeline.len())?.into_iter().map(|t| t.into_branch()).collect())
}

/// Exact distribution of `result` as obtained by `observer`, conditioned on
/// ledger facts. Conditioning is Bayesian over the enumerated histories.
pub fn predicted_distribution(
    s: &Scenario,
    r: RuleSet,
    observer: &str,
    result: &str,
    conditioning: &BTreeMap<String, Label>,
) -> Result<Distribution, EngineError> {
    checked(s)?;
    if !s.actors().contains(&observer) {
        return Err(EngineError::UnknownObserver(observer.into()));
    }
    let ev = s.binding_event(result).ok_or_else(|| EngineError::UnboundResult(result.into()))?;
    if s.timeline[ev].actor() != Some(observer) {
        return Err(EngineError::NotObservedBy { result: result.into(), observer: observer.into() });
    }
    for fact in conditioning.keys() {
        match s.binding_event(fact) {
            Some(j) if j < ev && matches!(s.timeline[j], Event::Interact { .. }) => {}
            _ => return Err(EngineError::UnwrittenFact(fact.clone())),
        }
    }
    let e = Engine::compile(s, r)?;
    let traces: Vec<(f64, Branch)> = match e.enumerate(ev + 1) {
        Ok(ts) => ts.into_iter().map(|t| (t.weight, t.into_branch())).collect(),
        Err(EngineError::TooManyBranches) => {
            let mut rng = ChaCha8Rng::seed_from_u64(0);
            let w = 1.0 / FALLBACK_SAMPLES as f64;
            (0..FALLBACK_SAMPLES)
                .map(|_| e.sample(ev + 1, &mut rng).map(|t| (w, t.into_branch())))
                .collect::<Result<_, _>>()?
        }
        Err(other) => return Err(other),
    };
    let mut d = Distribution::default();
    let mut total = 0.0;
    for (w, b) in &traces {
        let ok = conditioning.iter().all(|(f, v)| b.ledger.value(f) == Some(v));
        if !ok {
            continue;
        }
        let v = b.value(result).expect("result bound by its event");
        d.add(v, *w);
        total += w;
    }
    if total <= ZERO_PROB {
        return Err(EngineError::ImpossibleCondition);
    }
    let map = d.into_map().into_iter().map(|(k, p)| (k, p / total)).collect();
    Ok(Distribution::from_map(map))
}

/// State `observer` faces after event `after` (`None`: before any event),
/// averaged over the histories up to that point.
pub fn perspective(
    s: &Scenario,
    r: RuleSet,
    observer: &str,
    after: Option<usize>,
) -> Result<PerspectiveState, EngineError> {
    checked(s)?;
    if !s.actors().contains(&observer) {
        return Err(EngineError::UnknownObserver(observer.into()));
    }
    let upto = match after {
        None => 0,
        Some(i) if i < s.timeline.len() => i + 1,
        Some(i) => return Err(EngineError::EventOutOfRange { index: i, len: s.timeline.len() }),
    };
    let e = Engine::compile(s, r)?;
    let ts = e.enumerate(upto)?;
    let terms: Vec<(f64, &engine::Trace)> = ts.iter().map(|t| (t.weight, t)).collect();
    e.perspective_of(&terms, observer)
}

#[cfg(test)]
mod tests;
