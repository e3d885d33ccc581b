//! Declarative description of Wigner-friend experiments and the line-oriented
//! `.wfs` text format.
//!
//! A [`Scenario`] owns a [`SpaceLayout`] whose subsystems are either systems
//! (declared with `system`) or agent records (declared with `agent .. record`).
//! Records start in their `init` pointer state; systems start in their first
//! computational state and must be `prepare`d before anything touches them.

mod lexer;
mod parser;
mod printer;
mod resolve;
mod validate;

use std::fmt;

use crate::qcore::{Label, SpaceLayout, C64};

pub use parser::{parse, parse_unchecked, ParseError, ParseFailure, SourceMap};
pub(crate) use printer::format_basis;
pub use printer::{format_complex, format_real, print};
pub use resolve::{resolve_basis, resolve_state, ResolveError};
pub use validate::{validate, DiagKind, Diagnostic};

/// Tolerance on the norm of a state literal.
pub const LITERAL_NORM_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct RecordDecl {
    pub id: String,
    pub dim: usize,
    pub pointer: BasisExpr,
    pub init: Label,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgentDecl {
    pub name: String,
    pub records: Vec<RecordDecl>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum BasisExpr {
    /// Computational basis of one subsystem, labels `0..d`.
    Comp,
    /// Qubit computational basis, labels `+1, -1`.
    Basis1,
    /// Qubit basis `(|+1⟩ ± i|−1⟩)/√2`, labels `+1, -1`.
    Basis3,
    /// Two-qubit (system, record) basis built from basis-3 copy states.
    Basis2,
    Named(String),
    /// Explicit labelled vectors over the joint target space.
    Vectors(Vec<(Label, Vec<C64>)>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum StateExpr {
    /// `(|0…0⟩ + |1…1⟩)/√2` over qubit targets.
    Ghz,
    /// `Σ_l c_l |l⟩|l⟩` over two targets.
    Schmidt(Vec<f64>),
    Amplitudes(Vec<C64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasureFactor {
    pub targets: Vec<String>,
    pub basis: BasisExpr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Encoding {
    /// `±1` tuples to the integer `Σ 2^{n−1} b_n`.
    Bits,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Event {
    Prepare {
        state: StateExpr,
        targets: Vec<String>,
    },
    /// Pre-measurement of `targets` in `basis` by `agent`, copied into `record`;
    /// produces the relative fact `fact`.
    Interact {
        agent: String,
        targets: Vec<String>,
        basis: BasisExpr,
        record: String,
        fact: String,
    },
    Measure {
        observer: String,
        factors: Vec<MeasureFactor>,
        single: bool,
        encoding: Option<Encoding>,
        result: String,
        concurrent: bool,
    },
    /// Read of an agent record in `basis` (default: its pointer basis),
    /// optionally through a pre-measurement into the reader's own record.
    ReadRecord {
        observer: String,
        record: String,
        basis: Option<BasisExpr>,
        into: Option<String>,
        result: String,
    },
    DeclarePartition {
        name: String,
        groups: Vec<Vec<String>>,
    },
}

impl Event {
    pub fn kind(&self) -> &'static str {
        match self {
            Event::Prepare { .. } => "prepare",
            Event::Interact { .. } => "interact",
            Event::Measure { .. } => "measure",
            Event::ReadRecord { .. } => "read",
            Event::DeclarePartition { .. } => "partition",
        }
    }

    /// Name bound by this event, if any.
    pub fn binds(&self) -> Option<&str> {
        match self {
            Event::Interact { fact, .. } => Some(fact),
            Event::Measure { result, .. } | Event::ReadRecord { result, .. } => Some(result),
            _ => None,
        }
    }

    /// The agent or observer acting in this event.
    pub fn actor(&self) -> Option<&str> {
        match self {
            Event::Interact { agent, .. } => Some(agent),
            Event::Measure { observer, .. } | Event::ReadRecord { observer, .. } => Some(observer),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub layout: SpaceLayout,
    pub agents: Vec<AgentDecl>,
    pub observers: Vec<String>,
    pub bases: Vec<(String, BasisExpr)>,
    pub timeline: Vec<Event>,
}

impl Scenario {
    pub fn agent(&self, name: &str) -> Option<&AgentDecl> {
        self.agents.iter().find(|a| a.name == name)
    }

    /// The record declaration for `id` and the agent owning it.
    pub fn record(&self, id: &str) -> Option<(&AgentDecl, &RecordDecl)> {
        self.agents
            .iter()
            .find_map(|a| a.records.iter().find(|r| r.id == id).map(|r| (a, r)))
    }

    pub fn is_record(&self, id: &str) -> bool {
        self.record(id).is_some()
    }

    /// Ids of layout entries that are systems (not records).
    pub fn systems(&self) -> Vec<&str> {
        self.layout.ids().into_iter().filter(|id| !self.is_record(id)).collect()
    }

    /// Agents and observers, agents first.
    pub fn actors(&self) -> Vec<&str> {
        self.agents
            .iter()
            .map(|a| a.name.as_str())
            .chain(self.observers.iter().map(String::as_str))
            .collect()
    }

    pub fn named_basis(&self, name: &str) -> Option<&BasisExpr> {
        self.bases.iter().find(|(n, _)| n == name).map(|(_, b)| b)
    }

    /// Index of the event binding `name`.
    pub fn binding_event(&self, name: &str) -> Option<usize> {
        self.timeline.iter().position(|e| e.binds() == Some(name))
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print(self))
    }
}

/// Incremental construction of a [`Scenario`] in code.
#[derive(Debug, Clone)]
pub struct ScenarioBuilder {
    name: String,
    subsystems: Vec<(String, usize)>,
    agents: Vec<AgentDecl>,
    observers: Vec<String>,
    bases: Vec<(String, BasisExpr)>,
    timeline: Vec<Event>,
}

impl ScenarioBuilder {
    pub fn new(name: impl Into<String>) -> Self {
        ScenarioBuilder {
            name: name.into(),
            subsystems: Vec::new(),
            agents: Vec::new(),
            observers: Vec::new(),
            bases: Vec::new(),
            timeline: Vec::new(),
        }
    }

    pub fn system(mut self, id: &str, dim: usize) -> Self {
        self.subsystems.push((id.into(), dim));
        self
    }

    pub fn agent(mut self, name: &str) -> Self {
        if !self.agents.iter().any(|a| a.name == name) {
            self.agents.push(AgentDecl { name: name.into(), records: Vec::new() });
        }
        self
    }

    pub fn record(mut self, agent: &str, id: &str, dim: usize, pointer: BasisExpr, init: Label) -> Self {
        self = self.agent(agent);
        self.subsystems.push((id.into(), dim));
        let a = self.agents.iter_mut().find(|a| a.name == agent).expect("agent just added");
        a.records.push(RecordDecl { id: id.into(), dim, pointer, init });
        self
    }

    pub fn observer(mut self, name: &str) -> Self {
        self.observers.push(name.into());
        self
    }

    pub fn basis(mut self, name: &str, expr: BasisExpr) -> Self {
        self.bases.push((name.into(), expr));
        self
    }

    pub fn event(mut self, e: Event) -> Self {
        self.timeline.push(e);
        self
    }

    pub fn prepare(self, state: StateExpr, targets: &[&str]) -> Self {
        self.event(Event::Prepare { state, targets: strings(targets) })
    }

    pub fn interact(self, agent: &str, targets: &[&str], basis: BasisExpr, record: &str, fact: &str) -> Self {
        self.event(Event::Interact {
            agent: agent.into(),
            targets: strings(targets),
            basis,
            record: record.into(),
            fact: fact.into(),
        })
    }

    pub fn measure(self, observer: &str, targets: &[&str], basis: BasisExpr, result: &str) -> Self {
        self.event(Event::Measure {
            observer: observer.into(),
            factors: vec![MeasureFactor { targets: strings(targets), basis }],
            single: false,
            encoding: None,
            result: result.into(),
            concurrent: false,
        })
    }

    pub fn read(self, observer: &str, record: &str, into: Option<&str>, result: &str) -> Self {
        self.event(Event::ReadRecord {
            observer: observer.into(),
            record: record.into(),
            basis: None,
            into: into.map(String::from),
            result: result.into(),
        })
    }

    pub fn partition(self, name: &str, groups: &[&[&str]]) -> Self {
        self.event(Event::DeclarePartition {
            name: name.into(),
            groups: groups.iter().map(|g| strings(g)).collect(),
        })
    }

    /// Fails only if the subsystem list violates the layout invariants.
    pub fn build(self) -> Result<Scenario, crate::qcore::QError> {
        Ok(Scenario {
            name: self.name,
            layout: SpaceLayout::new(self.subsystems)?,
            agents: self.agents,
            observers: self.observers,
            bases: self.bases,
            timeline: self.timeline,
        })
    }
}

fn strings(xs: &[&str]) -> Vec<String> {
    xs.iter().map(|s| s.to_string()).collect()
}
