use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use super::{resolve_basis, resolve_state, BasisExpr, Event, ResolveError, Scenario};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagKind {
    DuplicateName,
    UnknownIdentifier,
    UnpreparedTarget,
    AlreadyPrepared,
    RecordNeverWritten,
    RecordOverwritten,
    NotOwner,
    BasisTargetMismatch,
    DimensionMismatch,
    UnnormalizedLiteral,
    DuplicateResult,
    ConcurrentWithoutMeasure,
    PartitionAfterAction,
}

impl DiagKind {
    pub fn reason(self) -> &'static str {
        match self {
            DiagKind::DuplicateName => "duplicate name",
            DiagKind::UnknownIdentifier => "unknown identifier",
            DiagKind::UnpreparedTarget => "unprepared target",
            DiagKind::AlreadyPrepared => "target already prepared or in use",
            DiagKind::RecordNeverWritten => "record never written",
            DiagKind::RecordOverwritten => "record would be overwritten",
            DiagKind::NotOwner => "record belongs to another agent",
            DiagKind::BasisTargetMismatch => "basis/target mismatch",
            DiagKind::DimensionMismatch => "dimension mismatch",
            DiagKind::UnnormalizedLiteral => "unnormalized state literal",
            DiagKind::DuplicateResult => "result name bound twice",
            DiagKind::ConcurrentWithoutMeasure => "concurrent marker must follow a measure",
            DiagKind::PartitionAfterAction => "partition member already acted",
        }
    }
}

/// A violated scenario invariant. `event` is `None` for declaration-level
/// problems.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostic {
    pub event: Option<usize>,
    pub kind: DiagKind,
    pub detail: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.event {
            Some(i) => write!(f, "event {i}: {}: {}", self.kind.reason(), self.detail),
            None => write!(f, "{}: {}", self.kind.reason(), self.detail),
        }
    }
}

struct Checker<'a> {
    s: &'a Scenario,
    out: Vec<Diagnostic>,
    prepared: BTreeSet<String>,
    touched: BTreeSet<String>,
    written: BTreeSet<String>,
    bound: BTreeSet<String>,
    acted: BTreeSet<String>,
}

impl<'a> Checker<'a> {
    fn push(&mut self, event: Option<usize>, kind: DiagKind, detail: impl Into<String>) {
        self.out.push(Diagnostic { event, kind, detail: detail.into() });
    }

    fn declarations(&mut self) {
        let mut names: BTreeMap<&str, &str> = BTreeMap::new();
        let mut claim = |this: &mut Self, name: &'a str, what: &'a str| {
            if let Some(prev) = names.insert(name, what) {
                this.push(None, DiagKind::DuplicateName, format!("`{name}` declared as {prev} and {what}"));
            }
        };
        for id in self.s.layout.ids() {
            claim(self, id, "subsystem");
        }
        for a in &self.s.agents {
            claim(self, &a.name, "agent");
        }
        for o in &self.s.observers {
            claim(self, o, "observer");
        }
        for a in &self.s.agents {
            for r in &a.records {
                if self.s.layout.dim_of(&r.id) != Some(r.dim) {
                    self.push(None, DiagKind::DimensionMismatch, format!("record `{}` not in layout with dimension {}", r.id, r.dim));
                    continue;
                }
                match resolve_basis(self.s, &r.pointer, &[r.id.as_str()]) {
                    Ok(b) if b.index_of(&r.init).is_none() => self.push(
                        None,
                        DiagKind::UnknownIdentifier,
                        format!("init label {} is not a pointer label of `{}`", r.init, r.id),
                    ),
                    Ok(_) => {}
                    Err(e) => self.basis_error(None, e),
                }
            }
        }
        let mut seen = BTreeSet::new();
        for (n, _) in &self.s.bases {
            if !seen.insert(n) {
                self.push(None, DiagKind::DuplicateName, format!("basis `{n}` defined twice"));
            }
        }
    }

    fn basis_error(&mut self, event: Option<usize>, e: ResolveError) {
        let kind = match e {
            ResolveError::UnknownBasis(_) => DiagKind::UnknownIdentifier,
            ResolveError::Unnormalized(_) => DiagKind::UnnormalizedLiteral,
            ResolveError::DimensionMismatch(_) => DiagKind::DimensionMismatch,
            ResolveError::Kernel(crate::qcore::QError::UnknownSubsystem(_)) => DiagKind::UnknownIdentifier,
            _ => DiagKind::BasisTargetMismatch,
        };
        let detail = match e {
            ResolveError::Unnormalized(n) => format!("squared norm {n}"),
            ResolveError::DimensionMismatch(d) | ResolveError::BasisTargetMismatch(d) => d,
            other => other.to_string(),
        };
        self.push(event, kind, detail);
    }

    /// Reports unknown or unprepared targets; true when all are known.
    fn targets_ready(&mut self, i: usize, targets: &[String]) -> bool {
        let mut ok = true;
        for t in targets {
            if self.s.layout.position(t).is_none() {
                self.push(Some(i), DiagKind::UnknownIdentifier, format!("subsystem `{t}`"));
                ok = false;
            } else if !self.s.is_record(t) && !self.prepared.contains(t) {
                self.push(Some(i), DiagKind::UnpreparedTarget, format!("`{t}`"));
            }
        }
        ok
    }

    fn actor(&mut self, i: usize, name: &str) -> bool {
        if self.s.actors().contains(&name) {
            true
        } else {
            self.push(Some(i), DiagKind::UnknownIdentifier, format!("agent or observer `{name}`"));
            false
        }
    }

    fn bind(&mut self, i: usize, name: &str) {
        if !self.bound.insert(name.to_string()) {
            self.push(Some(i), DiagKind::DuplicateResult, format!("`{name}`"));
        }
    }

    fn check_basis(&mut self, i: usize, b: &BasisExpr, targets: &[String]) {
        if let Err(e) = resolve_basis(self.s, b, targets) {
            self.basis_error(Some(i), e);
        }
    }

    fn event(&mut self, i: usize, e: &Event) {
        match e {
            Event::Prepare { state, targets } => {
                let mut known = true;
                for t in targets {
                    if self.s.layout.position(t).is_none() {
                        self.push(Some(i), DiagKind::UnknownIdentifier, format!("subsystem `{t}`"));
                        known = false;
                    } else if self.s.is_record(t) {
                        self.push(Some(i), DiagKind::AlreadyPrepared, format!("record `{t}` starts in its init state"));
                    } else if self.prepared.contains(t) || self.touched.contains(t) {
                        self.push(Some(i), DiagKind::AlreadyPrepared, format!("`{t}`"));
                    }
                }
                if known {
                    match self.s.layout.select(targets) {
                        Ok(sub) => {
                            if let Err(err) = resolve_state(state, &sub) {
                                self.basis_error(Some(i), err);
                            }
                        }
                        Err(err) => self.basis_error(Some(i), err.into()),
                    }
                }
                self.prepared.extend(targets.iter().cloned());
            }
            Event::Interact { agent, targets, basis, record, fact } => {
                let has_agent = self.actor(i, agent);
                if has_agent && self.s.agent(agent).is_none() {
                    self.push(Some(i), DiagKind::UnknownIdentifier, format!("`{agent}` is an observer, not an agent"));
                }
                if self.targets_ready(i, targets) {
                    self.check_basis(i, basis, targets);
                }
                for t in targets {
                    if self.written.contains(t) {
                        self.push(Some(i), DiagKind::RecordOverwritten, format!("`{t}` already holds a fact"));
                    }
                }
                match self.s.record(record) {
                    None => self.push(Some(i), DiagKind::UnknownIdentifier, format!("record `{record}`")),
                    Some((owner, _)) => {
                        if owner.name != *agent {
                            self.push(Some(i), DiagKind::NotOwner, format!("`{record}` belongs to `{}`", owner.name));
                        }
                        if targets.contains(record) {
                            self.push(Some(i), DiagKind::RecordOverwritten, format!("`{record}` is also a target"));
                        }
                        if !self.written.insert(record.clone()) {
                            self.push(Some(i), DiagKind::RecordOverwritten, format!("`{record}` written twice"));
                        }
                    }
                }
                self.touched.extend(targets.iter().cloned());
                self.acted.insert(agent.clone());
                self.bind(i, fact);
            }
            Event::Measure { observer, factors, result, concurrent, .. } => {
                self.actor(i, observer);
                let mut all: BTreeSet<&String> = BTreeSet::new();
                for f in factors {
                    if self.targets_ready(i, &f.targets) {
                        self.check_basis(i, &f.basis, &f.targets);
                    }
                    for t in &f.targets {
                        if !all.insert(t) {
                            self.push(Some(i), DiagKind::BasisTargetMismatch, format!("`{t}` measured by two factors"));
                        }
                    }
                    self.touched.extend(f.targets.iter().cloned());
                }
                if *concurrent && !matches!(i.checked_sub(1).map(|p| &self.s.timeline[p]), Some(Event::Measure { .. })) {
                    self.push(Some(i), DiagKind::ConcurrentWithoutMeasure, "previous event is not a measure");
                }
                self.acted.insert(observer.clone());
                self.bind(i, result);
            }
            Event::ReadRecord { observer, record, basis, into, result } => {
                self.actor(i, observer);
                match self.s.record(record) {
                    None => self.push(Some(i), DiagKind::UnknownIdentifier, format!("record `{record}`")),
                    Some((_, decl)) => {
                        if !self.written.contains(record) {
                            self.push(Some(i), DiagKind::RecordNeverWritten, format!("`{record}`"));
                        }
                        let b = basis.as_ref().unwrap_or(&decl.pointer);
                        self.check_basis(i, b, std::slice::from_ref(record));
                        if let Some(into) = into {
                            match self.s.record(into) {
                                None => self.push(Some(i), DiagKind::UnknownIdentifier, format!("record `{into}`")),
                                Some((owner, _)) => {
                                    if owner.name != *observer {
                                        self.push(Some(i), DiagKind::NotOwner, format!("`{into}` belongs to `{}`", owner.name));
                                    }
                                    if into == record || !self.written.insert(into.clone()) {
                                        self.push(Some(i), DiagKind::RecordOverwritten, format!("`{into}` already written"));
                                    }
                                }
                            }
                        }
                    }
                }
                self.acted.insert(observer.clone());
                self.bind(i, result);
            }
            Event::DeclarePartition { name, groups } => {
                let mut seen = BTreeSet::new();
                let actors = self.s.actors();
                for m in groups.iter().flatten() {
                    let is_sub = self.s.layout.position(m).is_some();
                    let is_actor = actors.contains(&m.as_str());
                    if !is_sub && !is_actor {
                        self.push(Some(i), DiagKind::UnknownIdentifier, format!("partition member `{m}`"));
                    }
                    if !seen.insert(m) {
                        self.push(Some(i), DiagKind::DuplicateName, format!("`{m}` appears twice in partition `{name}`"));
                    }
                    if is_actor && self.acted.contains(m) {
                        self.push(Some(i), DiagKind::PartitionAfterAction, format!("`{m}`"));
                    }
                }
            }
        }
    }
}

/// All invariant violations of `s`; empty iff the scenario is well formed.
pub fn validate(s: &Scenario) -> Vec<Diagnostic> {
    let mut c = Checker {
        s,
        out: Vec::new(),
        prepared: BTreeSet::new(),
        touched: BTreeSet::new(),
        written: BTreeSet::new(),
        bound: BTreeSet::new(),
        acted: BTreeSet::new(),
    };
    c.declarations();
    for (i, e) in s.timeline.iter().enumerate() {
        c.event(i, e);
    }
    c.out
}
