use std::collections::BTreeMap;

use rand::Rng;

use super::{
    Branch, EngineError, FactHolderPolicy, LedgerEntry, PerspectiveKind, PerspectiveState,
    PinFinding, RelativeFactLedger, RuleKind, RuleSet, MAX_BRANCHES,
};
use crate::qcore::{
    apply_local, born_distribution, build_premeasurement, local_offsets, project, tensor_states,
    BasisSpec, Composition, DensityMatrix, Factor, Label, ObservableSpec, Outcome, StateVector,
    Unitary, C64, TOL, ZERO_PROB,
};
use crate::scenario::{format_basis, resolve_basis, resolve_state, Encoding, Event, Scenario};

/// Rays closer than this are one pure perspective.
const SAME_RAY: f64 = 1e-10;

/// Overrides of the pinned value's Born weight below this are not findings.
const PIN_EXACT: f64 = 1e-12;

#[derive(Debug, Clone)]
struct Holder {
    state: StateVector,
    knowledge: Vec<String>,
    consistent: bool,
}

#[derive(Debug, Clone)]
pub(crate) struct Trace {
    holders: Vec<Holder>,
    pub(crate) ledger: RelativeFactLedger,
    pub(crate) outcomes: BTreeMap<String, Outcome>,
    /// Pointer label each written record was copied into.
    written: BTreeMap<String, Label>,
    pub(crate) findings: Vec<PinFinding>,
    pub(crate) weight: f64,
}

impl Trace {
    pub(crate) fn into_branch(self) -> Branch {
        Branch { weight: self.weight, ledger: self.ledger, outcomes: self.outcomes, findings: self.findings }
    }
}

enum Step {
    Prepare {
        psi: StateVector,
        positions: Vec<usize>,
    },
    Interact {
        agent: String,
        targets: Vec<String>,
        record: String,
        fact: String,
        observable: String,
        copy: Unitary,
        measured: ObservableSpec,
        basis: BasisSpec,
        pointer: BasisSpec,
    },
    Measure {
        observer: String,
        result: String,
        obs: ObservableSpec,
    },
    Read {
        observer: String,
        record: String,
        result: String,
        obs: ObservableSpec,
        copy: Option<Unitary>,
        pinnable: bool,
    },
    Partition,
}

pub(crate) struct Engine {
    rules: RuleSet,
    holder_of: BTreeMap<String, usize>,
    initial: StateVector,
    holders: usize,
    steps: Vec<Step>,
}

fn holder_map(s: &Scenario, kind: RuleKind) -> (BTreeMap<String, usize>, usize) {
    let actors = s.actors();
    if kind == RuleKind::Orthodox {
        return (actors.iter().map(|a| (a.to_string(), 0)).collect(), 1);
    }
    let mut parent: Vec<usize> = (0..actors.len()).collect();
    fn root(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    let idx = |name: &str| actors.iter().position(|a| *a == name);
    for e in &s.timeline {
        if let Event::DeclarePartition { groups, .. } = e {
            for g in groups {
                let members: Vec<usize> = g.iter().filter_map(|m| idx(m)).collect();
                for w in members.windows(2) {
                    let (a, b) = (root(&mut parent, w[0]), root(&mut parent, w[1]));
                    parent[b] = a;
                }
            }
        }
    }
    let mut slot: BTreeMap<usize, usize> = BTreeMap::new();
    let mut map = BTreeMap::new();
    for (i, a) in actors.iter().enumerate() {
        let r = root(&mut parent, i);
        let n = slot.len();
        let h = *slot.entry(r).or_insert(n);
        map.insert(a.to_string(), h);
    }
    (map, slot.len())
}

fn initial_state(s: &Scenario) -> Result<StateVector, EngineError> {
    let mut parts = Vec::new();
    for sub in s.layout.subsystems() {
        let one = s.layout.select(&[sub.id.as_str()])?;
        let v = match s.record(&sub.id) {
            Some((_, r)) => {
                let p = resolve_basis(s, &r.pointer, &[sub.id.as_str()])?;
                let k = p.index_of(&r.init).ok_or_else(|| {
                    crate::qcore::QError::UnknownLabel(r.init.to_string())
                })?;
                StateVector::new(one, p.vectors()[k].clone())?
            }
            None => StateVector::basis_state(one, &[0])?,
        };
        parts.push(v);
    }
    let refs: Vec<&StateVector> = parts.iter().collect();
    Ok(tensor_states(&refs)?)
}

/// Replaces the all-zero state of `positions` by `psi`.
fn prepare_into(state: &StateVector, psi: &StateVector, positions: &[usize]) -> StateVector {
    let (t, r) = local_offsets(&state.layout().dims(), positions);
    let old = state.amplitudes();
    let mut out = vec![C64::default(); old.len()];
    for &base in &r {
        let a = old[base];
        for (ti, p) in t.iter().zip(psi.amplitudes()) {
            out[base + ti] = p * a;
        }
    }
    StateVector::normalized(state.layout().clone(), out).expect("prepared state has unit norm")
}

impl Engine {
    pub(crate) fn compile(s: &Scenario, rules: RuleSet) -> Result<Engine, EngineError> {
        let (holder_of, holders) = holder_map(s, rules.kind);
        let mut steps = Vec::with_capacity(s.timeline.len());
        let mut last_measure: Option<(usize, ObservableSpec)> = None;
        for (i, e) in s.timeline.iter().enumerate() {
            let step = match e {
                Event::Prepare { state, targets } => {
                    let target = s.layout.select(targets)?;
                    Step::Prepare { psi: resolve_state(state, &target)?, positions: s.layout.positions(targets)? }
                }
                Event::Interact { agent, targets, basis, record, fact } => {
                    let (_, decl) = s.record(record).expect("validated record");
                    let b = resolve_basis(s, basis, targets)?;
                    let pointer = resolve_basis(s, &decl.pointer, &[record.as_str()])?;
                    let copy = build_premeasurement(&b, &pointer, &decl.init)?;
                    Step::Interact {
                        agent: agent.clone(),
                        targets: targets.clone(),
                        record: record.clone(),
                        fact: fact.clone(),
                        observable: format!("{} in {}", targets.join(","), format_basis(basis)),
                        copy,
                        measured: ObservableSpec::from_basis(b.clone()),
                        basis: b,
                        pointer,
                    }
                }
                Event::Measure { observer, factors, single, encoding, result, concurrent } => {
                    let fs = factors
                        .iter()
                        .map(|f| resolve_basis(s, &f.basis, &f.targets).map(Factor::new))
                        .collect::<Result<Vec<_>, _>>()?;
                    let comp = if *single { Composition::Single } else { Composition::Product };
                    let mut obs = ObservableSpec::new(fs, comp)?;
                    if let Some(Encoding::Bits) = encoding {
                        obs = obs.with_bit_encoding()?;
                    }
                    if *concurrent {
                        if let Some((j, prev)) = &last_measure {
                            if !obs.commutes_with(prev)? {
                                return Err(EngineError::NonCommuting { event: i, previous: *j });
                            }
                        }
                    }
                    last_measure = Some((i, obs.clone()));
                    Step::Measure { observer: observer.clone(), result: result.clone(), obs }
                }
                Event::ReadRecord { observer, record, basis, into, result } => {
                    let (_, decl) = s.record(record).expect("validated record");
                    let pointer = resolve_basis(s, &decl.pointer, &[record.as_str()])?;
                    let read = match basis {
                        Some(b) => resolve_basis(s, b, &[record.as_str()])?,
                        None => pointer.clone(),
                    };
                    let pinnable = read.approx_eq(&pointer, TOL);
                    let copy = match into {
                        Some(mine) => {
                            let (_, own) = s.record(mine).expect("validated record");
                            let p = resolve_basis(s, &own.pointer, &[mine.as_str()])?;
                            Some(build_premeasurement(&read, &p, &own.init)?)
                        }
                        None => None,
                    };
                    Step::Read {
                        observer: observer.clone(),
                        record: record.clone(),
                        result: result.clone(),
                        obs: ObservableSpec::from_basis(read),
                        copy,
                        pinnable,
                    }
                }
                Event::DeclarePartition { .. } => Step::Partition,
            };
            steps.push(step);
        }
        Ok(Engine { rules, holder_of, initial: initial_state(s)?, holders, steps })
    }

    fn start(&self) -> Trace {
        let h = Holder { state: self.initial.clone(), knowledge: Vec::new(), consistent: true };
        Trace {
            holders: vec![h; self.holders],
            ledger: RelativeFactLedger::default(),
            outcomes: BTreeMap::new(),
            written: BTreeMap::new(),
            findings: Vec::new(),
            weight: 1.0,
        }
    }

    fn holder(&self, actor: &str) -> usize {
        self.holder_of[actor]
    }

    /// Applies the deterministic part of event `i`. Returns the outcomes
    /// still to be chosen, with their probabilities, for branching events.
    fn advance(&self, i: usize, t: &mut Trace) -> Result<Option<Vec<(Outcome, f64)>>, EngineError> {
        match &self.steps[i] {
            Step::Prepare { psi, positions } => {
                for h in &mut t.holders {
                    h.state = prepare_into(&h.state, psi, positions);
                }
                Ok(None)
            }
            Step::Interact { agent, copy, measured, .. } => {
                for h in &mut t.holders {
                    h.state = apply_local(copy, &h.state)?;
                }
                self.outcomes(t, agent, measured).map(Some)
            }
            Step::Measure { observer, obs, .. } => self.outcomes(t, observer, obs).map(Some),
            Step::Read { observer, record, result, obs, copy, pinnable } => {
                if let Some(u) = copy {
                    for h in &mut t.holders {
                        h.state = apply_local(u, &h.state)?;
                    }
                }
                if self.rules.kind != RuleKind::Rqm5Cpl || !pinnable {
                    return self.outcomes(t, observer, obs).map(Some);
                }
                let pinned = t.written[record].clone();
                let o = Outcome::single(pinned.clone());
                let k = self.holder(observer);
                let p = born_distribution(&t.holders[k].state, obs)?.prob(&o);
                let impossible = p <= ZERO_PROB;
                let h = &mut t.holders[k];
                if impossible {
                    h.consistent = false;
                } else {
                    h.state = project(&h.state, obs, &o)?;
                }
                h.knowledge.push(result.clone());
                if impossible || 1.0 - p > PIN_EXACT {
                    t.findings.push(PinFinding {
                        event: i,
                        reader: observer.clone(),
                        record: record.clone(),
                        pinned,
                        born_probability: p,
                        impossible,
                    });
                }
                t.outcomes.insert(result.clone(), o);
                Ok(None)
            }
            Step::Partition => Ok(None),
        }
    }

    fn outcomes(&self, t: &Trace, actor: &str, obs: &ObservableSpec) -> Result<Vec<(Outcome, f64)>, EngineError> {
        let d = born_distribution(&t.holders[self.holder(actor)].state, obs)?;
        Ok(d.iter().filter(|(_, p)| **p > ZERO_PROB).map(|(o, p)| (o.clone(), *p)).collect())
    }

    /// Commits outcome `o` of the branching event `i`.
    fn settle(&self, i: usize, t: &mut Trace, o: &Outcome) -> Result<(), EngineError> {
        match &self.steps[i] {
            Step::Interact { agent, targets, record, fact, observable, measured, basis, pointer, .. } => {
                let h = &mut t.holders[self.holder(agent)];
                h.state = project(&h.state, measured, o)?;
                h.knowledge.push(fact.clone());
                let label = o.0[0].clone();
                let j = basis.index_of(&label).expect("outcome of its own basis");
                t.written.insert(record.clone(), pointer.labels()[j].clone());
                let entry = LedgerEntry {
                    event: i,
                    holder: agent.clone(),
                    observable: observable.clone(),
                    fact: fact.clone(),
                    outcome: label,
                };
                if self.rules.fact_holder == FactHolderPolicy::BothParties {
                    let mut other = entry.clone();
                    other.holder = targets.join(",");
                    t.ledger.push(entry)?;
                    t.ledger.push(other)?;
                } else {
                    t.ledger.push(entry)?;
                }
            }
            Step::Measure { observer, result, obs } | Step::Read { observer, result, obs, .. } => {
                let h = &mut t.holders[self.holder(observer)];
                h.state = project(&h.state, obs, o)?;
                h.knowledge.push(result.clone());
                t.outcomes.insert(result.clone(), o.clone());
            }
            Step::Prepare { .. } | Step::Partition => unreachable!("event {i} does not branch"),
        }
        Ok(())
    }

    /// All histories through the first `upto` events.
    pub(crate) fn enumerate(&self, upto: usize) -> Result<Vec<Trace>, EngineError> {
        let mut live = vec![self.start()];
        for i in 0..upto {
            let mut next = Vec::with_capacity(live.len());
            for mut t in live {
                match self.advance(i, &mut t)? {
                    None => next.push(t),
                    Some(outs) => {
                        for (o, p) in &outs {
                            let mut c = t.clone();
                            self.settle(i, &mut c, o)?;
                            c.weight *= p;
                            next.push(c);
                        }
                    }
                }
                if next.len() > MAX_BRANCHES {
                    return Err(EngineError::TooManyBranches);
                }
            }
            live = next;
        }
        Ok(live)
    }

    /// One history through the first `upto` events; one uniform draw per
    /// branching event.
    pub(crate) fn sample<R: Rng>(&self, upto: usize, rng: &mut R) -> Result<Trace, EngineError> {
        let mut t = self.start();
        for i in 0..upto {
            let Some(outs) = self.advance(i, &mut t)? else { continue };
            let total: f64 = outs.iter().map(|(_, p)| p).sum();
            let u = rng.gen::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = outs.len() - 1;
            for (j, (_, p)) in outs.iter().enumerate() {
                acc += p;
                if u < acc {
                    pick = j;
                    break;
                }
            }
            let (o, p) = &outs[pick];
            self.settle(i, &mut t, o)?;
            t.weight *= p;
        }
        Ok(t)
    }

    /// Weighted mixture of `actor`'s perspective over `traces`.
    pub(crate) fn perspective_of(
        &self,
        traces: &[(f64, &Trace)],
        actor: &str,
    ) -> Result<PerspectiveState, EngineError> {
        let k = *self
            .holder_of
            .get(actor)
            .ok_or_else(|| EngineError::UnknownObserver(actor.into()))?;
        let total: f64 = traces.iter().map(|(w, _)| w).sum();
        let first = &traces[0].1.holders[k];
        let pure = traces.iter().all(|(_, t)| t.holders[k].state.same_ray(&first.state, SAME_RAY));
        let state = if pure {
            PerspectiveKind::Pure(first.state.clone())
        } else {
            let terms: Vec<(f64, &StateVector)> =
                traces.iter().map(|(w, t)| (w / total, &t.holders[k].state)).collect();
            PerspectiveKind::Mixed(DensityMatrix::mixture(&terms)?)
        };
        Ok(PerspectiveState {
            observer: actor.into(),
            state,
            knowledge: first.knowledge.clone(),
            consistent: traces.iter().all(|(_, t)| t.holders[k].consistent),
        })
    }
}
