use std::collections::BTreeMap;

use serde::Serialize;

use super::{
    local_offsets, BasisSpec, Label, ObservableSpec, Outcome, QError, StateVector, C64, TOL,
    ZERO_PROB,
};

/// Probability per outcome. Every outcome of the measured observable is
/// present, including zero-probability ones.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct Distribution {
    probs: BTreeMap<Outcome, f64>,
}

impl Distribution {
    pub fn from_map(probs: BTreeMap<Outcome, f64>) -> Self {
        Distribution { probs }
    }

    pub fn prob(&self, o: &Outcome) -> f64 {
        self.probs.get(o).copied().unwrap_or(0.0)
    }

    /// Shorthand for single-label outcomes.
    pub fn prob_of(&self, l: impl Into<Label>) -> f64 {
        self.prob(&Outcome::single(l.into()))
    }

    pub fn total(&self) -> f64 {
        self.probs.values().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Outcome, &f64)> {
        self.probs.iter()
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Outcomes with probability above `tol`.
    pub fn support(&self, tol: f64) -> Vec<&Outcome> {
        self.probs.iter().filter(|(_, p)| **p > tol).map(|(o, _)| o).collect()
    }

    /// Total probability of outcomes satisfying `pred`.
    pub fn mass<F: Fn(&Outcome) -> bool>(&self, pred: F) -> f64 {
        self.probs.iter().filter(|(o, _)| pred(o)).map(|(_, p)| p).sum()
    }

    /// Outcome with the largest probability (first in order on ties).
    pub fn argmax(&self) -> Option<&Outcome> {
        let mut best: Option<(&Outcome, f64)> = None;
        for (o, p) in &self.probs {
            if best.map_or(true, |(_, bp)| *p > bp) {
                best = Some((o, *p));
            }
        }
        best.map(|(o, _)| o)
    }

    /// Largest entrywise difference over the union of both supports.
    pub fn max_abs_diff(&self, other: &Distribution) -> f64 {
        self.probs
            .keys()
            .chain(other.probs.keys())
            .map(|o| (self.prob(o) - other.prob(o)).abs())
            .fold(0.0, f64::max)
    }

    pub fn add(&mut self, o: Outcome, p: f64) {
        *self.probs.entry(o).or_insert(0.0) += p;
    }

    pub fn into_map(self) -> BTreeMap<Outcome, f64> {
        self.probs
    }
}

/// `⟨b_k|ψ⟩` restricted to the rest of the space, for every basis vector.
fn branch_amplitudes(s: &StateVector, basis: &BasisSpec) -> Result<(Vec<Vec<C64>>, Vec<usize>, Vec<usize>), QError> {
    let pos = s.layout().embed(basis.target())?;
    let (t, r) = local_offsets(&s.layout().dims(), &pos);
    let amps = s.amplitudes();
    let per = basis
        .vectors()
        .iter()
        .map(|v| {
            r.iter()
                .map(|&base| t.iter().zip(v).map(|(&ti, vi)| vi.conj() * amps[base + ti]).sum())
                .collect()
        })
        .collect();
    Ok((per, t, r))
}

fn check_normalized(s: &StateVector) -> Result<(), QError> {
    let n = s.norm_sqr();
    if (n - 1.0).abs() > TOL {
        return Err(QError::NotNormalized { norm_sqr: n });
    }
    Ok(())
}

/// Born-rule distribution of `m` on `s`; untested subsystems are marginalized.
pub fn born_distribution(s: &StateVector, m: &ObservableSpec) -> Result<Distribution, QError> {
    check_normalized(s)?;
    let (basis, raws) = m.joint_basis()?;
    let (per, _, _) = branch_amplitudes(s, &basis)?;
    let mut d = Distribution::default();
    for (amps, raw) in per.iter().zip(&raws) {
        let p: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        d.add(m.present(raw), p);
    }
    Ok(d)
}

/// Post-measurement state for `outcome`; zero-probability outcomes are an error.
pub fn project(s: &StateVector, m: &ObservableSpec, outcome: &Outcome) -> Result<StateVector, QError> {
    check_normalized(s)?;
    let (basis, raws) = m.joint_basis()?;
    let raw = m
        .raw_of(outcome)
        .ok_or_else(|| QError::UnknownLabel(outcome.to_string()))?;
    let k = raws.iter().position(|r| *r == raw).expect("raw outcome in joint basis");
    let (per, t, r) = branch_amplitudes(s, &basis)?;
    let coeffs = &per[k];
    let p: f64 = coeffs.iter().map(|a| a.norm_sqr()).sum();
    if p <= ZERO_PROB {
        return Err(QError::ZeroProbability(outcome.to_string()));
    }
    let scale = 1.0 / p.sqrt();
    let v = &basis.vectors()[k];
    let mut out = vec![C64::default(); s.amplitudes().len()];
    for (&base, a) in r.iter().zip(coeffs) {
        for (&ti, vi) in t.iter().zip(v) {
            out[base + ti] = vi * a * scale;
        }
    }
    Ok(StateVector::from_raw(s.layout().clone(), out))
}
