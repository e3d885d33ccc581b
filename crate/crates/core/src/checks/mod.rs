//! Contradiction analyzers: readout against cross-perspective links, EPR
//! correlation under different partitions, and the three-party parity argument.

mod cpl;
mod epr;
mod ghz;
mod parity;

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::interpret::EngineError;
use crate::qcore::QError;
use crate::scenario::ResolveError;

pub use cpl::{cpl_probability_check, cpl_scenario};
pub use epr::{epr_correlation_check, epr_scenario};
pub use ghz::{ghz_check, ghz_context_scenario, ghz_scenario, ghz_state};
pub use parity::{formal_square, parity_search, AssignmentSearchResult, FormalProduct, Literal, ParityConstraint, MAX_VARIABLES};

/// A discrepancy above this is a finding.
pub const VERDICT_TOL: f64 = 1e-9;

/// Tolerance on the squared norm of user coefficients.
pub const COEFF_NORM_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CheckError {
    #[error("coefficients are not normalized (squared norm {0})")]
    Unnormalized(f64),
    #[error("need at least 2 coefficients, got {0}")]
    TooFewCoefficients(usize),
    #[error("index {index} out of range for {dim} coefficients")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("degenerate coefficients: {0}")]
    Degenerate(String),
    #[error("{0} variables exceed the search limit of {MAX_VARIABLES}")]
    TooManyVariables(usize),
    #[error("required product must be +1 or -1, got {0}")]
    BadRequired(i64),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Kernel(#[from] QError),
    #[error(transparent)]
    Resolve(#[from] ResolveError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Consistent,
    Contradiction,
    Ambiguity,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Prediction {
    pub rule: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Finding {
    pub claim: String,
    pub predictions: Vec<Prediction>,
    pub discrepancy: f64,
}

impl Finding {
    pub fn new(claim: impl Into<String>, predictions: &[(&str, f64)], discrepancy: f64) -> Self {
        Finding {
            claim: claim.into(),
            predictions: predictions.iter().map(|(r, v)| Prediction { rule: r.to_string(), value: *v }).collect(),
            discrepancy,
        }
    }

    pub fn prediction(&self, rule: &str) -> Option<f64> {
        self.predictions.iter().find(|p| p.rule == rule).map(|p| p.value)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContradictionReport {
    pub check: String,
    pub rules_compared: Vec<String>,
    /// Inputs as given and as used (e.g. probabilities and their square roots).
    pub parameters: BTreeMap<String, Vec<f64>>,
    pub findings: Vec<Finding>,
    pub verdict: Verdict,
    pub narrative: String,
    pub search: Option<AssignmentSearchResult>,
}

impl ContradictionReport {
    pub fn finding(&self, claim_prefix: &str) -> Option<&Finding> {
        self.findings.iter().find(|f| f.claim.starts_with(claim_prefix))
    }

    /// A contradiction verdict is backed by a finding above [`VERDICT_TOL`].
    pub fn is_well_formed(&self) -> bool {
        self.verdict != Verdict::Contradiction || self.findings.iter().any(|f| f.discrepancy > VERDICT_TOL)
    }
}

fn check_normalized(probs: impl Iterator<Item = f64>) -> Result<(), CheckError> {
    let n: f64 = probs.sum();
    if (n - 1.0).abs() > COEFF_NORM_TOL {
        return Err(CheckError::Unnormalized(n));
    }
    Ok(())
}

fn rules(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}
