use thiserror::Error;

use super::{BasisExpr, Scenario, StateExpr, LITERAL_NORM_TOL};
use crate::qcore::{c, BasisSpec, QError, SpaceLayout, StateVector, C64};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ResolveError {
    #[error("basis/target mismatch: {0}")]
    BasisTargetMismatch(String),
    #[error("unknown basis `{0}`")]
    UnknownBasis(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("unnormalized state literal (squared norm {0})")]
    Unnormalized(f64),
    #[error(transparent)]
    Kernel(#[from] QError),
}

/// Concrete basis for `expr` acting on `targets` of `scenario`.
pub fn resolve_basis<S: AsRef<str>>(
    scenario: &Scenario,
    expr: &BasisExpr,
    targets: &[S],
) -> Result<BasisSpec, ResolveError> {
    let target = scenario.layout.select(targets)?;
    resolve_on(scenario, expr, &target, 0)
}

fn resolve_on(
    scenario: &Scenario,
    expr: &BasisExpr,
    target: &SpaceLayout,
    depth: usize,
) -> Result<BasisSpec, ResolveError> {
    let ids = target.ids();
    let dims = target.dims();
    let one_qubit = |name: &str| -> Result<&str, ResolveError> {
        if dims != [2] {
            return Err(ResolveError::BasisTargetMismatch(format!(
                "{name} needs one qubit target, got {ids:?} with dimensions {dims:?}"
            )));
        }
        Ok(ids[0])
    };
    Ok(match expr {
        BasisExpr::Comp => {
            if dims.len() != 1 {
                return Err(ResolveError::BasisTargetMismatch(format!(
                    "comp needs exactly one target, got {ids:?}"
                )));
            }
            BasisSpec::computational(ids[0], dims[0])?
        }
        BasisExpr::Basis1 => BasisSpec::basis1(one_qubit("basis1")?)?,
        BasisExpr::Basis3 => BasisSpec::basis3(one_qubit("basis3")?)?,
        BasisExpr::Basis2 => {
            if dims != [2, 2] {
                return Err(ResolveError::BasisTargetMismatch(format!(
                    "basis2 needs a (system, record) qubit pair, got {ids:?} with dimensions {dims:?}"
                )));
            }
            BasisSpec::basis2(ids[0], ids[1])?
        }
        BasisExpr::Named(name) => {
            let inner = scenario
                .named_basis(name)
                .ok_or_else(|| ResolveError::UnknownBasis(name.clone()))?;
            if depth > 8 {
                return Err(ResolveError::UnknownBasis(format!("{name} (definition cycle)")));
            }
            resolve_on(scenario, inner, target, depth + 1)?
        }
        BasisExpr::Vectors(entries) => {
            let dim = target.total_dimension();
            if let Some((l, v)) = entries.iter().find(|(_, v)| v.len() != dim) {
                return Err(ResolveError::BasisTargetMismatch(format!(
                    "vector for label {l} has {} entries, target space has dimension {dim}",
                    v.len()
                )));
            }
            if entries.len() != dim {
                return Err(ResolveError::BasisTargetMismatch(format!(
                    "{} vectors given, target space has dimension {dim}",
                    entries.len()
                )));
            }
            BasisSpec::new(
                target.clone(),
                entries.iter().map(|(_, v)| v.clone()).collect(),
                entries.iter().map(|(l, _)| l.clone()).collect(),
            )?
        }
    })
}

/// Concrete state for `expr` on the sub-layout `target`.
pub fn resolve_state(expr: &StateExpr, target: &SpaceLayout) -> Result<StateVector, ResolveError> {
    let dims = target.dims();
    let total = target.total_dimension();
    let amps: Vec<C64> = match expr {
        StateExpr::Ghz => {
            if dims.len() < 2 || dims.iter().any(|&d| d != 2) {
                return Err(ResolveError::DimensionMismatch(format!(
                    "ghz needs at least two qubit targets, got dimensions {dims:?}"
                )));
            }
            let h = std::f64::consts::FRAC_1_SQRT_2;
            let mut a = vec![C64::default(); total];
            a[0] = c(h, 0.0);
            a[total - 1] = c(h, 0.0);
            a
        }
        StateExpr::Schmidt(coeffs) => {
            if dims.len() != 2 || coeffs.len() > dims[0].min(dims[1]) {
                return Err(ResolveError::DimensionMismatch(format!(
                    "schmidt with {} coefficients needs two targets of dimension >= {}, got {dims:?}",
                    coeffs.len(),
                    coeffs.len()
                )));
            }
            let mut a = vec![C64::default(); total];
            for (l, cl) in coeffs.iter().enumerate() {
                a[l * dims[1] + l] = c(*cl, 0.0);
            }
            a
        }
        StateExpr::Amplitudes(a) => {
            if a.len() != total {
                return Err(ResolveError::DimensionMismatch(format!(
                    "{} amplitudes given, target space has dimension {total}",
                    a.len()
                )));
            }
            a.clone()
        }
    };
    let n: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
    if (n - 1.0).abs() > LITERAL_NORM_TOL {
        return Err(ResolveError::Unnormalized(n));
    }
    // literals carry ~17 digits; renormalize so kernel tolerances hold exactly
    Ok(StateVector::normalized(target.clone(), amps)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ghz_preset_amplitudes() {
        let l = SpaceLayout::qubits(&["a", "b", "c"]).unwrap();
        let s = resolve_state(&StateExpr::Ghz, &l).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        for (i, a) in s.amplitudes().iter().enumerate() {
            let want = if i == 0 || i == 7 { h } else { 0.0 };
            assert!((a - c(want, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn schmidt_preset_form() {
        let l = SpaceLayout::qubits(&["p1", "p2"]).unwrap();
        let (c0, c1) = (0.3f64.sqrt(), 0.7f64.sqrt());
        let s = resolve_state(&StateExpr::Schmidt(vec![c0, c1]), &l).unwrap();
        let want = [c0, 0.0, 0.0, c1];
        for (a, w) in s.amplitudes().iter().zip(want) {
            assert!((a - c(w, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn unnormalized_literal() {
        let l = SpaceLayout::qubits(&["s"]).unwrap();
        let e = resolve_state(&StateExpr::Amplitudes(vec![c(1.0, 0.0), c(1.0, 0.0)]), &l);
        assert!(matches!(e, Err(ResolveError::Unnormalized(n)) if (n - 2.0).abs() < 1e-12));
    }
}
