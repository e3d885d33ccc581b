use nalgebra::DMatrix;

use super::{c, local_offsets, QError, StateVector, C64, SCHMIDT_DISTINCT};

/// `|ψ⟩ = Σ_k λ_k |L_k⟩|R_k⟩` with `λ` descending and strictly positive.
#[derive(Debug, Clone)]
pub struct SchmidtDecomposition {
    pub coefficients: Vec<f64>,
    pub left: Vec<StateVector>,
    pub right: Vec<StateVector>,
    /// All nonzero coefficients pairwise distinct (by more than 1e-8).
    pub unique: bool,
}

impl SchmidtDecomposition {
    /// Reassembles the state over the layout `left ⊗ right`.
    pub fn reconstruct(&self) -> Result<StateVector, QError> {
        let layout = self.left[0].layout().concat(self.right[0].layout())?;
        let mut amps = vec![C64::default(); layout.total_dimension()];
        for ((lam, l), r) in self.coefficients.iter().zip(&self.left).zip(&self.right) {
            let mut i = 0;
            for a in l.amplitudes() {
                for b in r.amplitudes() {
                    amps[i] += a * b * c(*lam, 0.0);
                    i += 1;
                }
            }
        }
        StateVector::new(layout, amps)
    }
}

/// Singular values below this are dropped from the decomposition.
const DROP: f64 = 1e-12;

pub fn schmidt<S: AsRef<str>>(s: &StateVector, left: &[S], right: &[S]) -> Result<SchmidtDecomposition, QError> {
    let layout = s.layout();
    let lpos = layout.positions(left)?;
    let rpos = layout.positions(right)?;
    if let Some(p) = lpos.iter().find(|p| rpos.contains(p)) {
        return Err(QError::OverlappingTargets(layout.subsystems()[*p].id.clone()));
    }
    if lpos.len() + rpos.len() != layout.len() {
        return Err(QError::LayoutMismatch("bipartition must cover every subsystem".into()));
    }
    if lpos.is_empty() || rpos.is_empty() {
        return Err(QError::EmptyKeep);
    }
    let dims = layout.dims();
    let (lo, _) = local_offsets(&dims, &lpos);
    let (ro, _) = local_offsets(&dims, &rpos);
    let amps = s.amplitudes();
    let m = DMatrix::from_fn(lo.len(), ro.len(), |i, j| amps[lo[i] + ro[j]]);
    let svd = m.svd(true, true);
    let u = svd.u.expect("requested U");
    let vt = svd.v_t.expect("requested V^T");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let llay = layout.select(left)?;
    let rlay = layout.select(right)?;
    let mut coefficients = Vec::new();
    let mut lvecs = Vec::new();
    let mut rvecs = Vec::new();
    for k in order {
        let lam = svd.singular_values[k];
        if lam <= DROP {
            continue;
        }
        coefficients.push(lam);
        lvecs.push(StateVector::normalized(llay.clone(), u.column(k).iter().copied().collect())?);
        rvecs.push(StateVector::normalized(rlay.clone(), vt.row(k).iter().copied().collect())?);
    }
    let unique = coefficients.windows(2).all(|w| (w[0] - w[1]).abs() > SCHMIDT_DISTINCT);
    Ok(SchmidtDecomposition { coefficients, left: lvecs, right: rvecs, unique })
}
