use nalgebra::DMatrix;

use super::{c, inner, local_offsets, norm_sqr, QError, SpaceLayout, C64, TOL};

/// Normalized pure state over a [`SpaceLayout`].
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    layout: SpaceLayout,
    amplitudes: Vec<C64>,
}

impl StateVector {
    pub fn new(layout: SpaceLayout, amplitudes: Vec<C64>) -> Result<Self, QError> {
        let expected = layout.total_dimension();
        if amplitudes.len() != expected {
            return Err(QError::LengthMismatch { expected, got: amplitudes.len() });
        }
        let n = norm_sqr(&amplitudes);
        if (n - 1.0).abs() > TOL {
            return Err(QError::NotNormalized { norm_sqr: n });
        }
        Ok(StateVector { layout, amplitudes })
    }

    /// Rescales `amplitudes` to unit norm. Fails only on the zero vector.
    pub fn normalized(layout: SpaceLayout, mut amplitudes: Vec<C64>) -> Result<Self, QError> {
        let expected = layout.total_dimension();
        if amplitudes.len() != expected {
            return Err(QError::LengthMismatch { expected, got: amplitudes.len() });
        }
        let n = norm_sqr(&amplitudes);
        if n <= f64::MIN_POSITIVE {
            return Err(QError::NotNormalized { norm_sqr: n });
        }
        let s = 1.0 / n.sqrt();
        amplitudes.iter_mut().for_each(|a| *a *= s);
        Ok(StateVector { layout, amplitudes })
    }

    /// Computational basis state; `digits[i]` indexes subsystem `i`.
    pub fn basis_state(layout: SpaceLayout, digits: &[usize]) -> Result<Self, QError> {
        let dims = layout.dims();
        if digits.len() != dims.len() {
            return Err(QError::LengthMismatch { expected: dims.len(), got: digits.len() });
        }
        let mut idx = 0;
        for (d, &k) in digits.iter().zip(&dims) {
            if *d >= k {
                return Err(QError::LayoutMismatch(format!("digit {d} out of range {k}")));
            }
            idx = idx * k + d;
        }
        let mut amps = vec![C64::default(); layout.total_dimension()];
        amps[idx] = c(1.0, 0.0);
        Ok(StateVector { layout, amplitudes: amps })
    }

    /// Linear combination `Σ w_k |ψ_k⟩` over a common layout; the result must
    /// already be normalized.
    pub fn superpose(terms: &[(C64, &StateVector)]) -> Result<Self, QError> {
        let first = terms
            .first()
            .ok_or(QError::LengthMismatch { expected: 1, got: 0 })?;
        let layout = first.1.layout.clone();
        let mut amps = vec![C64::default(); layout.total_dimension()];
        for (w, s) in terms {
            if s.layout != layout {
                return Err(QError::LayoutMismatch("superposed states differ in layout".into()));
            }
            for (a, b) in amps.iter_mut().zip(&s.amplitudes) {
                *a += w * b;
            }
        }
        StateVector::new(layout, amps)
    }

    pub fn layout(&self) -> &SpaceLayout {
        &self.layout
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        norm_sqr(&self.amplitudes)
    }

    pub fn inner(&self, other: &StateVector) -> C64 {
        inner(&self.amplitudes, &other.amplitudes)
    }

    /// Largest entrywise distance to `other`.
    pub fn distance(&self, other: &StateVector) -> f64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Equal up to a global phase, within `tol` entrywise.
    pub fn same_ray(&self, other: &StateVector, tol: f64) -> bool {
        if self.layout != other.layout {
            return false;
        }
        let ov = self.inner(other);
        if (ov.norm() - 1.0).abs() > tol {
            return false;
        }
        let phase = ov / ov.norm();
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .all(|(a, b)| (a * phase - b).norm() <= tol)
    }

    /// Reorders subsystems to `ids`, which must be a permutation of the layout.
    pub fn permuted<S: AsRef<str>>(&self, ids: &[S]) -> Result<StateVector, QError> {
        if ids.len() != self.layout.len() {
            return Err(QError::LayoutMismatch("permutation must name every subsystem".into()));
        }
        let new_layout = self.layout.select(ids)?;
        let pos = self.layout.positions(ids)?;
        let (offsets, _) = local_offsets(&self.layout.dims(), &pos);
        let amps = offsets.iter().map(|&o| self.amplitudes[o]).collect();
        Ok(StateVector { layout: new_layout, amplitudes: amps })
    }

    pub(crate) fn from_raw(layout: SpaceLayout, amplitudes: Vec<C64>) -> Self {
        StateVector { layout, amplitudes }
    }
}

/// Tensor product in the given order. Amplitude ordering is big-endian over the
/// concatenated layout.
pub fn tensor_states(states: &[&StateVector]) -> Result<StateVector, QError> {
    let mut iter = states.iter();
    let first = iter.next().ok_or(QError::LengthMismatch { expected: 1, got: 0 })?;
    let mut layout = first.layout.clone();
    let mut amps = first.amplitudes.clone();
    for s in iter {
        layout = layout.concat(&s.layout)?;
        let mut next = Vec::with_capacity(amps.len() * s.amplitudes.len());
        for a in &amps {
            for b in &s.amplitudes {
                next.push(a * b);
            }
        }
        amps = next;
    }
    Ok(StateVector { layout, amplitudes: amps })
}

/// Hermitian, unit-trace, positive semidefinite operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    layout: SpaceLayout,
    entries: DMatrix<C64>,
}

impl DensityMatrix {
    pub fn new(layout: SpaceLayout, entries: DMatrix<C64>) -> Result<Self, QError> {
        let n = layout.total_dimension();
        if entries.nrows() != n || entries.ncols() != n {
            return Err(QError::LengthMismatch { expected: n * n, got: entries.len() });
        }
        let herm = (&entries - entries.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if herm > TOL {
            return Err(QError::InvalidDensity(format!("not Hermitian (deviation {herm:e})")));
        }
        let tr = entries.trace();
        if (tr - c(1.0, 0.0)).norm() > TOL {
            return Err(QError::InvalidDensity(format!("trace {tr} != 1")));
        }
        let rho = DensityMatrix { layout, entries };
        let min = rho.eigenvalues().into_iter().fold(f64::INFINITY, f64::min);
        if min < -TOL {
            return Err(QError::InvalidDensity(format!("negative eigenvalue {min:e}")));
        }
        Ok(rho)
    }

    pub fn pure(s: &StateVector) -> Self {
        let v = nalgebra::DVector::from_column_slice(s.amplitudes());
        DensityMatrix { layout: s.layout().clone(), entries: &v * v.adjoint() }
    }

    /// Convex mixture `Σ p_k |ψ_k⟩⟨ψ_k|`; weights must sum to one.
    pub fn mixture(terms: &[(f64, &StateVector)]) -> Result<Self, QError> {
        let first = terms
            .first()
            .ok_or(QError::LengthMismatch { expected: 1, got: 0 })?;
        let layout = first.1.layout().clone();
        let n = layout.total_dimension();
        let mut m = DMatrix::<C64>::zeros(n, n);
        for (p, s) in terms {
            if s.layout() != &layout {
                return Err(QError::LayoutMismatch("mixture components differ in layout".into()));
            }
            let v = nalgebra::DVector::from_column_slice(s.amplitudes());
            m += (&v * v.adjoint()) * c(*p, 0.0);
        }
        DensityMatrix::new(layout, m)
    }

    pub fn layout(&self) -> &SpaceLayout {
        &self.layout
    }

    pub fn entries(&self) -> &DMatrix<C64> {
        &self.entries
    }

    pub fn trace(&self) -> C64 {
        self.entries.trace()
    }

    pub fn purity(&self) -> f64 {
        (&self.entries * &self.entries).trace().re
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let eig = nalgebra::SymmetricEigen::new(self.entries.clone());
        let mut ev: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// Largest entrywise distance to `other`.
    pub fn distance(&self, other: &DensityMatrix) -> f64 {
        if self.entries.shape() != other.entries.shape() {
            return f64::INFINITY;
        }
        (&self.entries - &other.entries).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn diagonal(&self) -> Vec<f64> {
        self.entries.diagonal().iter().map(|z| z.re).collect()
    }
}

/// Reduced density matrix of a pure state on `keep` (in the given order).
pub fn partial_trace<S: AsRef<str>>(s: &StateVector, keep: &[S]) -> Result<DensityMatrix, QError> {
    if keep.is_empty() {
        return Err(QError::EmptyKeep);
    }
    let layout = s.layout().select(keep)?;
    let pos = s.layout().positions(keep)?;
    let (t, r) = local_offsets(&s.layout().dims(), &pos);
    let k = t.len();
    let amps = s.amplitudes();
    let m = DMatrix::from_fn(k, k, |i, j| {
        r.iter().map(|&base| amps[base + t[i]] * amps[base + t[j]].conj()).sum()
    });
    DensityMatrix::new(layout, m)
}

/// Reduced density matrix of a mixed state on `keep` (in the given order).
pub fn partial_trace_density<S: AsRef<str>>(
    rho: &DensityMatrix,
    keep: &[S],
) -> Result<DensityMatrix, QError> {
    if keep.is_empty() {
        return Err(QError::EmptyKeep);
    }
    let layout = rho.layout().select(keep)?;
    let pos = rho.layout().positions(keep)?;
    let (t, r) = local_offsets(&rho.layout().dims(), &pos);
    let k = t.len();
    let e = rho.entries();
    let m = DMatrix::from_fn(k, k, |i, j| r.iter().map(|&base| e[(base + t[i], base + t[j])]).sum());
    DensityMatrix::new(layout, m)
}
