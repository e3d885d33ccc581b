use nalgebra::DMatrix;

use super::{local_offsets, BasisSpec, Label, QError, SpaceLayout, StateVector, C64, TOL};

/// Unitary operator over a [`SpaceLayout`].
#[derive(Debug, Clone, PartialEq)]
pub struct Unitary {
    layout: SpaceLayout,
    entries: DMatrix<C64>,
}

impl Unitary {
    pub fn new(layout: SpaceLayout, entries: DMatrix<C64>) -> Result<Self, QError> {
        let n = layout.total_dimension();
        if entries.nrows() != n || entries.ncols() != n {
            return Err(QError::LengthMismatch { expected: n * n, got: entries.len() });
        }
        let u = Unitary { layout, entries };
        let dev = u.unitarity_deviation();
        if dev > TOL {
            return Err(QError::NotUnitary { deviation: dev });
        }
        Ok(u)
    }

    pub fn identity(layout: SpaceLayout) -> Self {
        let n = layout.total_dimension();
        Unitary { layout, entries: DMatrix::identity(n, n) }
    }

    pub fn layout(&self) -> &SpaceLayout {
        &self.layout
    }

    pub fn entries(&self) -> &DMatrix<C64> {
        &self.entries
    }

    /// Largest entry of `|U†U − I|`.
    pub fn unitarity_deviation(&self) -> f64 {
        let n = self.entries.nrows();
        let prod = self.entries.adjoint() * &self.entries;
        (prod - DMatrix::<C64>::identity(n, n)).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn adjoint(&self) -> Unitary {
        Unitary { layout: self.layout.clone(), entries: self.entries.adjoint() }
    }

    /// `self · other` (apply `other` first). Layouts must match.
    pub fn compose(&self, other: &Unitary) -> Result<Unitary, QError> {
        if self.layout != other.layout {
            return Err(QError::LayoutMismatch("composed unitaries differ in layout".into()));
        }
        Ok(Unitary { layout: self.layout.clone(), entries: &self.entries * &other.entries })
    }
}

/// Tensor product of unitaries over the concatenated layout.
pub fn tensor_unitaries(ops: &[&Unitary]) -> Result<Unitary, QError> {
    let first = ops.first().ok_or(QError::LengthMismatch { expected: 1, got: 0 })?;
    let mut layout = first.layout.clone();
    let mut m = first.entries.clone();
    for u in &ops[1..] {
        layout = layout.concat(&u.layout)?;
        m = m.kronecker(&u.entries);
    }
    Ok(Unitary { layout, entries: m })
}

/// `U|ψ⟩` on identical layouts.
pub fn apply(u: &Unitary, s: &StateVector) -> Result<StateVector, QError> {
    if u.layout() != s.layout() {
        return Err(QError::LayoutMismatch(format!(
            "operator acts on {:?}, state lives on {:?}",
            u.layout().ids(),
            s.layout().ids()
        )));
    }
    let v = nalgebra::DVector::from_column_slice(s.amplitudes());
    let out = &u.entries * v;
    Ok(StateVector::from_raw(s.layout().clone(), out.iter().copied().collect()))
}

/// Applies `u` to the subsystems it names inside the larger state `s`,
/// acting as identity elsewhere.
pub fn apply_local(u: &Unitary, s: &StateVector) -> Result<StateVector, QError> {
    let pos = s.layout().embed(u.layout())?;
    let (t, r) = local_offsets(&s.layout().dims(), &pos);
    let amps = s.amplitudes();
    let mut out = vec![C64::default(); amps.len()];
    let k = t.len();
    let mut buf = vec![C64::default(); k];
    for &base in &r {
        for (i, &ti) in t.iter().enumerate() {
            buf[i] = amps[base + ti];
        }
        for i in 0..k {
            let mut acc = C64::default();
            for (j, b) in buf.iter().enumerate() {
                acc += u.entries[(i, j)] * b;
            }
            out[base + t[i]] = acc;
        }
    }
    Ok(StateVector::from_raw(s.layout().clone(), out))
}

/// Pre-measurement that copies the index of `measured` into a record.
///
/// `pointer` is the record's pointer basis and `init` the label of its
/// initial vector `|r_{i0}⟩`. The result maps
/// `|b_j⟩|r_k⟩ ↦ |b_j⟩|r_{(k − i0 + j) mod d}⟩`, so in particular
/// `|b_j⟩|init⟩ ↦ |b_j⟩|r_j⟩`. Layout: measured targets then record targets.
pub fn build_premeasurement(
    measured: &BasisSpec,
    pointer: &BasisSpec,
    init: &Label,
) -> Result<Unitary, QError> {
    let layout = measured.target().concat(pointer.target())?;
    let n = measured.len();
    let d = pointer.len();
    if d < n {
        return Err(QError::RecordTooSmall { needed: n, got: d });
    }
    let i0 = pointer.index_of(init).ok_or_else(|| QError::UnknownLabel(init.to_string()))?;
    let dim = n * d;
    let mut m = DMatrix::<C64>::zeros(dim, dim);
    let outer = |a: &[C64], b: &[C64]| -> DMatrix<C64> {
        let va = nalgebra::DVector::from_column_slice(a);
        let vb = nalgebra::DVector::from_column_slice(b);
        &va * vb.adjoint()
    };
    for (j, bj) in measured.vectors().iter().enumerate() {
        let pj = outer(bj, bj);
        for k in 0..d {
            let target = (k + d - i0 + j) % d;
            let shift = outer(&pointer.vectors()[target], &pointer.vectors()[k]);
            m += pj.kronecker(&shift);
        }
    }
    let u = Unitary { layout, entries: m };
    let dev = u.unitarity_deviation();
    if dev > TOL {
        return Err(QError::NotUnitary { deviation: dev });
    }
    Ok(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{c, tensor_states};

    #[test]
    fn identity_is_noop() {
        let l = SpaceLayout::qubits(&["a", "b"]).unwrap();
        let s = StateVector::normalized(l.clone(), vec![c(1.0, 0.0), c(0.0, 2.0), c(-1.0, 0.0), c(0.5, 0.5)])
            .unwrap();
        let out = apply(&Unitary::identity(l), &s).unwrap();
        assert_eq!(out, s);
    }

    #[test]
    fn apply_rejects_layout_mismatch() {
        let a = SpaceLayout::qubits(&["a"]).unwrap();
        let b = SpaceLayout::qubits(&["b"]).unwrap();
        let s = StateVector::basis_state(b, &[0]).unwrap();
        assert!(matches!(apply(&Unitary::identity(a), &s), Err(QError::LayoutMismatch(_))));
    }

    #[test]
    fn computational_copy() {
        let b = BasisSpec::computational("s", 2).unwrap();
        let r = BasisSpec::computational("r", 2).unwrap();
        let u = build_premeasurement(&b, &r, &Label::Int(0)).unwrap();
        let l = u.layout().clone();
        for j in 0..2 {
            let inp = StateVector::basis_state(l.clone(), &[j, 0]).unwrap();
            let out = apply(&u, &inp).unwrap();
            assert_eq!(out, StateVector::basis_state(l.clone(), &[j, j]).unwrap());
        }
    }

    #[test]
    fn basis3_copy_is_unitary_and_copies() {
        let b = BasisSpec::basis3("s").unwrap();
        let r = BasisSpec::basis3("a").unwrap();
        let u = build_premeasurement(&b, &r, &Label::Int(1)).unwrap();
        assert!(u.unitarity_deviation() < 1e-12);
        let plus_s = StateVector::new(b.target().clone(), b.vectors()[0].clone()).unwrap();
        let plus_a = StateVector::new(r.target().clone(), r.vectors()[0].clone()).unwrap();
        let inp = tensor_states(&[&plus_s, &plus_a]).unwrap();
        let out = apply(&u, &inp).unwrap();
        // |+1⟩|init⟩ with init = |+1⟩ stays |+1⟩|+1⟩
        assert!(out.distance(&inp) < 1e-12);
        let minus_s = StateVector::new(b.target().clone(), b.vectors()[1].clone()).unwrap();
        let minus_a = StateVector::new(r.target().clone(), r.vectors()[1].clone()).unwrap();
        let inp = tensor_states(&[&minus_s, &plus_a]).unwrap();
        let want = tensor_states(&[&minus_s, &minus_a]).unwrap();
        assert!(apply(&u, &inp).unwrap().distance(&want) < 1e-12);
    }

    #[test]
    fn record_too_small() {
        let b = BasisSpec::computational("s", 3).unwrap();
        let r = BasisSpec::computational("r", 2).unwrap();
        assert_eq!(
            build_premeasurement(&b, &r, &Label::Int(0)),
            Err(QError::RecordTooSmall { needed: 3, got: 2 })
        );
    }

    #[test]
    fn larger_record_is_allowed() {
        let b = BasisSpec::computational("s", 2).unwrap();
        let r = BasisSpec::computational("r", 3).unwrap();
        let u = build_premeasurement(&b, &r, &Label::Int(2)).unwrap();
        assert!(u.unitarity_deviation() < 1e-12);
        let inp = StateVector::basis_state(u.layout().clone(), &[1, 2]).unwrap();
        let out = apply(&u, &inp).unwrap();
        assert_eq!(out, StateVector::basis_state(u.layout().clone(), &[1, 1]).unwrap());
    }

    #[test]
    fn local_matches_full_embedding() {
        let b = BasisSpec::basis3("s").unwrap();
        let r = BasisSpec::computational("r", 2).unwrap();
        let u = build_premeasurement(&b, &r, &Label::Int(0)).unwrap();
        // state over (x, r, s) — targets permuted and padded
        let l = SpaceLayout::qubits(&["x", "r", "s"]).unwrap();
        let amps: Vec<C64> = (0..8).map(|k| c((k as f64).cos(), (k as f64 * 0.7).sin())).collect();
        let st = StateVector::normalized(l, amps).unwrap();
        let local = apply_local(&u, &st).unwrap();
        let perm = st.permuted(&["x", "s", "r"]).unwrap();
        let full = tensor_unitaries(&[&Unitary::identity(SpaceLayout::qubits(&["x"]).unwrap()), &u]).unwrap();
        let want = apply(&full, &perm).unwrap().permuted(&["x", "r", "s"]).unwrap();
        assert!(local.distance(&want) < 1e-12);
    }
}
