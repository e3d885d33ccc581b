//! Dense complex linear algebra and projective-measurement kernel for small
//! composite Hilbert spaces.
//!
//! Amplitudes are ordered big-endian over the declaration order of the
//! subsystems in a [`SpaceLayout`]: the first-declared subsystem is the most
//! significant digit of the flat index.

mod basis;
mod error;
mod layout;
mod measure;
mod operator;
mod schmidt;
mod state;

pub use basis::{
    decode_bits, encode_bits, relabel, BasisSpec, Composition, Factor, Label, ObservableSpec,
    Outcome, Relabel,
};
pub use error::QError;
pub use layout::{SpaceLayout, Subsystem};
pub use measure::{born_distribution, project, Distribution};
pub use operator::{apply, apply_local, build_premeasurement, tensor_unitaries, Unitary};
pub use schmidt::{schmidt, SchmidtDecomposition};
pub use state::{partial_trace, partial_trace_density, tensor_states, DensityMatrix, StateVector};

pub use num_complex::Complex64 as C64;

/// Absolute tolerance for normalization, unitarity and orthonormality checks.
pub const TOL: f64 = 1e-10;

/// Branch weights at or below this value are treated as impossible.
pub const ZERO_PROB: f64 = 1e-13;

/// Coefficients closer than this are considered degenerate by [`schmidt`].
pub const SCHMIDT_DISTINCT: f64 = 1e-8;

pub(crate) fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub(crate) fn norm_sqr(v: &[C64]) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum()
}

pub(crate) fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Flat offsets for a local operator acting on `targets` (in the given order)
/// inside a space with per-subsystem `dims`.
///
/// Returns `(target_offsets, rest_offsets)`; every flat index is uniquely
/// `rest_offsets[r] + target_offsets[t]`.
pub(crate) fn local_offsets(dims: &[usize], targets: &[usize]) -> (Vec<usize>, Vec<usize>) {
    let n = dims.len();
    let mut strides = vec![1usize; n];
    for i in (0..n.saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * dims[i + 1];
    }
    let offsets_for = |subs: &[usize]| -> Vec<usize> {
        let mut out = vec![0usize];
        for &s in subs {
            let mut next = Vec::with_capacity(out.len() * dims[s]);
            for &base in &out {
                for d in 0..dims[s] {
                    next.push(base + d * strides[s]);
                }
            }
            out = next;
        }
        out
    };
    let rest: Vec<usize> = (0..n).filter(|i| !targets.contains(i)).collect();
    (offsets_for(targets), offsets_for(&rest))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn offsets_cover_every_index_once() {
        let dims = [2, 3, 2];
        let (t, r) = local_offsets(&dims, &[2, 0]);
        let mut seen = vec![false; 12];
        for &rr in &r {
            for &tt in &t {
                assert!(!seen[rr + tt]);
                seen[rr + tt] = true;
            }
        }
        assert!(seen.iter().all(|&s| s));
        // target order [2, 0]: local index 1 flips subsystem 0 (stride 6)
        assert_eq!(t, vec![0, 6, 1, 7]);
    }
}
