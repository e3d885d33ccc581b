//! State-vector kernel: pre-measurement, reduced states and the Schmidt form.

use wfcheck::qcore::{
    apply_local, build_premeasurement, partial_trace, schmidt, tensor_states, BasisSpec, Label, SpaceLayout,
    StateVector, C64,
};

fn main() {
    let layout = SpaceLayout::qubits(&["S", "r"]).unwrap();
    let sys = StateVector::new(layout.select(&["S"]).unwrap(), vec![C64::new(0.6, 0.0), C64::new(0.0, 0.8)]).unwrap();
    let blank = StateVector::basis_state(layout.select(&["r"]).unwrap(), &[0]).unwrap();
    let start = tensor_states(&[&sys, &blank]).unwrap();

    let copy = build_premeasurement(
        &BasisSpec::computational("S", 2).unwrap(),
        &BasisSpec::computational("r", 2).unwrap(),
        &Label::Int(0),
    )
    .unwrap();
    let after = apply_local(&copy, &start).unwrap();
    println!("amplitudes: {:?}", after.amplitudes());

    let rho = partial_trace(&after, &["S"]).unwrap();
    println!("S purity {:.3}, diagonal {:?}", rho.purity(), rho.diagonal());

    let sd = schmidt(&after, &["S"], &["r"]).unwrap();
    println!("schmidt coefficients {:?}, distinct {}", sd.coefficients, sd.unique);
}
