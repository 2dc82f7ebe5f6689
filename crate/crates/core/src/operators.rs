//! Builders for the stock operators exercised by the experiments.

use num_complex::Complex64;

use crate::linalg::{CMatrix, HermitianObservable, UnitaryMatrix};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn pauli(kind: char) -> CMatrix {
    let rows = match kind {
        'i' => [
            [c(1.0, 0.0), c(0.0, 0.0)],
            [c(0.0, 0.0), c(1.0, 0.0)],
        ],
        'x' => [
            [c(0.0, 0.0), c(1.0, 0.0)],
            [c(1.0, 0.0), c(0.0, 0.0)],
        ],
        'y' => [
            [c(0.0, 0.0), c(0.0, -1.0)],
            [c(0.0, 1.0), c(0.0, 0.0)],
        ],
        'z' => [
            [c(1.0, 0.0), c(0.0, 0.0)],
            [c(0.0, 0.0), c(-1.0, 0.0)],
        ],
        _ => unreachable!(),
    };
    CMatrix::from_rows(&[rows[0].to_vec(), rows[1].to_vec()]).unwrap()
}

/// a_I·I + a_x·σx + a_y·σy + a_z·σz as a raw matrix.
pub fn pauli_combo_matrix(a_i: f64, a_x: f64, a_y: f64, a_z: f64) -> CMatrix {
    let mut m = CMatrix::zeros(2);
    for (coefficient, kind) in [(a_i, 'i'), (a_x, 'x'), (a_y, 'y'), (a_z, 'z')] {
        m.add_scaled(&pauli(kind), c(coefficient, 0.0));
    }
    m
}

/// Single-qubit operator a_I·I + a_x·σx + a_y·σy + a_z·σz.
pub fn build_pauli_combo(a_i: f64, a_x: f64, a_y: f64, a_z: f64) -> HermitianObservable {
    HermitianObservable::new(pauli_combo_matrix(a_i, a_x, a_y, a_z))
        .expect("real Pauli combinations are Hermitian")
}

/// The non-degenerate two-qubit operator with equidistant spectrum
/// (0, π/2, π, 3π/2).
pub fn build_two_qubit_example() -> HermitianObservable {
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
    let rows = [
        vec![c(PI, 0.0), c(-FRAC_PI_2, 0.0), c(-FRAC_PI_4, 0.0), c(-FRAC_PI_4, 0.0)],
        vec![c(-FRAC_PI_2, 0.0), c(PI, 0.0), c(-FRAC_PI_4, 0.0), c(-FRAC_PI_4, 0.0)],
        vec![c(-FRAC_PI_4, 0.0), c(-FRAC_PI_4, 0.0), c(FRAC_PI_2, 0.0), c(0.0, 0.0)],
        vec![c(-FRAC_PI_4, 0.0), c(-FRAC_PI_4, 0.0), c(0.0, 0.0), c(FRAC_PI_2, 0.0)],
    ];
    HermitianObservable::new(CMatrix::from_rows(&rows).unwrap())
        .expect("real symmetric by construction")
}

/// Coefficients of the molecular-hydrogen two-qubit operator at a 0.2 Å
/// bond length.
pub fn h2_default_coefficients() -> [f64; 6] {
    [2.8489, 0.5678, -1.4508, 0.6799, 0.0791, 0.0791]
}

/// g0·I + g1·Z₀ + g2·Z₁ + g3·Z₀Z₁ + g4·Y₀Y₁ + g5·X₀X₁ with qubit 0 as the
/// left tensor factor and basis order |00⟩, |01⟩, |10⟩, |11⟩.
pub fn build_h2(g: [f64; 6]) -> HermitianObservable {
    let identity = pauli('i');
    let terms = [
        identity.kron(&identity),
        pauli('z').kron(&identity),
        identity.kron(&pauli('z')),
        pauli('z').kron(&pauli('z')),
        pauli('y').kron(&pauli('y')),
        pauli('x').kron(&pauli('x')),
    ];
    let mut m = CMatrix::zeros(4);
    for (coefficient, term) in g.iter().zip(terms.iter()) {
        m.add_scaled(term, c(*coefficient, 0.0));
    }
    HermitianObservable::new(m).expect("real Pauli combinations are Hermitian")
}

/// The environment used by the single-qubit campaigns: the general
/// single-qubit unitary with the given genes, taken directly as the
/// evolution rather than exponentiated from an observable.
pub fn environment_from_genes(theta: f64, phi: f64, lambda: f64) -> UnitaryMatrix {
    crate::genotype::single_qubit_gate(theta, phi, lambda)
}
