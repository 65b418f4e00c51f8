//! Shared oracle helpers for the integration tests: a dense Hamiltonian built
//! directly from Kronecker products of Pauli matrices, independent of the
//! production CSR builder.

#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;

use annni_qb::operator::{SparseHamiltonian, StateVector};

fn pauli_x() -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0])
}

fn pauli_z() -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0])
}

/// Operator acting with `ops[s]` on the sites named there and identity
/// elsewhere. Site s occupies bit s of the basis index (bit value 0 means
/// σᶻ = +1), so site L−1 is the leftmost Kronecker factor.
fn embedded(l: u32, ops: &[(u32, DMatrix<f64>)]) -> DMatrix<f64> {
    let id2 = DMatrix::<f64>::identity(2, 2);
    let mut m = DMatrix::<f64>::identity(1, 1);
    for site in (0..l).rev() {
        let factor = ops
            .iter()
            .find(|(s, _)| *s == site)
            .map(|(_, o)| o.clone())
            .unwrap_or_else(|| id2.clone());
        m = m.kronecker(&factor);
    }
    m
}

/// −J₁ Σ σˣᵢσˣᵢ₊₁ − J₂ Σ σˣᵢσˣᵢ₊₂ − h Σ σᶻᵢ with open boundaries, assembled
/// term by term from Kronecker products.
pub fn dense_hamiltonian(l: u32, j1: f64, j2: f64, h: f64) -> DMatrix<f64> {
    let n = 1usize << l;
    let mut ham = DMatrix::<f64>::zeros(n, n);
    for i in 0..l {
        ham -= h * embedded(l, &[(i, pauli_z())]);
        if i + 1 < l {
            ham -= j1 * embedded(l, &[(i, pauli_x()), (i + 1, pauli_x())]);
        }
        if i + 2 < l {
            ham -= j2 * embedded(l, &[(i, pauli_x()), (i + 2, pauli_x())]);
        }
    }
    ham
}

/// Densify the production CSR matrix for direct comparison.
pub fn densify(h: &SparseHamiltonian) -> DMatrix<f64> {
    let mut m = DMatrix::<f64>::zeros(h.dim(), h.dim());
    for (i, j, v) in h.entries() {
        m[(i, j)] += v;
    }
    m
}

/// Eigenvalues of a dense symmetric matrix, ascending.
pub fn dense_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let mut vals: Vec<f64> = nalgebra::SymmetricEigen::new(m.clone())
        .eigenvalues
        .iter()
        .cloned()
        .collect();
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    vals
}

/// Ground eigenpair of a dense symmetric matrix.
pub fn dense_ground(m: &DMatrix<f64>) -> (f64, Vec<f64>) {
    let eig = nalgebra::SymmetricEigen::new(m.clone());
    let mut idx = 0;
    for k in 1..eig.eigenvalues.len() {
        if eig.eigenvalues[k] < eig.eigenvalues[idx] {
            idx = k;
        }
    }
    let vec = eig.eigenvectors.column(idx).iter().cloned().collect();
    (eig.eigenvalues[idx], vec)
}

/// exp(−iMt)ψ via full eigendecomposition of the independent dense matrix.
pub fn dense_evolve(m: &DMatrix<f64>, psi: &StateVector, t: f64) -> StateVector {
    let eig = nalgebra::SymmetricEigen::new(m.clone());
    let n = psi.dim();
    let mut coeffs = vec![Complex64::new(0.0, 0.0); n];
    for (k, c) in coeffs.iter_mut().enumerate() {
        let col = eig.eigenvectors.column(k);
        *c = psi
            .amplitudes()
            .iter()
            .zip(col.iter())
            .map(|(a, v)| a * v)
            .sum();
        *c *= Complex64::from_polar(1.0, -eig.eigenvalues[k] * t);
    }
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for (k, c) in coeffs.iter().enumerate() {
        let col = eig.eigenvectors.column(k);
        for (o, v) in out.iter_mut().zip(col.iter()) {
            *o += c * v;
        }
    }
    StateVector::from_amplitudes(out)
}

/// Re⟨ψ|M|ψ⟩ with a dense matrix, bypassing the sparse apply path.
pub fn dense_expectation(m: &DMatrix<f64>, psi: &StateVector) -> f64 {
    let amps = psi.amplitudes();
    let n = amps.len();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..n {
        let mut row = Complex64::new(0.0, 0.0);
        for j in 0..n {
            row += m[(i, j)] * amps[j];
        }
        acc += amps[i].conj() * row;
    }
    acc.re
}

pub fn real_state(v: &[f64]) -> StateVector {
    StateVector::from_amplitudes(v.iter().map(|&x| Complex64::new(x, 0.0)).collect())
}

pub fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
