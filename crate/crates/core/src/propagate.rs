//! Krylov-subspace approximation of e^{−iHt}ψ with adaptive substepping, plus
//! a dense matrix-exponential oracle for small systems.

use num_complex::Complex64;

use crate::eigen::{dense_eigendecomposition, tridiagonal_matrix, DENSE_ORACLE_CAP};
use crate::error::{Error, Result};
use crate::operator::{SparseHamiltonian, StateVector};

#[derive(Debug, Clone, Copy)]
pub struct PropagatorOptions {
    pub krylov_dim: usize,
    /// Local 2-norm error target per substep.
    pub substep_tol: f64,
    pub max_substeps: usize,
}

impl Default for PropagatorOptions {
    fn default() -> Self {
        PropagatorOptions {
            krylov_dim: 30,
            substep_tol: 1e-10,
            max_substeps: 1_000_000,
        }
    }
}

/// Approximate e^{−iHt}ψ for t ≥ 0.
///
/// Within each substep a Lanczos basis is built from the current state, the
/// small tridiagonal projection is exponentiated exactly, and the substep is
/// shrunk until the local error estimate meets the target. The output is
/// renormalized; the renormalization correction is asserted to be below 1e−9
/// as a unitarity diagnostic.
pub fn evolve(
    psi: &StateVector,
    h1: &SparseHamiltonian,
    t: f64,
    opts: &PropagatorOptions,
) -> Result<StateVector> {
    if h1.dim() != psi.dim() {
        return Err(Error::DimensionMismatch(h1.dim(), psi.dim()));
    }
    if !t.is_finite() || t < 0.0 {
        return Err(Error::Domain(format!(
            "evolution time must be >= 0, got {t}"
        )));
    }
    if opts.krylov_dim < 2 {
        return Err(Error::Domain("krylov_dim must be >= 2".into()));
    }
    if t == 0.0 {
        return Ok(psi.clone());
    }

    let min_dt = t / opts.max_substeps as f64;
    let mut state = psi.amplitudes().to_vec();
    let mut done = 0.0f64;
    let mut dt = t;
    let mut substeps = 0usize;

    while done < t {
        dt = dt.min(t - done);
        let (basis, u, used_dt) = krylov_substep(h1, &state, dt, min_dt, opts, done)?;
        dt = used_dt;

        let mut next = vec![Complex64::new(0.0, 0.0); state.len()];
        for (j, basis_vec) in basis.iter().enumerate() {
            let c = u[j];
            for (ni, bi) in next.iter_mut().zip(basis_vec) {
                *ni += c * bi;
            }
        }
        state = next;
        done += dt;
        substeps += 1;
        if substeps > opts.max_substeps {
            return Err(Error::Stiffness(done));
        }
        // Room to grow back after a shrink.
        dt *= 2.0;
        if !state[0].is_finite() {
            return Err(Error::Numerical("NaN during Krylov propagation".into()));
        }
    }

    let mut out = StateVector::from_amplitudes(state);
    let drift = (out.norm() - 1.0).abs();
    if drift >= 1e-9 {
        return Err(Error::Numerical(format!(
            "unitarity violated: norm drift {drift:.3e} after propagation"
        )));
    }
    out.renormalize();
    Ok(out)
}

/// Exact action of the exponential via full eigendecomposition (oracle).
///
/// Negative t is allowed here; only the public [`evolve`] restricts the sign.
pub fn dense_expm_apply(psi: &StateVector, h: &SparseHamiltonian, t: f64) -> Result<StateVector> {
    if h.dim() != psi.dim() {
        return Err(Error::DimensionMismatch(h.dim(), psi.dim()));
    }
    if h.dim() > DENSE_ORACLE_CAP {
        return Err(Error::Capacity(format!(
            "dense exponential oracle capped at dim {DENSE_ORACLE_CAP}, got {}",
            h.dim()
        )));
    }
    let (values, vectors) = dense_eigendecomposition(h)?;
    let n = h.dim();
    // coeffs = V^T psi
    let mut coeffs = vec![Complex64::new(0.0, 0.0); n];
    for (k, c) in coeffs.iter_mut().enumerate() {
        let col = vectors.column(k);
        *c = psi
            .amplitudes()
            .iter()
            .zip(col.iter())
            .map(|(a, v)| a * v)
            .sum();
    }
    for (c, lam) in coeffs.iter_mut().zip(&values) {
        *c *= Complex64::from_polar(1.0, -lam * t);
    }
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for (k, c) in coeffs.iter().enumerate() {
        let col = vectors.column(k);
        for (o, v) in out.iter_mut().zip(col.iter()) {
            *o += c * v;
        }
    }
    Ok(StateVector::from_amplitudes(out))
}

/// One adaptive substep: grow a complex Lanczos basis from `v0` (real
/// symmetric H keeps the recurrence coefficients real), stopping as soon as
/// the local error estimate β·|u_k| meets the target. If the basis fills up
/// without converging, the substep is halved instead. Returns the basis, the
/// small-space coefficients, and the substep actually taken.
fn krylov_substep(
    h: &SparseHamiltonian,
    v0: &[Complex64],
    mut dt: f64,
    min_dt: f64,
    opts: &PropagatorOptions,
    done: f64,
) -> Result<(Vec<Vec<Complex64>>, Vec<Complex64>, f64)> {
    let n = v0.len();
    let m = opts.krylov_dim.min(n);
    let mut basis: Vec<Vec<Complex64>> = vec![v0.to_vec()];
    let mut alpha: Vec<f64> = Vec::with_capacity(m);
    let mut beta: Vec<f64> = Vec::with_capacity(m);
    let mut w = vec![Complex64::new(0.0, 0.0); n];

    for j in 0..m {
        h.spmv_complex(&basis[j], &mut w);
        let a: Complex64 = basis[j].iter().zip(&w).map(|(v, y)| v.conj() * y).sum();
        if !a.re.is_finite() {
            return Err(Error::Numerical("NaN in Lanczos recurrence".into()));
        }
        let a = a.re;
        alpha.push(a);
        for (wi, vi) in w.iter_mut().zip(&basis[j]) {
            *wi -= a * vi;
        }
        if j > 0 {
            let b = beta[j - 1];
            for (wi, vi) in w.iter_mut().zip(&basis[j - 1]) {
                *wi -= b * vi;
            }
        }
        for q in &basis {
            let c: Complex64 = q.iter().zip(&w).map(|(v, y)| v.conj() * y).sum();
            for (wi, qi) in w.iter_mut().zip(q) {
                *wi -= c * qi;
            }
        }
        let b = w.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if !b.is_finite() {
            return Err(Error::Numerical("NaN in Lanczos recurrence".into()));
        }
        let invariant = b < 1e-13;
        let k = alpha.len();
        // Small bases rarely converge; skip the eigensolve until they might.
        if invariant || k >= 4 || k == m {
            let tri = tridiagonal_matrix(&alpha, &beta);
            let eig = nalgebra::SymmetricEigen::new(tri);
            let u = expi_tridiag_e1(&eig, dt);
            let err = b * u[k - 1].norm();
            if invariant || err <= opts.substep_tol {
                return Ok((basis, u, dt));
            }
            if k == m {
                // Basis is full: shrink the substep instead.
                loop {
                    dt *= 0.5;
                    if dt < min_dt {
                        return Err(Error::Stiffness(done));
                    }
                    let u = expi_tridiag_e1(&eig, dt);
                    if b * u[k - 1].norm() <= opts.substep_tol {
                        return Ok((basis, u, dt));
                    }
                }
            }
        }
        beta.push(b);
        basis.push(w.iter().map(|x| x / b).collect());
    }
    unreachable!("Krylov loop exits via early return at k == m")
}

/// exp(−i dt T) e₁ from the eigendecomposition of the tridiagonal projection.
fn expi_tridiag_e1(eig: &nalgebra::SymmetricEigen<f64, nalgebra::Dyn>, dt: f64) -> Vec<Complex64> {
    let k = eig.eigenvalues.len();
    let mut u = vec![Complex64::new(0.0, 0.0); k];
    for j in 0..k {
        let phase = Complex64::from_polar(1.0, -eig.eigenvalues[j] * dt);
        let w = eig.eigenvectors[(0, j)];
        for (i, ui) in u.iter_mut().enumerate() {
            *ui += eig.eigenvectors[(i, j)] * w * phase;
        }
    }
    u
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigen::{ground_state, SolverOptions};
    use crate::operator::{build_hamiltonian, ChainParams};

    fn diff_norm(a: &StateVector, b: &StateVector) -> f64 {
        a.amplitudes()
            .iter()
            .zip(b.amplitudes())
            .map(|(x, y)| (x - y).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    fn random_state(dim: usize, seed: u64) -> StateVector {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let amps: Vec<Complex64> = (0..dim)
            .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
            .collect();
        StateVector::normalized(amps).unwrap()
    }

    #[test]
    fn zero_time_is_identity() {
        let p = ChainParams::with_kappa(4, 0.3, 0.4).unwrap();
        let h = build_hamiltonian(&p).unwrap();
        let psi = random_state(h.dim(), 3);
        let out = evolve(&psi, &h, 0.0, &PropagatorOptions::default()).unwrap();
        assert_eq!(out, psi);
    }

    #[test]
    fn rejects_negative_time() {
        let p = ChainParams::with_kappa(4, 0.3, 0.4).unwrap();
        let h = build_hamiltonian(&p).unwrap();
        let psi = random_state(h.dim(), 3);
        assert!(evolve(&psi, &h, -1.0, &PropagatorOptions::default()).is_err());
    }

    #[test]
    fn eigenstate_picks_up_only_a_phase() {
        let p = ChainParams::with_kappa(6, 0.4, 0.4).unwrap();
        let h = build_hamiltonian(&p).unwrap();
        let gs = ground_state(&h, &SolverOptions::default()).unwrap();
        let out = evolve(&gs.state, &h, 3.7, &PropagatorOptions::default()).unwrap();
        let overlap = out.inner(&gs.state).norm();
        assert!((overlap - 1.0).abs() < 1e-9, "overlap {overlap}");
    }

    #[test]
    fn matches_dense_exponential() {
        let p = ChainParams::with_kappa(8, 0.4, 0.4).unwrap();
        let h = build_hamiltonian(&p).unwrap();
        let psi = random_state(h.dim(), 11);
        let fast = evolve(&psi, &h, 5.0, &PropagatorOptions::default()).unwrap();
        let exact = dense_expm_apply(&psi, &h, 5.0).unwrap();
        let d = diff_norm(&fast, &exact);
        assert!(d < 1e-8, "Krylov vs dense exponential: {d:.3e}");
    }

    #[test]
    fn dense_oracle_identity_and_diagonal() {
        let p = ChainParams::new(3, 0.0, 0.0, 0.9).unwrap();
        let h = build_hamiltonian(&p).unwrap();
        let psi = random_state(h.dim(), 5);
        let out = dense_expm_apply(&psi, &h, 0.0).unwrap();
        assert!(diff_norm(&out, &psi) < 1e-12);

        // Field-only H is diagonal: elementwise phase.
        let t = 1.3;
        let out = dense_expm_apply(&psi, &h, t).unwrap();
        for (b, (o, a)) in out.amplitudes().iter().zip(psi.amplitudes()).enumerate() {
            let e = h.get(b, b);
            let expect = a * Complex64::from_polar(1.0, -e * t);
            assert!((o - expect).norm() < 1e-12);
        }
    }

    #[test]
    fn dense_oracle_time_reversal() {
        let p = ChainParams::with_kappa(6, 0.5, 0.7).unwrap();
        let h = build_hamiltonian(&p).unwrap();
        let psi = random_state(h.dim(), 9);
        let fwd = dense_expm_apply(&psi, &h, 2.5).unwrap();
        let back = dense_expm_apply(&fwd, &h, -2.5).unwrap();
        assert!(diff_norm(&back, &psi) < 1e-12);
    }

    #[test]
    fn composition() {
        let p = ChainParams::with_kappa(6, 0.3, 0.4).unwrap();
        let h = build_hamiltonian(&p).unwrap();
        let psi = random_state(h.dim(), 13);
        let opts = PropagatorOptions::default();
        let two_step = evolve(&evolve(&psi, &h, 1.3, &opts).unwrap(), &h, 2.2, &opts).unwrap();
        let one_step = evolve(&psi, &h, 3.5, &opts).unwrap();
        assert!(diff_norm(&two_step, &one_step) < 2e-8);
    }

    #[test]
    fn energy_is_conserved() {
        use crate::operator::expectation;
        let p = ChainParams::with_kappa(8, 0.4, 0.4).unwrap();
        let h = build_hamiltonian(&p).unwrap();
        let psi = random_state(h.dim(), 17);
        let e0 = expectation(&h, &psi).unwrap();
        let mut state = psi;
        for _ in 0..10 {
            state = evolve(&state, &h, 1.0, &PropagatorOptions::default()).unwrap();
            let e = expectation(&h, &state).unwrap();
            assert!((e - e0).abs() < 1e-7 * 8.0);
        }
    }
}
