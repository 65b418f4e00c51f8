//! ANNNI Hamiltonian and spin operators in the σ^z product basis.
//!
//! Basis convention: computational basis index `b` encodes the chain state,
//! bit `i` of `b` holding the σ^z eigenvalue of site `i + 1` (bit 0 ↦ +1,
//! bit 1 ↦ −1). In this basis the transverse-field term is diagonal and the
//! σ^x σ^x couplings flip pairs of bits, so every matrix entry is real.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cap on the chain length; 2^24 amplitudes is ~256 MB per state.
pub const DEFAULT_MAX_L: u32 = 24;

/// Boundary condition of the chain. Only open chains are supported; the
/// variant enum exists so configs can reject `closed` at parse time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    #[default]
    Open,
}

/// Physical description of one ANNNI chain Hamiltonian
///
///   H = −J₁ Σ σ_i^x σ_{i+1}^x − J₂ Σ σ_i^x σ_{i+2}^x − h Σ σ_i^z
///
/// with open boundary conditions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainParams {
    pub l: u32,
    pub j1: f64,
    pub j2: f64,
    pub h: f64,
    pub boundary: Boundary,
}

impl ChainParams {
    pub fn new(l: u32, j1: f64, j2: f64, h: f64) -> Result<Self> {
        if l < 1 {
            return Err(Error::Domain("site count L must be >= 1".into()));
        }
        if j2 != 0.0 && l < 3 {
            return Err(Error::Domain(format!(
                "J2 = {j2} requires L >= 3: the next-nearest-neighbor sum is empty at L = {l} \
                 and a nonzero J2 would be silently ignored"
            )));
        }
        if !(j1.is_finite() && j2.is_finite() && h.is_finite()) {
            return Err(Error::Domain("couplings must be finite".into()));
        }
        Ok(ChainParams {
            l,
            j1,
            j2,
            h,
            boundary: Boundary::Open,
        })
    }

    /// Convenience constructor with J₁ = 1 and J₂ = −κ.
    pub fn with_kappa(l: u32, kappa: f64, h: f64) -> Result<Self> {
        ChainParams::new(l, 1.0, -kappa, h)
    }

    /// Frustration parameter κ = −J₂/J₁. Undefined for J₁ = 0.
    pub fn kappa(&self) -> Result<f64> {
        if self.j1 == 0.0 {
            return Err(Error::Domain(
                "kappa = -J2/J1 is undefined for J1 = 0".into(),
            ));
        }
        Ok(-self.j2 / self.j1)
    }

    /// Hilbert-space dimension 2^L.
    pub fn dim(&self) -> usize {
        1usize << self.l
    }
}

/// Hermitian operator on the 2^L-dimensional spin space, stored row-compressed.
///
/// Entries are real doubles (the ANNNI Hamiltonian is real in the σ^z basis);
/// the public matvec contract is a Hermitian complex operator.
#[derive(Debug, Clone)]
pub struct SparseHamiltonian {
    l: u32,
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<f64>,
}

/// Build the ANNNI Hamiltonian for `params` as a sparse matrix.
///
/// Deterministic: identical params give bit-identical matrices.
pub fn build_hamiltonian(params: &ChainParams) -> Result<SparseHamiltonian> {
    build_hamiltonian_with_cap(params, DEFAULT_MAX_L)
}

/// Same as [`build_hamiltonian`] with an explicit cap on L.
pub fn build_hamiltonian_with_cap(params: &ChainParams, max_l: u32) -> Result<SparseHamiltonian> {
    // Re-validate so hand-rolled ChainParams literals cannot bypass the checks.
    let p = ChainParams::new(params.l, params.j1, params.j2, params.h)?;
    if p.l > max_l {
        return Err(Error::Capacity(format!(
            "L = {} exceeds the configured maximum {max_l} (dim 2^L would be {})",
            p.l,
            (p.l as u64).min(63)
        )));
    }
    let l = p.l as usize;
    let dim = 1usize << l;

    // Off-diagonal bond list: (bit mask to flip, matrix entry).
    let mut bonds: Vec<(usize, f64)> = Vec::new();
    if p.j1 != 0.0 {
        for i in 0..l.saturating_sub(1) {
            bonds.push(((1 << i) | (1 << (i + 1)), -p.j1));
        }
    }
    if p.j2 != 0.0 {
        for i in 0..l.saturating_sub(2) {
            bonds.push(((1 << i) | (1 << (i + 2)), -p.j2));
        }
    }

    let mut row_ptr = Vec::with_capacity(dim + 1);
    let mut cols = Vec::new();
    let mut vals = Vec::new();
    row_ptr.push(0usize);

    let mut row: Vec<(u32, f64)> = Vec::with_capacity(bonds.len() + 1);
    for r in 0..dim {
        row.clear();
        // Σ σ_i^z eigenvalue of basis state r: bit 0 ↦ +1, bit 1 ↦ −1.
        let mag = l as i64 - 2 * (r.count_ones() as i64);
        let diag = -p.h * mag as f64;
        if diag != 0.0 {
            row.push((r as u32, diag));
        }
        for &(mask, v) in &bonds {
            row.push(((r ^ mask) as u32, v));
        }
        row.sort_unstable_by_key(|e| e.0);
        for &(c, v) in row.iter() {
            cols.push(c);
            vals.push(v);
        }
        row_ptr.push(cols.len());
    }

    Ok(SparseHamiltonian {
        l: p.l,
        dim,
        row_ptr,
        cols,
        vals,
    })
}

impl SparseHamiltonian {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn sites(&self) -> u32 {
        self.l
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// Stored entry (i, j), or 0 if absent.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let lo = self.row_ptr[i];
        let hi = self.row_ptr[i + 1];
        match self.cols[lo..hi].binary_search(&(j as u32)) {
            Ok(k) => self.vals[lo + k],
            Err(_) => 0.0,
        }
    }

    /// Iterate stored entries as (row, col, value).
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.dim).flat_map(move |r| {
            (self.row_ptr[r]..self.row_ptr[r + 1])
                .map(move |k| (r, self.cols[k] as usize, self.vals[k]))
        })
    }

    /// Largest |H[i,j] − H[j,i]| over stored entries.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for (i, j, v) in self.entries() {
            worst = worst.max((v - self.get(j, i)).abs());
        }
        worst
    }

    /// Real-vector matvec kernel, y = Hx.
    pub(crate) fn spmv_real(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.dim);
        assert_eq!(y.len(), self.dim);
        y.par_iter_mut().enumerate().for_each(|(r, out)| {
            let mut acc = 0.0;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[k] * x[self.cols[k] as usize];
            }
            *out = acc;
        });
    }

    pub(crate) fn spmv_complex(&self, x: &[Complex64], y: &mut [Complex64]) {
        assert_eq!(x.len(), self.dim);
        assert_eq!(y.len(), self.dim);
        y.par_iter_mut().enumerate().for_each(|(r, out)| {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[k] * x[self.cols[k] as usize];
            }
            *out = acc;
        });
    }
}

/// Normalized (by construction of its public ops) complex state of dimension 2^L.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amps: Vec<Complex64>,
}

impl StateVector {
    /// Wrap raw amplitudes without normalizing.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Self {
        StateVector { amps }
    }

    /// Wrap and normalize; errors on the zero vector.
    pub fn normalized(amps: Vec<Complex64>) -> Result<Self> {
        let mut s = StateVector { amps };
        let n = s.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::Numerical(
                "cannot normalize zero or non-finite vector".into(),
            ));
        }
        for a in &mut s.amps {
            *a /= n;
        }
        Ok(s)
    }

    /// The computational basis state |index⟩.
    pub fn basis_state(dim: usize, index: usize) -> Self {
        assert!(index < dim);
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[index] = Complex64::new(1.0, 0.0);
        StateVector { amps }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub(crate) fn renormalize(&mut self) {
        let n = self.norm();
        for a in &mut self.amps {
            *a /= n;
        }
    }
}

/// Sparse matvec Hψ; the result is not normalized.
pub fn apply(h: &SparseHamiltonian, psi: &StateVector) -> Result<StateVector> {
    if h.dim() != psi.dim() {
        return Err(Error::DimensionMismatch(h.dim(), psi.dim()));
    }
    let mut out = vec![Complex64::new(0.0, 0.0); h.dim()];
    h.spmv_complex(psi.amplitudes(), &mut out);
    Ok(StateVector::from_amplitudes(out))
}

/// Re⟨ψ|H|ψ⟩ for normalized ψ. A sizable imaginary residue means the
/// Hermiticity invariant is broken and is reported as an error.
pub fn expectation(h: &SparseHamiltonian, psi: &StateVector) -> Result<f64> {
    let hpsi = apply(h, psi)?;
    let e = psi.inner(&hpsi);
    if e.im.abs() >= 1e-10 {
        return Err(Error::Numerical(format!(
            "imaginary residue {:.3e} in <psi|H|psi>; operator is not Hermitian",
            e.im
        )));
    }
    Ok(e.re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn single_spin_field_term() {
        let p = ChainParams::new(1, 1.0, 0.0, 0.7).unwrap();
        let h = build_hamiltonian(&p).unwrap();
        assert_eq!(h.dim(), 2);
        assert_abs_diff_eq!(h.get(0, 0), -0.7);
        assert_abs_diff_eq!(h.get(1, 1), 0.7);
        assert_abs_diff_eq!(h.get(0, 1), 0.0);
    }

    #[test]
    fn single_bond_spectrum() {
        // L=2, J1=1, h=0: H = -sigma^x sigma^x, spectrum {-1,-1,+1,+1}.
        let p = ChainParams::new(2, 1.0, 0.0, 0.0).unwrap();
        let h = build_hamiltonian(&p).unwrap();
        let mut evs = crate::eigen::dense_spectrum(&h).unwrap();
        for e in &mut evs {
            *e = (*e * 1e12).round() / 1e12;
        }
        assert_eq!(evs, vec![-1.0, -1.0, 1.0, 1.0]);
    }

    #[test]
    fn rejects_l2_with_j2() {
        assert!(ChainParams::new(2, 1.0, -0.3, 0.4).is_err());
        let bogus = ChainParams {
            l: 2,
            j1: 1.0,
            j2: -0.3,
            h: 0.4,
            boundary: Boundary::Open,
        };
        assert!(build_hamiltonian(&bogus).is_err());
    }

    #[test]
    fn rejects_dim_overflow() {
        let p = ChainParams::new(25, 1.0, 0.0, 0.4).unwrap();
        assert!(matches!(build_hamiltonian(&p), Err(Error::Capacity(_))));
    }

    #[test]
    fn kappa_accessor() {
        let p = ChainParams::new(4, 2.0, -0.6, 0.4).unwrap();
        assert_abs_diff_eq!(p.kappa().unwrap(), 0.3);
        let p0 = ChainParams::new(4, 0.0, 0.0, 1.0).unwrap();
        assert!(p0.kappa().is_err());
    }

    #[test]
    fn hermitian_and_nnz_bound() {
        for &(l, j2, h) in &[(4u32, -0.3, 0.4), (6, -0.6, 1.0), (5, 0.0, 0.2)] {
            let p = ChainParams::new(l, 1.0, j2, h).unwrap();
            let m = build_hamiltonian(&p).unwrap();
            assert!(m.hermiticity_defect() <= 1e-14);
            assert!(m.nnz() <= (3 * l as usize - 3) << l);
            assert_eq!(m.dim(), 1 << l);
        }
    }

    #[test]
    fn apply_diag_and_zero() {
        let p = ChainParams::new(1, 1.0, 0.0, 0.7).unwrap();
        let h = build_hamiltonian(&p).unwrap();
        let psi = StateVector::basis_state(2, 0);
        let out = apply(&h, &psi).unwrap();
        assert_abs_diff_eq!(out.amplitudes()[0].re, -0.7);
        assert_abs_diff_eq!(out.amplitudes()[1].re, 0.0);

        let zero = StateVector::from_amplitudes(vec![c(0.0); 2]);
        let out = apply(&h, &zero).unwrap();
        assert!(out.amplitudes().iter().all(|a| a.norm() == 0.0));
    }

    #[test]
    fn apply_dimension_mismatch() {
        let p = ChainParams::new(2, 1.0, 0.0, 0.3).unwrap();
        let h = build_hamiltonian(&p).unwrap();
        let psi = StateVector::basis_state(8, 0);
        assert!(matches!(
            apply(&h, &psi),
            Err(Error::DimensionMismatch(4, 8))
        ));
    }

    #[test]
    fn expectation_diag() {
        let p = ChainParams::new(1, 1.0, 0.0, 0.7).unwrap();
        let h = build_hamiltonian(&p).unwrap();
        let psi = StateVector::basis_state(2, 1);
        assert_abs_diff_eq!(expectation(&h, &psi).unwrap(), 0.7);
    }

    // Global spin flip Pi = prod_i sigma_i^z is diagonal with sign (-1)^popcount.
    fn spin_flip(psi: &StateVector) -> StateVector {
        let amps = psi
            .amplitudes()
            .iter()
            .enumerate()
            .map(|(b, a)| if b.count_ones() % 2 == 1 { -a } else { *a })
            .collect();
        StateVector::from_amplitudes(amps)
    }

    fn site_reversal(l: u32, psi: &StateVector) -> StateVector {
        let dim = 1usize << l;
        let mut amps = vec![c(0.0); dim];
        for (b, a) in psi.amplitudes().iter().enumerate() {
            let rev = (b.reverse_bits() >> (usize::BITS - l)) & (dim - 1);
            amps[rev] = *a;
        }
        StateVector::from_amplitudes(amps)
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
    fn z2_and_reflection_symmetry() {
        let p = ChainParams::new(8, 1.0, -0.3, 0.4).unwrap();
        let h = build_hamiltonian(&p).unwrap();
        let psi = random_state(h.dim(), 7);

        let hp = apply(&h, &spin_flip(&psi)).unwrap();
        let ph = spin_flip(&apply(&h, &psi).unwrap());
        let diff: f64 = hp
            .amplitudes()
            .iter()
            .zip(ph.amplitudes())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        assert!(diff < 1e-12, "Z2 commutator norm {diff}");

        let hr = apply(&h, &site_reversal(8, &psi)).unwrap();
        let rh = site_reversal(8, &apply(&h, &psi).unwrap());
        let diff: f64 = hr
            .amplitudes()
            .iter()
            .zip(rh.amplitudes())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        assert!(diff < 1e-12, "reflection commutator norm {diff}");
    }

    #[test]
    fn deterministic_build() {
        let p = ChainParams::new(6, 1.0, -0.5, 0.9).unwrap();
        let a = build_hamiltonian(&p).unwrap();
        let b = build_hamiltonian(&p).unwrap();
        assert_eq!(a.row_ptr, b.row_ptr);
        assert_eq!(a.cols, b.cols);
        assert!(a
            .vals
            .iter()
            .zip(&b.vals)
            .all(|(x, y)| x.to_bits() == y.to_bits()));
    }
}
