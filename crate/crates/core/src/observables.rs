//! Quantities derived from the reduced two-qubit density matrix.

use nalgebra::{DMatrix, Matrix2, Matrix4, SymmetricEigen};

use crate::error::{Error, Result};
use crate::space::{ReducedDensityMatrix, C64, QUBIT_DIM, SZ_TOTAL};

/// Eigenvalues below this are treated as genuine negativity.
pub const PPT_THRESHOLD: f64 = -1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Qubit {
    First,
    Second,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservableRecord {
    pub t: f64,
    pub purity: f64,
    pub sz_total: f64,
    /// Base-2 entropy of the first qubit's marginal.
    pub entropy_one_qubit: f64,
    /// Base-2 entropy of the full two-qubit state.
    pub entropy_two_qubit: f64,
    pub concurrence: f64,
    pub ppt_min_eig: f64,
    pub negativity: f64,
    /// Trace of ρ_S before renormalization.
    pub raw_trace: f64,
}

impl ObservableRecord {
    pub fn compute(t: f64, rho: &ReducedDensityMatrix, raw_trace: f64) -> Result<Self> {
        let ppt = ppt_spectrum(rho, Qubit::First);
        let marginal = one_qubit_marginal(rho, Qubit::First);
        Ok(ObservableRecord {
            t,
            purity: purity(rho),
            sz_total: sz_total(rho),
            entropy_one_qubit: von_neumann_entropy(&DMatrix::from_iterator(2, 2, marginal.iter().copied()))?,
            entropy_two_qubit: von_neumann_entropy(&DMatrix::from_iterator(4, 4, rho.0.iter().copied()))?,
            concurrence: concurrence(rho),
            ppt_min_eig: ppt.eigenvalues[QUBIT_DIM - 1],
            negativity: ppt.negativity,
            raw_trace,
        })
    }
}

/// Tr(ρ²)
pub fn purity(rho: &ReducedDensityMatrix) -> f64 {
    (rho.0 * rho.0).trace().re
}

/// ⟨S^z₁ + S^z₂⟩ with S^z = diag(+1/2, −1/2).
pub fn sz_total(rho: &ReducedDensityMatrix) -> f64 {
    (0..QUBIT_DIM).map(|q| SZ_TOTAL[q] * rho.0[(q, q)].re).sum()
}

/// σʸ ⊗ σʸ in the |00⟩, |01⟩, |10⟩, |11⟩ basis.
fn sigma_yy() -> Matrix4<C64> {
    let r = |x: f64| C64::new(x, 0.0);
    let mut m = Matrix4::zeros();
    m[(0, 3)] = r(-1.0);
    m[(3, 0)] = r(-1.0);
    m[(1, 2)] = r(1.0);
    m[(2, 1)] = r(1.0);
    m
}

fn hermitian_sqrt(m: &Matrix4<C64>) -> Matrix4<C64> {
    let eig = SymmetricEigen::new((m + m.adjoint()) * C64::new(0.5, 0.0));
    let roots = eig.eigenvalues.map(|e| C64::new(e.max(0.0).sqrt(), 0.0));
    eig.eigenvectors * Matrix4::from_diagonal(&roots) * eig.eigenvectors.adjoint()
}

/// Wootters concurrence max(0, λ₁ − λ₂ − λ₃ − λ₄).
///
/// The λᵢ are square roots of the eigenvalues of ρ ρ̃ with
/// ρ̃ = (σʸ⊗σʸ) ρ* (σʸ⊗σʸ). They are obtained from the Hermitian matrix
/// √ρ ρ̃ √ρ, which has the same spectrum.
pub fn concurrence(rho: &ReducedDensityMatrix) -> f64 {
    let yy = sigma_yy();
    let tilde = yy * rho.0.conjugate() * yy;
    let root = hermitian_sqrt(&rho.0);
    let m = root * tilde * root;
    let m = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let mut lambdas: Vec<f64> = SymmetricEigen::new(m)
        .eigenvalues
        .iter()
        .map(|&e| if e.abs() < 1e-12 { 0.0 } else { e.max(0.0) }.sqrt())
        .collect();
    lambdas.sort_by(|a, b| b.total_cmp(a));
    (lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]).max(0.0)
}

/// Partial transpose over one qubit.
pub fn partial_transpose(rho: &ReducedDensityMatrix, which: Qubit) -> Matrix4<C64> {
    // q = 2·s₁ + s₂
    Matrix4::from_fn(|row, col| {
        let (a, b) = (row >> 1, row & 1);
        let (c, d) = (col >> 1, col & 1);
        match which {
            Qubit::First => rho.0[((c << 1) | b, (a << 1) | d)],
            Qubit::Second => rho.0[((a << 1) | d, (c << 1) | b)],
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PptSpectrum {
    /// Eigenvalues of the partial transpose, descending.
    pub eigenvalues: [f64; QUBIT_DIM],
    /// Σ |negative eigenvalues|
    pub negativity: f64,
    pub entangled: bool,
}

pub fn ppt_spectrum(rho: &ReducedDensityMatrix, which: Qubit) -> PptSpectrum {
    let pt = partial_transpose(rho, which);
    let pt = (pt + pt.adjoint()) * C64::new(0.5, 0.0);
    let mut ev: Vec<f64> = SymmetricEigen::new(pt).eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    let eigenvalues = [ev[0], ev[1], ev[2], ev[3]];
    let negativity = eigenvalues.iter().filter(|&&e| e < 0.0).fold(0.0, |acc, e| acc - e);
    PptSpectrum { eigenvalues, negativity, entangled: eigenvalues[3] < PPT_THRESHOLD }
}

/// −Σ pᵢ log₂ pᵢ over the eigenvalues of a Hermitian density matrix.
pub fn von_neumann_entropy(rho: &DMatrix<C64>) -> Result<f64> {
    if !rho.is_square() || rho.nrows() == 0 {
        return Err(Error::InvalidInput("density matrix must be square and nonempty".into()));
    }
    let herm = (rho + rho.adjoint()) * C64::new(0.5, 0.0);
    let mut entropy = 0.0;
    for &p in SymmetricEigen::new(herm).eigenvalues.iter() {
        if p < -1e-10 {
            return Err(Error::InvalidInput(format!("negative eigenvalue {p:.3e} in entropy")));
        }
        if p > 0.0 {
            entropy -= p * p.log2();
        }
    }
    Ok(entropy.max(0.0))
}

/// Reduced state of one qubit, tracing out the other.
pub fn one_qubit_marginal(rho: &ReducedDensityMatrix, keep: Qubit) -> Matrix2<C64> {
    Matrix2::from_fn(|i, j| {
        (0..2)
            .map(|k| match keep {
                Qubit::First => rho.0[((i << 1) | k, (j << 1) | k)],
                Qubit::Second => rho.0[((k << 1) | i, (k << 1) | j)],
            })
            .sum()
    })
}
