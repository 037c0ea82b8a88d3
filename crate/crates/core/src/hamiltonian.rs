//! Total Hamiltonian H = H_S + H_SB + H_B on the truncated joint space,
//! in the thermodynamic limit of the bosonized bath:
//!
//! H_S  = μ₀(S^z₁ + S^z₂) + Ω(S⁺₁S⁻₂ + S⁻₁S⁺₂)
//! H_SB = g₀[(S⁺₁ + S⁺₂) b + (S⁻₁ + S⁻₂) b†]
//! H_B  = 2g b†b
//!
//! with b|m⟩ = √m |m−1⟩. All elements are real in the product basis, so the
//! matrix is stored as a real symmetric matrix.

use std::ops::Range;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::space::{decode, encode, excitation_of, SimParams, C64, QUBIT_DIM};

/// (lower, upper) qubit-state pairs joined by one qubit excitation.
const RAISING_PAIRS: [(usize, usize); 4] = [(0, 1), (0, 2), (1, 3), (2, 3)];

/// Compressed sparse rows of the Hamiltonian, used for matrix-vector products.
#[derive(Debug, Clone)]
struct Csr {
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl Csr {
    fn from_dense(m: &DMatrix<f64>) -> Self {
        let mut row_ptr = Vec::with_capacity(m.nrows() + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                let v = m[(i, j)];
                if v != 0.0 {
                    cols.push(j);
                    vals.push(v);
                }
            }
            row_ptr.push(cols.len());
        }
        Csr { row_ptr, cols, vals }
    }

    fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[span.clone()].iter().copied().zip(self.vals[span].iter().copied())
    }
}

#[derive(Debug, Clone)]
pub struct Hamiltonian {
    pub n_fock: usize,
    pub matrix: DMatrix<f64>,
    pub params: SimParams,
    csr: Csr,
}

pub fn build_hamiltonian(params: &SimParams, n_fock: usize) -> Result<Hamiltonian> {
    if n_fock < 3 {
        return Err(Error::InvalidInput(format!("n_fock must be at least 3, got {n_fock}")));
    }
    let dim = QUBIT_DIM * n_fock;
    let mut h = DMatrix::<f64>::zeros(dim, dim);
    for m in 0..n_fock {
        for q in 0..QUBIT_DIM {
            let i = encode(m, q);
            h[(i, i)] = params.mu0 * params.spin_convention.field_weight(q) + 2.0 * params.g * m as f64;
        }
        let (a, b) = (encode(m, 1), encode(m, 2));
        h[(a, b)] = params.omega;
        h[(b, a)] = params.omega;
        if m >= 1 {
            // ⟨q_hi, m−1| S⁺ b |q_lo, m⟩ = √m
            let amp = params.g0 * (m as f64).sqrt();
            for (lo, hi) in RAISING_PAIRS {
                let i = encode(m, lo);
                let j = encode(m - 1, hi);
                h[(i, j)] = amp;
                h[(j, i)] = amp;
            }
        }
    }
    let csr = Csr::from_dense(&h);
    Ok(Hamiltonian { n_fock, matrix: h, params: params.clone(), csr })
}

impl Hamiltonian {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Index range covering Fock levels `lo..=hi`.
    pub fn level_rows(&self, lo: usize, hi: usize) -> Range<usize> {
        encode(lo, 0)..encode(hi.min(self.n_fock - 1), 0) + QUBIT_DIM
    }

    /// `out = H x` restricted to the index window `rows`; `x` and `out` are
    /// indexed relative to `rows.start`. Columns outside the window are
    /// treated as zero.
    pub fn apply_window(&self, rows: &Range<usize>, x: &[C64], out: &mut [C64]) {
        debug_assert_eq!(x.len(), rows.len());
        debug_assert_eq!(out.len(), rows.len());
        for (k, i) in rows.clone().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for (j, v) in self.csr.row(i) {
                if rows.contains(&j) {
                    acc += x[j - rows.start] * v;
                }
            }
            out[k] = acc;
        }
    }

    /// Full-space product H x.
    pub fn apply(&self, x: &[C64]) -> Vec<C64> {
        let rows = 0..self.dim();
        let mut out = vec![C64::new(0.0, 0.0); x.len()];
        self.apply_window(&rows, x, &mut out);
        out
    }

    /// Gershgorin enclosure (lower, upper) of the discs of the given rows.
    pub fn gershgorin(&self, rows: Range<usize>) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in rows {
            let mut center = 0.0;
            let mut radius = 0.0;
            for (j, v) in self.csr.row(i) {
                if j == i {
                    center = v;
                } else {
                    radius += v.abs();
                }
            }
            lo = lo.min(center - radius);
            hi = hi.max(center + radius);
        }
        (lo, hi)
    }
}

/// One excitation-number sector of the Hamiltonian.
#[derive(Debug, Clone, PartialEq)]
pub struct Sector {
    pub excitation: usize,
    /// Joint-space indices, ascending.
    pub indices: Vec<usize>,
    pub block: DMatrix<f64>,
}

/// Partitions the joint index set by total excitation and extracts the dense
/// sub-blocks (each at most 4×4).
pub fn excitation_blocks(h: &Hamiltonian) -> Vec<Sector> {
    let max_exc = excitation_of(h.dim() - 1);
    let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); max_exc + 1];
    for i in 0..h.dim() {
        buckets[excitation_of(i)].push(i);
    }
    buckets
        .into_iter()
        .enumerate()
        .filter(|(_, idx)| !idx.is_empty())
        .map(|(excitation, indices)| {
            let n = indices.len();
            let block = DMatrix::from_fn(n, n, |a, b| h.matrix[(indices[a], indices[b])]);
            Sector { excitation, indices, block }
        })
        .collect()
}

/// Fock levels spanned by a sector.
pub fn sector_levels(sector: &Sector) -> (usize, usize) {
    let levels = sector.indices.iter().map(|&i| decode(i).0);
    (levels.clone().min().unwrap_or(0), levels.max().unwrap_or(0))
}
