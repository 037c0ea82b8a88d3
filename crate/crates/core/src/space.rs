//! Basis conventions and state containers.
//!
//! The joint space is (two qubits) ⊗ (truncated Fock space of the bath mode).
//! A basis vector |q, m⟩ lives at index `4 * m + q`, where the qubit index
//! runs over |00⟩, |01⟩, |10⟩, |11⟩ (first label = qubit 1) and `m` is the
//! boson occupation. |1⟩ is the excited state of a qubit.

use nalgebra::{DVector, Matrix4, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Number of two-qubit basis states.
pub const QUBIT_DIM: usize = 4;

/// Qubit excitations of |00⟩, |01⟩, |10⟩, |11⟩.
pub const QUBIT_EXCITATION: [usize; QUBIT_DIM] = [0, 1, 1, 2];

/// Diagonal of S^z₁ + S^z₂ with S^z = diag(+1/2, −1/2) on (|1⟩, |0⟩).
pub const SZ_TOTAL: [f64; QUBIT_DIM] = [-1.0, 0.0, 0.0, 1.0];

/// Tolerance on the norm of a two-qubit input state.
pub const NORM_TOL: f64 = 1e-12;

pub fn encode(m: usize, q: usize) -> usize {
    debug_assert!(q < QUBIT_DIM);
    QUBIT_DIM * m + q
}

pub fn decode(index: usize) -> (usize, usize) {
    (index / QUBIT_DIM, index % QUBIT_DIM)
}

/// Total excitation (boson occupation plus excited qubits) of a basis index.
pub fn excitation_of(index: usize) -> usize {
    let (m, q) = decode(index);
    m + QUBIT_EXCITATION[q]
}

/// Normalization of the single-qubit S^z entering the field term μ₀(S^z₁ + S^z₂).
///
/// `Pauli` takes S^z = [S⁺, S⁻] = diag(+1, −1), so each excited qubit adds μ₀
/// and the qubit splitting 2μ₀ is resonant with the 2g boson quantum at μ₀ = g.
/// `Half` takes S^z = diag(+1/2, −1/2). Observables always report
/// ⟨S^z₁ + S^z₂⟩ in the half-spin normalization (see [`SZ_TOTAL`]).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SpinConvention {
    #[default]
    Pauli,
    Half,
}

impl SpinConvention {
    /// Eigenvalue of S^z₁ + S^z₂ on qubit basis state `q`.
    pub fn field_weight(self, q: usize) -> f64 {
        let half = SZ_TOTAL[q];
        match self {
            SpinConvention::Pauli => 2.0 * half,
            SpinConvention::Half => half,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SpinConvention::Pauli => "pauli",
            SpinConvention::Half => "half",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "pauli" => Some(SpinConvention::Pauli),
            "half" => Some(SpinConvention::Half),
            _ => None,
        }
    }
}

/// Physical and numerical parameters. Energies in units of g, times in 1/g.
#[derive(Debug, Clone, PartialEq)]
pub struct SimParams {
    /// Field coupling μ₀.
    pub mu0: f64,
    /// Direct qubit-qubit flip-flop coupling Ω.
    pub omega: f64,
    /// Qubit-bath coupling g₀.
    pub g0: f64,
    /// Intra-bath coupling g; the boson quantum is 2g.
    pub g: f64,
    pub temperature: f64,
    /// Thermal probability mass allowed beyond the Fock cutoff.
    pub cutoff_tol: f64,
    /// Laguerre truncation order.
    pub k_max: usize,
    /// Laguerre family parameter.
    pub alpha: f64,
    pub dt: f64,
    pub t_max: f64,
    /// Per-step bound on |‖ψ‖² − 1|.
    pub trace_tol: f64,
    pub spin_convention: SpinConvention,
}

impl Default for SimParams {
    fn default() -> Self {
        SimParams {
            mu0: 2.0,
            omega: 0.0,
            g0: 1.0,
            g: 1.0,
            temperature: 0.2,
            cutoff_tol: 1e-8,
            k_max: 20,
            alpha: 0.0,
            dt: 0.01,
            t_max: 20.0,
            trace_tol: 1e-12,
            spin_convention: SpinConvention::Pauli,
        }
    }
}

impl SimParams {
    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.mu0,
            self.omega,
            self.g0,
            self.g,
            self.temperature,
            self.cutoff_tol,
            self.alpha,
            self.dt,
            self.t_max,
            self.trace_tol,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidInput("parameters must be finite".into()));
        }
        if self.g <= 0.0 {
            return Err(Error::InvalidInput(format!("g must be positive, got {}", self.g)));
        }
        if self.temperature <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "temperature must be positive, got {}",
                self.temperature
            )));
        }
        if !(self.cutoff_tol > 0.0 && self.cutoff_tol < 1.0) {
            return Err(Error::InvalidInput(format!(
                "cutoff_tol must lie in (0, 1), got {}",
                self.cutoff_tol
            )));
        }
        if self.k_max < 1 {
            return Err(Error::InvalidInput("k_max must be at least 1".into()));
        }
        if self.alpha <= -1.0 {
            return Err(Error::InvalidInput(format!("alpha must exceed -1, got {}", self.alpha)));
        }
        if self.dt <= 0.0 {
            return Err(Error::InvalidInput(format!("dt must be positive, got {}", self.dt)));
        }
        // t_max = 0 is accepted and gives a single-sample grid.
        if self.t_max < 0.0 {
            return Err(Error::InvalidInput(format!("t_max must be >= 0, got {}", self.t_max)));
        }
        if self.trace_tol <= 0.0 {
            return Err(Error::InvalidInput("trace_tol must be positive".into()));
        }
        Ok(())
    }

    /// Uniform grid 0, dt, 2dt, ... up to t_max (last point snapped when within dt/2).
    pub fn time_grid(&self) -> Vec<f64> {
        let steps = (self.t_max / self.dt).round() as usize;
        (0..=steps).map(|i| i as f64 * self.dt).collect()
    }
}

/// Initial pure state a00|00⟩ + a11|11⟩ + a01|01⟩ + a10|10⟩.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitPairState {
    pub a00: C64,
    pub a11: C64,
    pub a01: C64,
    pub a10: C64,
}

impl QubitPairState {
    pub fn new(a00: C64, a11: C64, a01: C64, a10: C64) -> Result<Self> {
        let state = QubitPairState { a00, a11, a01, a10 };
        let norm_sqr = state.norm_sqr();
        if (norm_sqr - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidInput(format!(
                "qubit amplitudes are not normalized: |psi|^2 = {norm_sqr}"
            )));
        }
        Ok(state)
    }

    /// |11⟩: both qubits excited.
    pub fn product_11() -> Self {
        let zero = C64::new(0.0, 0.0);
        QubitPairState { a00: zero, a11: C64::new(1.0, 0.0), a01: zero, a10: zero }
    }

    /// (|01⟩ + |10⟩)/√2
    pub fn bell_01_10() -> Self {
        let zero = C64::new(0.0, 0.0);
        let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        QubitPairState { a00: zero, a11: zero, a01: h, a10: h }
    }

    /// (|00⟩ + |11⟩)/√2
    pub fn bell_00_11() -> Self {
        let zero = C64::new(0.0, 0.0);
        let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        QubitPairState { a00: h, a11: h, a01: zero, a10: zero }
    }

    /// Amplitudes in basis order |00⟩, |01⟩, |10⟩, |11⟩.
    pub fn amplitudes(&self) -> [C64; QUBIT_DIM] {
        [self.a00, self.a01, self.a10, self.a11]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes().iter().map(|a| a.norm_sqr()).sum()
    }
}

/// State vector on the truncated joint space.
#[derive(Debug, Clone, PartialEq)]
pub struct JointState {
    pub n_fock: usize,
    pub amplitudes: DVector<C64>,
}

impl JointState {
    pub fn zeros(n_fock: usize) -> Self {
        JointState { n_fock, amplitudes: DVector::zeros(QUBIT_DIM * n_fock) }
    }

    pub fn from_amplitudes(n_fock: usize, amplitudes: DVector<C64>) -> Result<Self> {
        if amplitudes.len() != QUBIT_DIM * n_fock {
            return Err(Error::InvalidInput(format!(
                "expected {} amplitudes for n_fock={n_fock}, got {}",
                QUBIT_DIM * n_fock,
                amplitudes.len()
            )));
        }
        Ok(JointState { n_fock, amplitudes })
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitude(&self, m: usize, q: usize) -> C64 {
        self.amplitudes[encode(m, q)]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Lowest and highest Fock levels carrying a nonzero amplitude.
    pub fn fock_support(&self) -> Option<(usize, usize)> {
        let first = self.amplitudes.iter().position(|a| *a != C64::new(0.0, 0.0))?;
        let last = self.amplitudes.iter().rposition(|a| *a != C64::new(0.0, 0.0))?;
        Some((first / QUBIT_DIM, last / QUBIT_DIM))
    }

    /// Euclidean distance to another state of the same dimension.
    pub fn distance(&self, other: &JointState) -> f64 {
        (&self.amplitudes - &other.amplitudes).norm()
    }
}

/// Embeds `psi` at Fock level `m`: |Ψ_m(0)⟩ = |ψ⟩|m⟩.
pub fn make_initial_joint(psi: &QubitPairState, m: usize, n_fock: usize) -> Result<JointState> {
    if m + 3 > n_fock {
        return Err(Error::Truncation(format!(
            "Fock level {m} needs n_fock >= {}, got {n_fock}",
            m + 3
        )));
    }
    let norm_sqr = psi.norm_sqr();
    if (norm_sqr - 1.0).abs() > NORM_TOL {
        return Err(Error::InvalidInput(format!(
            "qubit amplitudes are not normalized: |psi|^2 = {norm_sqr}"
        )));
    }
    let mut state = JointState::zeros(n_fock);
    for (q, a) in psi.amplitudes().into_iter().enumerate() {
        state.amplitudes[encode(m, q)] = a;
    }
    Ok(state)
}

/// ⟨N_exc⟩ = Σ |ψ_i|² (m_i + qubit excitation of q_i) / ⟨ψ|ψ⟩.
///
/// Dividing by the norm keeps rounding-level norm loss (bounded separately by
/// the trace criterion) out of the conservation check at large occupations.
pub fn excitation_number(state: &JointState) -> f64 {
    let weighted: f64 = state
        .amplitudes
        .iter()
        .enumerate()
        .map(|(i, a)| a.norm_sqr() * excitation_of(i) as f64)
        .sum();
    weighted / state.norm_sqr()
}

/// Two-qubit density matrix in the |00⟩, |01⟩, |10⟩, |11⟩ basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedDensityMatrix(pub Matrix4<C64>);

impl ReducedDensityMatrix {
    pub fn from_pure(psi: &QubitPairState) -> Self {
        let v = nalgebra::Vector4::from(psi.amplitudes());
        ReducedDensityMatrix(v * v.adjoint())
    }

    pub fn from_real_diagonal(diag: [f64; QUBIT_DIM]) -> Self {
        ReducedDensityMatrix(Matrix4::from_diagonal(&nalgebra::Vector4::from(
            diag.map(|d| C64::new(d, 0.0)),
        )))
    }

    pub fn matrix(&self) -> &Matrix4<C64> {
        &self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    pub fn hermiticity_error(&self) -> f64 {
        (self.0 - self.0.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> [f64; QUBIT_DIM] {
        let herm = (self.0 + self.0.adjoint()) * C64::new(0.5, 0.0);
        let mut ev: Vec<f64> = SymmetricEigen::new(herm).eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        [ev[0], ev[1], ev[2], ev[3]]
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    pub fn renormalized(&self) -> Self {
        ReducedDensityMatrix(self.0.unscale(self.trace()))
    }

    /// Population ⟨v|ρ|v⟩ of a two-qubit vector.
    pub fn population(&self, v: &[C64; QUBIT_DIM]) -> f64 {
        let v = nalgebra::Vector4::from(*v);
        (v.adjoint() * self.0 * v)[(0, 0)].re
    }

    /// Hermitian within 1e-12, trace 1 within `trace_tol`, eigenvalues ≥ −1e-10.
    pub fn check(&self, trace_tol: f64) -> Result<()> {
        let herm = self.hermiticity_error();
        if herm > 1e-12 {
            return Err(Error::Numerical(format!("reduced density matrix not Hermitian ({herm:.3e})")));
        }
        let trace = self.trace();
        if (trace - 1.0).abs() > trace_tol {
            return Err(Error::Numerical(format!("reduced density matrix trace {trace}")));
        }
        let min_eig = self.min_eigenvalue();
        if min_eig < -1e-10 {
            return Err(Error::Numerical(format!(
                "reduced density matrix not positive semidefinite (min eigenvalue {min_eig:.3e})"
            )));
        }
        Ok(())
    }
}
