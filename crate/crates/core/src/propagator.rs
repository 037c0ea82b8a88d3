//! Time propagation of joint states.
//!
//! The primary route expands U(τ) = exp(−iHτ) in generalized Laguerre
//! polynomials of the Hamiltonian,
//!
//! U(τ) = (1 + iτ)^−(α+1) Σ_k (iτ / (1 + iτ))^k L_k^α(H),
//!
//! and evaluates the sum with the three-term recurrence acting on vectors.
//! The series is applied to a shifted and rescaled operator whose spectrum
//! lies in [0, x_cap]; the shift is undone with an analytic phase.
//!
//! The exact route diagonalizes H once and serves as the oracle.
//!
//! Both routes act on the Fock-level window [lo − 2, hi + 2] around the
//! support of the input: the Hamiltonian conserves the total excitation, so
//! every sector touched by the input lies inside that window.

use std::ops::Range;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::hamiltonian::Hamiltonian;
use crate::space::{JointState, SimParams, C64};

/// Upper end of the rescaled spectrum fed to the Laguerre series.
pub const DEFAULT_X_CAP: f64 = 32.0;

/// Cap on (spectral width) × (micro-step) per series application.
pub const MAX_WIDTH_TIME: f64 = 4.0;

/// Bound on successive step halvings within one macro-step.
pub const MAX_HALVINGS: u32 = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Laguerre,
    Exact,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Laguerre => "laguerre",
            Method::Exact => "exact",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "laguerre" => Some(Method::Laguerre),
            "exact" => Some(Method::Exact),
            _ => None,
        }
    }
}

/// Shift and scale mapping the Gershgorin interval [e_lo, e_hi] onto [0, x_cap].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralPrecondition {
    pub e_lo: f64,
    pub e_hi: f64,
    pub shift: f64,
    pub scale: f64,
    pub x_cap: f64,
}

impl SpectralPrecondition {
    pub fn from_bounds(e_lo: f64, e_hi: f64, x_cap: f64) -> Self {
        let width = e_hi - e_lo;
        let scale = if width > 0.0 { x_cap / width } else { 1.0 };
        SpectralPrecondition { e_lo, e_hi, shift: e_lo, scale, x_cap }
    }

    /// Bounds over the whole truncated space.
    pub fn for_hamiltonian(h: &Hamiltonian) -> Self {
        let (lo, hi) = h.gershgorin(0..h.dim());
        Self::from_bounds(lo, hi, DEFAULT_X_CAP)
    }

    /// Bounds over the rows of an index window.
    pub fn for_rows(h: &Hamiltonian, rows: Range<usize>) -> Self {
        let (lo, hi) = h.gershgorin(rows);
        Self::from_bounds(lo, hi, DEFAULT_X_CAP)
    }

    pub fn width(&self) -> f64 {
        self.e_hi - self.e_lo
    }

    /// Number of uniform micro-steps needed to cover `tau`.
    pub fn micro_steps(&self, tau: f64) -> usize {
        ((self.width() * tau.abs()) / MAX_WIDTH_TIME).ceil().max(1.0) as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PropagationReport {
    pub steps_taken: usize,
    /// Largest |‖ψ‖² − 1| seen after any step.
    pub max_norm_error: f64,
    pub step_halvings: u32,
}

impl PropagationReport {
    pub fn merge(&mut self, other: &PropagationReport) {
        self.steps_taken += other.steps_taken;
        self.max_norm_error = self.max_norm_error.max(other.max_norm_error);
        self.step_halvings += other.step_halvings;
    }
}

fn norm_error(v: &[C64]) -> f64 {
    (v.iter().map(|a| a.norm_sqr()).sum::<f64>() - 1.0).abs()
}

/// Index window of Fock levels [lo − 2, hi + 2] around the support of `state`.
fn support_window(h: &Hamiltonian, state: &JointState) -> Option<Range<usize>> {
    let (lo, hi) = state.fock_support()?;
    Some(h.level_rows(lo.saturating_sub(2), hi + 2))
}

/// One application of the truncated series on a window, for |scaled τ| small.
fn laguerre_series(
    h: &Hamiltonian,
    pre: &SpectralPrecondition,
    rows: &Range<usize>,
    x: &[C64],
    tau: f64,
    k_max: usize,
    alpha: f64,
) -> Vec<C64> {
    let n = x.len();
    let tau_s = tau / pre.scale;
    let one = C64::new(1.0, 0.0);
    let denom = C64::new(1.0, tau_s);
    let z = C64::new(0.0, tau_s) / denom;
    let c0 = (one / denom).powf(alpha + 1.0);

    // H' v = scale (H − shift) v
    let mut hv = vec![C64::new(0.0, 0.0); n];
    let mut apply_scaled = |v: &[C64], out: &mut Vec<C64>| {
        h.apply_window(rows, v, &mut hv);
        for i in 0..n {
            out[i] = (hv[i] - v[i] * pre.shift) * pre.scale;
        }
    };

    let mut prev: Vec<C64> = x.to_vec();
    let mut hprev = vec![C64::new(0.0, 0.0); n];
    apply_scaled(&prev, &mut hprev);
    let mut cur: Vec<C64> = (0..n).map(|i| prev[i] * (alpha + 1.0) - hprev[i]).collect();

    let mut coeff = c0 * z;
    let mut acc: Vec<C64> = (0..n).map(|i| prev[i] * c0 + cur[i] * coeff).collect();

    let mut hcur = vec![C64::new(0.0, 0.0); n];
    let mut next = vec![C64::new(0.0, 0.0); n];
    for k in 1..k_max {
        let kf = k as f64;
        apply_scaled(&cur, &mut hcur);
        let a = 2.0 * kf + alpha + 1.0;
        let b = kf + alpha;
        let inv = 1.0 / (kf + 1.0);
        for i in 0..n {
            next[i] = (cur[i] * a - hcur[i] - prev[i] * b) * inv;
        }
        coeff *= z;
        for i in 0..n {
            acc[i] += next[i] * coeff;
        }
        std::mem::swap(&mut prev, &mut cur);
        std::mem::swap(&mut cur, &mut next);
    }

    let phase = C64::new(0.0, -pre.shift * tau).exp();
    acc.iter_mut().for_each(|a| *a *= phase);
    acc
}

/// Laguerre step that also reports how many series applications it used and
/// the worst norm error it saw.
fn laguerre_step_counted(
    h: &Hamiltonian,
    state: &JointState,
    tau: f64,
    k_max: usize,
    alpha: f64,
) -> Result<(JointState, usize, f64)> {
    let Some(rows) = support_window(h, state) else {
        return Ok((state.clone(), 0, norm_error(state.amplitudes.as_slice())));
    };
    if tau == 0.0 {
        return Ok((state.clone(), 0, norm_error(state.amplitudes.as_slice())));
    }
    let pre = SpectralPrecondition::for_rows(h, rows.clone());
    let micro = pre.micro_steps(tau);
    let sub = tau / micro as f64;
    let tol = h.params.trace_tol;

    let mut window: Vec<C64> = state.amplitudes.as_slice()[rows.clone()].to_vec();
    // Norm carried by entries outside the window (zero for states built here).
    let outside: f64 = state.norm_sqr() - window.iter().map(|a| a.norm_sqr()).sum::<f64>();
    let mut worst: f64 = 0.0;
    for _ in 0..micro {
        window = laguerre_series(h, &pre, &rows, &window, sub, k_max, alpha);
        let err = (window.iter().map(|a| a.norm_sqr()).sum::<f64>() + outside - 1.0).abs();
        worst = worst.max(err);
        if !(err <= tol) {
            return Err(Error::StepTooLarge { norm_error: err, tolerance: tol });
        }
    }
    let mut out = state.clone();
    out.amplitudes.as_mut_slice()[rows].copy_from_slice(&window);
    Ok((out, micro, worst))
}

/// Advances `state` by `tau` with the truncated Laguerre expansion.
///
/// The step is split into uniform micro-steps so that the spectral width of
/// the occupied window times each micro-step stays below [`MAX_WIDTH_TIME`].
/// Fails with [`Error::StepTooLarge`] if the norm drifts by more than the
/// Hamiltonian's `trace_tol`.
pub fn laguerre_step(
    h: &Hamiltonian,
    state: &JointState,
    tau: f64,
    k_max: usize,
    alpha: f64,
) -> Result<JointState> {
    laguerre_step_counted(h, state, tau, k_max, alpha).map(|(s, _, _)| s)
}

/// Eigendecomposition H = V Λ Vᵀ of the full truncated Hamiltonian.
#[derive(Debug, Clone)]
pub struct ExactPropagator {
    pub eigenvalues: DVector<f64>,
    pub eigenvectors: DMatrix<f64>,
}

impl ExactPropagator {
    pub fn new(h: &Hamiltonian) -> Result<Self> {
        let eig = SymmetricEigen::try_new(h.matrix.clone(), f64::EPSILON, 0)
            .ok_or_else(|| Error::Numerical("Hamiltonian eigendecomposition did not converge".into()))?;
        if eig.eigenvalues.iter().any(|e| !e.is_finite()) {
            return Err(Error::Numerical("non-finite eigenvalue".into()));
        }
        Ok(ExactPropagator { eigenvalues: eig.eigenvalues, eigenvectors: eig.eigenvectors })
    }

    /// Eigen-basis coefficients Vᵀ ψ.
    fn coefficients(&self, state: &JointState) -> Vec<C64> {
        let v = &self.eigenvectors;
        let nz: Vec<(usize, C64)> = state
            .amplitudes
            .iter()
            .enumerate()
            .filter(|(_, a)| a.norm_sqr() > 0.0)
            .map(|(i, a)| (i, *a))
            .collect();
        (0..v.ncols())
            .map(|k| nz.iter().map(|&(i, a)| a * v[(i, k)]).sum())
            .collect()
    }

    fn assemble(&self, coeffs: &[C64], t: f64, rows: Range<usize>, n_fock: usize) -> JointState {
        let phased: Vec<C64> = coeffs
            .iter()
            .zip(self.eigenvalues.iter())
            .map(|(c, &e)| c * C64::new(0.0, -e * t).exp())
            .collect();
        let mut out = JointState::zeros(n_fock);
        for i in rows {
            out.amplitudes[i] = self.eigenvectors.row(i).iter().zip(&phased).map(|(v, c)| c * *v).sum();
        }
        out
    }

    /// V e^{−iΛt} Vᵀ ψ, evaluated on the support window of ψ.
    pub fn apply(&self, h: &Hamiltonian, state: &JointState, t: f64) -> JointState {
        match support_window(h, state) {
            Some(rows) => self.assemble(&self.coefficients(state), t, rows, state.n_fock),
            None => state.clone(),
        }
    }

    /// V e^{−iΛt} Vᵀ ψ on every row of the truncated space.
    pub fn apply_full(&self, state: &JointState, t: f64) -> JointState {
        self.assemble(&self.coefficients(state), t, 0..state.dim(), state.n_fock)
    }
}

/// One-shot exact propagation: diagonalizes `h` and applies e^{−iHt}.
pub fn exact_propagate(h: &Hamiltonian, state: &JointState, t: f64) -> Result<JointState> {
    Ok(ExactPropagator::new(h)?.apply(h, state, t))
}

/// A propagation route prepared for a given Hamiltonian.
#[derive(Debug, Clone)]
pub enum Propagator {
    Laguerre { k_max: usize, alpha: f64 },
    Exact(ExactPropagator),
}

impl Propagator {
    pub fn prepare(h: &Hamiltonian, method: Method, params: &SimParams) -> Result<Self> {
        Ok(match method {
            Method::Laguerre => Propagator::Laguerre { k_max: params.k_max, alpha: params.alpha },
            Method::Exact => Propagator::Exact(ExactPropagator::new(h)?),
        })
    }

    /// Evolves `state` over `t_grid`, handing each grid state to `visit`.
    pub fn evolve_with<F>(
        &self,
        h: &Hamiltonian,
        state: &JointState,
        t_grid: &[f64],
        mut visit: F,
    ) -> Result<PropagationReport>
    where
        F: FnMut(usize, &JointState) -> Result<()>,
    {
        validate_grid(t_grid)?;
        let tol = h.params.trace_tol;
        let initial_error = norm_error(state.amplitudes.as_slice());
        if initial_error > tol {
            return Err(Error::InvalidInput(format!(
                "initial state not normalized: |norm^2 - 1| = {initial_error:.3e}"
            )));
        }
        let mut report = PropagationReport { max_norm_error: initial_error, ..Default::default() };
        visit(0, state)?;

        match self {
            Propagator::Exact(exact) => {
                let Some(rows) = support_window(h, state) else {
                    for i in 1..t_grid.len() {
                        visit(i, state)?;
                    }
                    return Ok(report);
                };
                let coeffs = exact.coefficients(state);
                for (i, &t) in t_grid.iter().enumerate().skip(1) {
                    let s = exact.assemble(&coeffs, t, rows.clone(), state.n_fock);
                    report.steps_taken += 1;
                    report.max_norm_error = report.max_norm_error.max(norm_error(s.amplitudes.as_slice()));
                    visit(i, &s)?;
                }
            }
            Propagator::Laguerre { k_max, alpha } => {
                let mut current = state.clone();
                let mut level: u32 = 0;
                for i in 1..t_grid.len() {
                    let span = t_grid[i] - t_grid[i - 1];
                    loop {
                        match subdivided_step(h, &current, span, 1usize << level, *k_max, *alpha) {
                            Ok((next, micro, worst)) => {
                                report.steps_taken += micro;
                                report.max_norm_error = report.max_norm_error.max(worst);
                                current = next;
                                break;
                            }
                            Err(Error::StepTooLarge { norm_error, .. }) => {
                                if level >= MAX_HALVINGS {
                                    return Err(Error::Divergence {
                                        t: t_grid[i - 1],
                                        norm_error,
                                        halvings: level,
                                    });
                                }
                                level += 1;
                                report.step_halvings += 1;
                            }
                            Err(e) => return Err(e),
                        }
                    }
                    visit(i, &current)?;
                }
            }
        }
        Ok(report)
    }
}

fn subdivided_step(
    h: &Hamiltonian,
    state: &JointState,
    span: f64,
    pieces: usize,
    k_max: usize,
    alpha: f64,
) -> Result<(JointState, usize, f64)> {
    let sub = span / pieces as f64;
    let mut current = state.clone();
    let mut micro = 0;
    let mut worst: f64 = 0.0;
    for _ in 0..pieces {
        let (next, m, w) = laguerre_step_counted(h, &current, sub, k_max, alpha)?;
        current = next;
        micro += m;
        worst = worst.max(w);
    }
    Ok((current, micro, worst))
}

fn validate_grid(t_grid: &[f64]) -> Result<()> {
    match t_grid.first() {
        None => return Err(Error::InvalidInput("empty time grid".into())),
        Some(&t0) if t0 != 0.0 => {
            return Err(Error::InvalidInput(format!("time grid must start at 0, got {t0}")))
        }
        _ => {}
    }
    if t_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidInput("time grid must be strictly increasing".into()));
    }
    Ok(())
}

/// States at every grid time, plus the propagation report.
pub fn evolve(
    h: &Hamiltonian,
    state: &JointState,
    t_grid: &[f64],
    method: Method,
    params: &SimParams,
) -> Result<(Vec<JointState>, PropagationReport)> {
    let propagator = Propagator::prepare(h, method, params)?;
    let mut states = Vec::with_capacity(t_grid.len());
    let report = propagator.evolve_with(h, state, t_grid, |_, s| {
        states.push(s.clone());
        Ok(())
    })?;
    Ok((states, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{build_hamiltonian, excitation_blocks};
    use crate::space::{encode, excitation_number, make_initial_joint, QubitPairState, SpinConvention};
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn fig1_params() -> SimParams {
        SimParams::default()
    }

    fn random_state(n_fock: usize, seed: u64) -> JointState {
        // xorshift keeps this test-local and deterministic
        let mut s = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) | 1;
        let mut next = || {
            s ^= s << 13;
            s ^= s >> 7;
            s ^= s << 17;
            (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let mut v = DVector::from_fn(4 * n_fock, |_, _| C64::new(next(), next()));
        let norm = v.norm();
        v.unscale_mut(norm);
        JointState::from_amplitudes(n_fock, v).unwrap()
    }

    /// exp(−iHt)ψ sector by sector, using 4×4 eigendecompositions only.
    fn block_propagate(h: &Hamiltonian, state: &JointState, t: f64) -> JointState {
        let mut out = JointState::zeros(state.n_fock);
        for sector in excitation_blocks(h) {
            let eig = SymmetricEigen::new(sector.block.clone());
            let n = sector.indices.len();
            let x: Vec<C64> = sector.indices.iter().map(|&i| state.amplitudes[i]).collect();
            for a in 0..n {
                let mut acc = C64::new(0.0, 0.0);
                for k in 0..n {
                    let ck: C64 = (0..n).map(|b| x[b] * eig.eigenvectors[(b, k)]).sum();
                    acc += ck * eig.eigenvectors[(a, k)] * C64::new(0.0, -eig.eigenvalues[k] * t).exp();
                }
                out.amplitudes[sector.indices[a]] = acc;
            }
        }
        out
    }

    #[test]
    fn zero_step_is_identity() {
        let h = build_hamiltonian(&fig1_params(), 5).unwrap();
        let s = random_state(5, 3);
        assert_eq!(laguerre_step(&h, &s, 0.0, 20, 0.0).unwrap(), s);
        assert_eq!(exact_propagate(&h, &s, 0.0).unwrap().distance(&s) < 1e-13, true);
    }

    #[test]
    fn diagonal_phase() {
        let p = SimParams { g0: 0.0, omega: 0.0, spin_convention: SpinConvention::Half, ..fig1_params() };
        let h = build_hamiltonian(&p, 3).unwrap();
        let s = make_initial_joint(&QubitPairState::product_11(), 0, 3).unwrap();
        let out = exact_propagate(&h, &s, PI / 2.0).unwrap();
        assert!((out.amplitudes[encode(0, 3)] - C64::new(-1.0, 0.0)).norm() < 1e-14);
        let lag = laguerre_step(&h, &s, PI / 2.0, 20, 0.0).unwrap();
        assert!(lag.distance(&out) < 1e-12);
    }

    #[test]
    fn eigenvectors_pick_up_phase() {
        let h = build_hamiltonian(&SimParams { omega: 1.5, ..fig1_params() }, 6).unwrap();
        let exact = ExactPropagator::new(&h).unwrap();
        for k in [0, 5, 11, 17, 23] {
            let v = exact.eigenvectors.column(k).map(|x| C64::new(x, 0.0));
            let state = JointState::from_amplitudes(6, v).unwrap();
            for tau in [0.05, 0.7, 3.3] {
                let out = laguerre_step(&h, &state, tau, 20, 0.0).unwrap();
                let phase = C64::new(0.0, -exact.eigenvalues[k] * tau).exp();
                let expected = JointState::from_amplitudes(6, state.amplitudes.map(|a| a * phase)).unwrap();
                assert!(out.distance(&expected) < 1e-10, "k={k} tau={tau}");
            }
        }
    }

    #[test]
    fn fig1_laguerre_matches_exact() {
        let p = SimParams { temperature: 2.0, ..fig1_params() };
        let h = build_hamiltonian(&p, 10).unwrap();
        let exact = ExactPropagator::new(&h).unwrap();
        let s0 = make_initial_joint(&QubitPairState::product_11(), 4, 10).unwrap();
        let grid: Vec<f64> = (0..=200).map(|i| i as f64 * 0.1).collect();
        let (states, report) = evolve(&h, &s0, &grid, Method::Laguerre, &p).unwrap();
        assert!(report.max_norm_error <= p.trace_tol);
        for (t, s) in grid.iter().zip(&states) {
            assert!(s.distance(&exact.apply(&h, &s0, *t)) < 1e-9, "t={t}");
        }
    }

    #[test]
    fn block_oracle_agrees_with_full_decomposition() {
        let p = SimParams { omega: 2.0, g0: 1.7, ..fig1_params() };
        let h = build_hamiltonian(&p, 9).unwrap();
        let exact = ExactPropagator::new(&h).unwrap();
        let s = random_state(9, 11);
        for t in [0.3, 1.424, 7.0] {
            let full = exact.apply_full(&s, t);
            assert!(full.distance(&block_propagate(&h, &s, t)) < 1e-12, "t={t}");
        }
    }

    #[test]
    fn windowed_exact_matches_full_rows() {
        let h = build_hamiltonian(&fig1_params(), 12).unwrap();
        let exact = ExactPropagator::new(&h).unwrap();
        let s = make_initial_joint(&QubitPairState::bell_00_11(), 6, 12).unwrap();
        for t in [0.5, 4.0] {
            assert!(exact.apply(&h, &s, t).distance(&exact.apply_full(&s, t)) < 1e-12);
        }
    }

    #[test]
    fn single_point_grid() {
        let p = fig1_params();
        let h = build_hamiltonian(&p, 4).unwrap();
        let s = make_initial_joint(&QubitPairState::product_11(), 1, 4).unwrap();
        let (states, report) = evolve(&h, &s, &[0.0], Method::Laguerre, &p).unwrap();
        assert_eq!(states, vec![s]);
        assert_eq!(report.steps_taken, 0);
    }

    #[test]
    fn excitation_conserved_along_trajectory() {
        let p = SimParams { omega: 5.0, temperature: 5.0, ..fig1_params() };
        let h = build_hamiltonian(&p, 8).unwrap();
        let s0 = make_initial_joint(&QubitPairState::bell_01_10(), 3, 8).unwrap();
        let n0 = excitation_number(&s0);
        let grid: Vec<f64> = (0..=400).map(|i| i as f64 * 0.05).collect();
        for method in [Method::Laguerre, Method::Exact] {
            let (states, _) = evolve(&h, &s0, &grid, method, &p).unwrap();
            for s in &states {
                assert!((excitation_number(s) - n0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn rejects_bad_grids() {
        let p = fig1_params();
        let h = build_hamiltonian(&p, 4).unwrap();
        let s = make_initial_joint(&QubitPairState::product_11(), 0, 4).unwrap();
        for grid in [vec![], vec![0.1, 0.2], vec![0.0, 0.2, 0.2]] {
            assert!(matches!(evolve(&h, &s, &grid, Method::Laguerre, &p), Err(Error::InvalidInput(_))));
        }
    }

    #[test]
    fn step_too_large_when_series_truncated_hard() {
        // k_max = 1 cannot hold the trace criterion over a finite step.
        let p = fig1_params();
        let h = build_hamiltonian(&p, 4).unwrap();
        let s = make_initial_joint(&QubitPairState::product_11(), 0, 4).unwrap();
        let err = laguerre_step(&h, &s, 0.5, 1, 0.0).unwrap_err();
        assert!(matches!(err, Error::StepTooLarge { .. }));
    }

    #[test]
    fn halving_recovers_or_reports_divergence() {
        let p = SimParams { k_max: 3, ..fig1_params() };
        let h = build_hamiltonian(&p, 4).unwrap();
        let s = make_initial_joint(&QubitPairState::product_11(), 0, 4).unwrap();
        match evolve(&h, &s, &[0.0, 0.5], Method::Laguerre, &p) {
            Ok((_, report)) => {
                assert!(report.step_halvings > 0);
                assert!(report.max_norm_error <= p.trace_tol);
            }
            Err(e) => assert!(matches!(e, Error::Divergence { .. })),
        }
        let p1 = SimParams { k_max: 1, ..fig1_params() };
        let h1 = build_hamiltonian(&p1, 4).unwrap();
        assert!(matches!(
            evolve(&h1, &s, &[0.0, 0.5], Method::Laguerre, &p1),
            Err(Error::Divergence { .. })
        ));
    }

    #[test]
    fn nonzero_alpha_also_converges() {
        let p = SimParams { alpha: 1.0, ..fig1_params() };
        let h = build_hamiltonian(&p, 6).unwrap();
        let s = random_state(6, 5);
        let out = laguerre_step(&h, &s, 1.0, 20, 1.0).unwrap();
        assert!(out.distance(&exact_propagate(&h, &s, 1.0).unwrap()) < 1e-10);
    }

    #[test]
    fn precondition_maps_onto_cap() {
        let h = build_hamiltonian(&fig1_params(), 7).unwrap();
        let pre = SpectralPrecondition::for_hamiltonian(&h);
        assert!(pre.e_lo <= pre.e_hi && pre.scale > 0.0);
        assert!(((pre.e_hi - pre.shift) * pre.scale - pre.x_cap).abs() < 1e-12);
        assert_eq!(pre.micro_steps(0.0), 1);
        assert_eq!(pre.micro_steps(4.0 / pre.width() * 2.5), 3);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn laguerre_matches_exact_random(
            mu0 in 0.0f64..5.0, omega in 0.0f64..5.0, g0 in 0.0f64..5.0,
            n_fock in 3usize..=12, seed in any::<u64>(), tau in 0.001f64..1.0,
        ) {
            let p = SimParams { mu0, omega, g0, ..SimParams::default() };
            let h = build_hamiltonian(&p, n_fock).unwrap();
            let s = random_state(n_fock, seed);
            let lag = laguerre_step(&h, &s, tau, 20, 0.0).unwrap();
            let exact = exact_propagate(&h, &s, tau).unwrap();
            prop_assert!(lag.distance(&exact) < 1e-9);
        }

        #[test]
        fn composition(t1 in 0.01f64..3.0, t2 in 0.01f64..3.0, seed in any::<u64>()) {
            let p = SimParams { omega: 2.0, ..SimParams::default() };
            let h = build_hamiltonian(&p, 8).unwrap();
            let s = random_state(8, seed);
            for method in [Method::Laguerre, Method::Exact] {
                let (a, _) = evolve(&h, &s, &[0.0, t1, t1 + t2], method, &p).unwrap();
                let (b, _) = evolve(&h, &s, &[0.0, t1 + t2], method, &p).unwrap();
                prop_assert!(a[2].distance(&b[1]) < 1e-9);
            }
        }
    }
}
