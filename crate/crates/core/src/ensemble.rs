//! Thermal ensemble over bath Fock states and the reduced two-qubit dynamics.
//!
//! The bath starts in ρ_B = Σ_m ω_m |m⟩⟨m| with ω_m = e^{−2gm/T}/Z and
//! Z = 1/(1 − e^{−2g/T}). Each member |ψ⟩|m⟩ is evolved as a pure state and
//! the bath is traced out of the weighted sum.

use nalgebra::Matrix4;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hamiltonian::build_hamiltonian;
use crate::propagator::{Method, PropagationReport, Propagator};
use crate::space::{
    excitation_number, make_initial_joint, JointState, QubitPairState, ReducedDensityMatrix, SimParams, C64,
    QUBIT_DIM,
};

/// Members evolved concurrently before their contributions are summed.
const MEMBER_CHUNK: usize = 32;

#[derive(Debug, Clone, PartialEq)]
pub struct ThermalEnsemble {
    /// Highest retained initial Fock level m_C.
    pub m_cutoff: usize,
    /// ω_m for m = 0..=m_C, normalized by the full partition function.
    pub weights: Vec<f64>,
    /// Probability beyond m_C, discarded.
    pub tail_mass: f64,
}

/// Boltzmann weights of the bath mode, truncated at the smallest m_C whose
/// geometric tail e^{−2g(m_C+1)/T} is at most `cutoff_tol`.
pub fn thermal_weights(temperature: f64, g: f64, cutoff_tol: f64) -> Result<ThermalEnsemble> {
    if !(temperature > 0.0) || !temperature.is_finite() {
        return Err(Error::InvalidInput(format!("temperature must be positive, got {temperature}")));
    }
    if !(g > 0.0) || !g.is_finite() {
        return Err(Error::InvalidInput(format!("g must be positive, got {g}")));
    }
    if !(cutoff_tol > 0.0 && cutoff_tol < 1.0) {
        return Err(Error::InvalidInput(format!("cutoff_tol must lie in (0, 1), got {cutoff_tol}")));
    }
    let beta_e = 2.0 * g / temperature;
    let ratio = (-beta_e).exp();
    let ground = -(-beta_e).exp_m1();
    let tail = |m: usize| (-beta_e * (m + 1) as f64).exp();

    // Closed-form estimate, then nudged to the minimal solution.
    let mut m_cutoff = ((cutoff_tol.ln() / -beta_e).ceil() as i64 - 1).max(0) as usize;
    while tail(m_cutoff) > cutoff_tol {
        m_cutoff += 1;
    }
    while m_cutoff > 0 && tail(m_cutoff - 1) <= cutoff_tol {
        m_cutoff -= 1;
    }

    let weights: Vec<f64> = (0..=m_cutoff).map(|m| ground * ratio.powi(m as i32)).collect();
    Ok(ThermalEnsemble { m_cutoff, weights, tail_mass: tail(m_cutoff) })
}

/// Unweighted bath trace of a single pure joint state:
/// ρ[q, q′] = Σ_k Ψ[4k+q] conj(Ψ[4k+q′]).
fn member_trace(state: &JointState) -> Matrix4<C64> {
    let mut rho = Matrix4::<C64>::zeros();
    for block in state.amplitudes.as_slice().chunks_exact(QUBIT_DIM) {
        if block.iter().all(|a| a.norm_sqr() == 0.0) {
            continue;
        }
        for q in 0..QUBIT_DIM {
            for qp in 0..QUBIT_DIM {
                rho[(q, qp)] += block[q] * block[qp].conj();
            }
        }
    }
    rho
}

/// ρ_S = Σ_m w_m Tr_B |Ψ_m⟩⟨Ψ_m|, summed in member order.
pub fn partial_trace_bath(members: &[(f64, &JointState)]) -> ReducedDensityMatrix {
    let mut rho = Matrix4::<C64>::zeros();
    for (w, state) in members {
        rho += member_trace(state) * C64::new(*w, 0.0);
    }
    ReducedDensityMatrix(rho)
}

/// Reduced dynamics plus the bookkeeping needed to audit truncation.
#[derive(Debug, Clone)]
pub struct ReducedEvolution {
    pub ensemble: ThermalEnsemble,
    pub n_fock: usize,
    /// ρ_S(t), renormalized to unit trace.
    pub rhos: Vec<ReducedDensityMatrix>,
    /// Trace of ρ_S(t) before renormalization.
    pub raw_traces: Vec<f64>,
    pub report: PropagationReport,
    /// Largest |⟨N_exc⟩(t) − ⟨N_exc⟩(0)| over all members and samples.
    pub max_excitation_drift: f64,
    /// Smallest eigenvalue of any ρ_S(t).
    pub min_eigenvalue: f64,
    pub max_hermiticity_error: f64,
}

struct MemberRun {
    traces: Vec<Matrix4<C64>>,
    report: PropagationReport,
    drift: f64,
}

fn run_member(
    h: &crate::hamiltonian::Hamiltonian,
    propagator: &Propagator,
    psi0: &QubitPairState,
    m: usize,
    n_fock: usize,
    t_grid: &[f64],
) -> Result<MemberRun> {
    let state = make_initial_joint(psi0, m, n_fock)?;
    let n0 = excitation_number(&state);
    let mut traces = Vec::with_capacity(t_grid.len());
    let mut drift: f64 = 0.0;
    let report = propagator.evolve_with(h, &state, t_grid, |_, s| {
        drift = drift.max((excitation_number(s) - n0).abs());
        traces.push(member_trace(s));
        Ok(())
    })?;
    Ok(MemberRun { traces, report, drift })
}

/// Evolves every ensemble member and returns ρ_S at each grid time.
pub fn evolve_reduced(
    params: &SimParams,
    psi0: &QubitPairState,
    t_grid: &[f64],
    method: Method,
) -> Result<ReducedEvolution> {
    params.validate()?;
    let ensemble = thermal_weights(params.temperature, params.g, params.cutoff_tol)?;
    let n_fock = ensemble.m_cutoff + 3;
    let h = build_hamiltonian(params, n_fock)?;
    let propagator = Propagator::prepare(&h, method, params)?;

    let mut sums = vec![Matrix4::<C64>::zeros(); t_grid.len()];
    let mut report = PropagationReport::default();
    let mut max_drift: f64 = 0.0;
    let members: Vec<usize> = (0..=ensemble.m_cutoff).collect();
    for chunk in members.chunks(MEMBER_CHUNK) {
        let runs: Vec<Result<MemberRun>> = chunk
            .par_iter()
            .map(|&m| run_member(&h, &propagator, psi0, m, n_fock, t_grid))
            .collect();
        for (&m, run) in chunk.iter().zip(runs) {
            let run = run?;
            let w = C64::new(ensemble.weights[m], 0.0);
            for (acc, tr) in sums.iter_mut().zip(&run.traces) {
                *acc += tr * w;
            }
            report.merge(&run.report);
            max_drift = max_drift.max(run.drift);
        }
    }

    let limit = 10.0 * params.cutoff_tol;
    let mut rhos = Vec::with_capacity(t_grid.len());
    let mut raw_traces = Vec::with_capacity(t_grid.len());
    let mut min_eigenvalue = f64::INFINITY;
    let mut max_herm: f64 = 0.0;
    for sum in sums {
        let raw = ReducedDensityMatrix(sum);
        let trace = raw.trace();
        let deficit = (1.0 - trace).abs();
        if deficit > limit {
            return Err(Error::CutoffTooSmall { deficit, limit });
        }
        let rho = raw.renormalized();
        rho.check(params.trace_tol.max(1e-12))?;
        min_eigenvalue = min_eigenvalue.min(rho.min_eigenvalue());
        max_herm = max_herm.max(rho.hermiticity_error());
        rhos.push(rho);
        raw_traces.push(trace);
    }

    Ok(ReducedEvolution {
        ensemble,
        n_fock,
        rhos,
        raw_traces,
        report,
        max_excitation_drift: max_drift,
        min_eigenvalue,
        max_hermiticity_error: max_herm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::encode;
    use nalgebra::DMatrix;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn frozen_bath() {
        let e = thermal_weights(1e-6, 1.0, 1e-8).unwrap();
        assert_eq!(e.m_cutoff, 0);
        assert!((e.weights[0] - 1.0).abs() < 1e-15);
        assert_eq!(e.tail_mass, 0.0);
    }

    #[test]
    fn weights_at_t2() {
        let e = thermal_weights(2.0, 1.0, 1e-8).unwrap();
        let x = (-1.0f64).exp();
        assert!((e.weights[0] - (1.0 - x)).abs() < 1e-15);
        assert!((e.weights[1] - x * (1.0 - x)).abs() < 1e-15);
        assert!((e.weights[0] - 0.6321).abs() < 1e-4);
        assert!((e.weights[1] - 0.2325).abs() < 1e-4);
    }

    #[test]
    fn cutoff_at_t5() {
        // e^{−0.4(m+1)} ≤ 1e-8  ⇔  m + 1 ≥ 46.05
        assert_eq!(thermal_weights(5.0, 1.0, 1e-8).unwrap().m_cutoff, 46);
    }

    #[test]
    fn rejects_nonpositive_temperature() {
        assert!(matches!(thermal_weights(0.0, 1.0, 1e-8), Err(Error::InvalidInput(_))));
        assert!(matches!(thermal_weights(-2.0, 1.0, 1e-8), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn single_member_trace() {
        let s = make_initial_joint(&QubitPairState::product_11(), 0, 3).unwrap();
        let rho = partial_trace_bath(&[(1.0, &s)]);
        assert_eq!(rho, ReducedDensityMatrix::from_real_diagonal([0.0, 0.0, 0.0, 1.0]));
    }

    #[test]
    fn orthogonal_bath_states_kill_coherence() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut s = JointState::zeros(3);
        s.amplitudes[encode(0, 1)] = c(h);
        s.amplitudes[encode(1, 2)] = c(h);
        let rho = partial_trace_bath(&[(1.0, &s)]);
        let expected = ReducedDensityMatrix::from_real_diagonal([0.0, 0.5, 0.5, 0.0]);
        assert!((rho.0 - expected.0).iter().all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn matches_full_density_matrix_trace() {
        let n_fock = 5;
        let dim = 4 * n_fock;
        let mut seed = 0x2545_F491_4F6C_DD1Du64;
        let mut next = || {
            seed ^= seed << 13;
            seed ^= seed >> 7;
            seed ^= seed << 17;
            (seed >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let states: Vec<JointState> = (0..3)
            .map(|_| {
                let mut v = nalgebra::DVector::from_fn(dim, |_, _| C64::new(next(), next()));
                let n = v.norm();
                v.unscale_mut(n);
                JointState::from_amplitudes(n_fock, v).unwrap()
            })
            .collect();
        let weights = [0.5, 0.3, 0.2];

        // full ρ = Σ w |Ψ⟩⟨Ψ|, then Tr_B by explicit index blocks
        let mut full = DMatrix::<C64>::zeros(dim, dim);
        for (w, s) in weights.iter().zip(&states) {
            full += &s.amplitudes * s.amplitudes.adjoint() * c(*w);
        }
        let mut brute = Matrix4::<C64>::zeros();
        for q in 0..4 {
            for qp in 0..4 {
                for k in 0..n_fock {
                    brute[(q, qp)] += full[(encode(k, q), encode(k, qp))];
                }
            }
        }
        let members: Vec<(f64, &JointState)> = weights.iter().copied().zip(states.iter()).collect();
        let rho = partial_trace_bath(&members);
        assert!((rho.0 - brute).iter().all(|z| z.norm() < 1e-14));
    }

    #[test]
    fn decoupled_subsystem_stays_pure() {
        let p = SimParams { g0: 0.0, omega: 1.3, temperature: 2.0, ..SimParams::default() };
        let psi = QubitPairState::bell_01_10();
        let grid: Vec<f64> = (0..=50).map(|i| i as f64 * 0.1).collect();
        let run = evolve_reduced(&p, &psi, &grid, Method::Laguerre).unwrap();
        for rho in &run.rhos {
            let purity = (rho.0 * rho.0).trace().re;
            assert!((purity - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn swap_symmetry_preserved() {
        let p = SimParams { temperature: 2.0, omega: 2.0, ..SimParams::default() };
        let grid: Vec<f64> = (0..=40).map(|i| i as f64 * 0.25).collect();
        for psi in [QubitPairState::product_11(), QubitPairState::bell_01_10(), QubitPairState::bell_00_11()] {
            let run = evolve_reduced(&p, &psi, &grid, Method::Laguerre).unwrap();
            let swap = [0usize, 2, 1, 3];
            for rho in &run.rhos {
                for a in 0..4 {
                    for b in 0..4 {
                        assert!((rho.0[(a, b)] - rho.0[(swap[a], swap[b])]).norm() < 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn raw_trace_equals_retained_mass() {
        let p = SimParams { temperature: 5.0, ..SimParams::default() };
        let grid = [0.0, 0.5, 1.0];
        let run = evolve_reduced(&p, &QubitPairState::product_11(), &grid, Method::Laguerre).unwrap();
        let retained: f64 = run.ensemble.weights.iter().sum();
        for t in &run.raw_traces {
            assert!((t - retained).abs() < 1e-12);
        }
        assert!(run.min_eigenvalue > -1e-10);
        assert_eq!(run.n_fock, run.ensemble.m_cutoff + 3);
    }

    #[test]
    fn zero_temperature_limit_is_pure_simulation() {
        let p = SimParams { temperature: 1e-3, ..SimParams::default() };
        let grid: Vec<f64> = (0..=20).map(|i| i as f64 * 0.2).collect();
        let run = evolve_reduced(&p, &QubitPairState::product_11(), &grid, Method::Exact).unwrap();
        assert_eq!(run.ensemble.m_cutoff, 0);
        let h = build_hamiltonian(&p, 3).unwrap();
        let s0 = make_initial_joint(&QubitPairState::product_11(), 0, 3).unwrap();
        let (states, _) = crate::propagator::evolve(&h, &s0, &grid, Method::Laguerre, &p).unwrap();
        for (rho, s) in run.rhos.iter().zip(&states) {
            let pure = partial_trace_bath(&[(1.0, s)]);
            assert!((rho.0 - pure.0).iter().all(|z| z.norm() < 1e-10));
        }
    }
}
