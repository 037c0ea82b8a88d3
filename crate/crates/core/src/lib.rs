//! Reduced dynamics of two coupled spin qubits in a spin-star bath with XY
//! coupling, after bosonizing the bath in the thermodynamic limit.
//!
//! The bath becomes a single thermal boson mode. Each Boltzmann-weighted Fock
//! member is propagated with a Laguerre-polynomial expansion of exp(−iHt)
//! (or, as an oracle, exact diagonalization), and the bath is traced out to
//! give the two-qubit density matrix, from which purity, magnetization,
//! entropies, concurrence and the partial-transpose spectrum are computed.

pub mod config;
pub mod ensemble;
pub mod error;
pub mod hamiltonian;
pub mod observables;
pub mod propagator;
pub mod runner;
pub mod space;

pub use config::{InitialState, NamedState, RunConfig};
pub use ensemble::{evolve_reduced, partial_trace_bath, thermal_weights, ReducedEvolution, ThermalEnsemble};
pub use error::{Error, Result};
pub use hamiltonian::{build_hamiltonian, excitation_blocks, Hamiltonian, Sector};
pub use observables::{
    concurrence, one_qubit_marginal, ppt_spectrum, purity, sz_total, von_neumann_entropy, ObservableRecord,
    PptSpectrum, Qubit,
};
pub use propagator::{
    evolve, exact_propagate, laguerre_step, ExactPropagator, Method, PropagationReport, Propagator,
    SpectralPrecondition,
};
pub use runner::{run_experiment, run_preset, RunOutcome};
pub use space::{
    excitation_number, make_initial_joint, JointState, QubitPairState, ReducedDensityMatrix, SimParams,
    SpinConvention,
};
