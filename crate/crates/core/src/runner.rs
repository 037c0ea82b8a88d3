//! Experiment runs, figure presets, CSV trajectories and run manifests.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::config::{InitialState, NamedState, RunConfig};
use crate::ensemble::{evolve_reduced, ReducedEvolution};
use crate::error::{Error, Result};
use crate::observables::ObservableRecord;
use crate::propagator::Method;
use crate::space::SimParams;

pub const CSV_HEADER: &str =
    "t,purity,sz_total,entropy_1q,entropy_2q,concurrence,ppt_min_eig,negativity,raw_trace";

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub const PRESET_NAMES: [&str; 8] = ["fig1", "fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "fig8"];

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub csv_path: PathBuf,
    pub manifest_path: PathBuf,
    pub records: Vec<ObservableRecord>,
    pub evolution: ReducedEvolution,
}

/// Sampled time grid: every `stride`-th point of the parameter grid.
pub fn sample_grid(params: &SimParams, stride: usize) -> Vec<f64> {
    params.time_grid().into_iter().step_by(stride.max(1)).collect()
}

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_csv(path: &Path, records: &[ObservableRecord]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{CSV_HEADER}")?;
    for r in records {
        let cols = [
            r.t,
            r.purity,
            r.sz_total,
            r.entropy_one_qubit,
            r.entropy_two_qubit,
            r.concurrence,
            r.ppt_min_eig,
            r.negativity,
            r.raw_trace,
        ];
        let line: Vec<String> = cols.iter().map(|&v| fmt(v)).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    w.flush()?;
    Ok(())
}

pub fn manifest_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("manifest")
}

fn write_manifest(path: &Path, config: &RunConfig, evo: &ReducedEvolution, samples: usize) -> Result<()> {
    let p = &config.params;
    let psi = config.initial_state.resolve();
    let max_deficit = evo.raw_traces.iter().map(|t| (1.0 - t).abs()).fold(0.0, f64::max);
    let retained: f64 = evo.ensemble.weights.iter().sum();
    let mut entries: Vec<(&str, String)> = vec![
        ("tool", "spinstar".into()),
        ("version", VERSION.into()),
        ("method", config.method.name().into()),
        ("initial_state", config.initial_state.label().into()),
    ];
    for (name, a) in [("a00", psi.a00), ("a01", psi.a01), ("a10", psi.a10), ("a11", psi.a11)] {
        entries.push((name, format!("{} {}", fmt(a.re), fmt(a.im))));
    }
    entries.extend([
        ("mu0", fmt(p.mu0)),
        ("omega", fmt(p.omega)),
        ("g0", fmt(p.g0)),
        ("g", fmt(p.g)),
        ("temperature", fmt(p.temperature)),
        ("cutoff_tol", fmt(p.cutoff_tol)),
        ("k_max", p.k_max.to_string()),
        ("alpha", fmt(p.alpha)),
        ("dt", fmt(p.dt)),
        ("t_max", fmt(p.t_max)),
        ("trace_tol", fmt(p.trace_tol)),
        ("spin_convention", p.spin_convention.name().into()),
        ("sample_stride", config.sample_stride.to_string()),
        ("samples", samples.to_string()),
        ("m_cutoff", evo.ensemble.m_cutoff.to_string()),
        ("n_fock", evo.n_fock.to_string()),
        ("tail_mass", fmt(evo.ensemble.tail_mass)),
        ("retained_mass", fmt(retained)),
        ("steps_taken", evo.report.steps_taken.to_string()),
        ("max_norm_error", fmt(evo.report.max_norm_error)),
        ("step_halvings", evo.report.step_halvings.to_string()),
        ("max_excitation_drift", fmt(evo.max_excitation_drift)),
        ("min_rho_eigenvalue", fmt(evo.min_eigenvalue)),
        ("max_hermiticity_error", fmt(evo.max_hermiticity_error)),
        ("max_trace_deficit", fmt(max_deficit)),
    ]);
    let mut w = BufWriter::new(File::create(path)?);
    for (k, v) in entries {
        writeln!(w, "{k} = {v}")?;
    }
    w.flush()?;
    Ok(())
}

/// Simulates the configured run and computes observables, without writing files.
pub fn simulate(config: &RunConfig) -> Result<(Vec<ObservableRecord>, ReducedEvolution)> {
    let grid = sample_grid(&config.params, config.sample_stride);
    let psi = config.initial_state.resolve();
    let evo = evolve_reduced(&config.params, &psi, &grid, config.method)?;
    let records = grid
        .iter()
        .zip(evo.rhos.iter().zip(&evo.raw_traces))
        .map(|(&t, (rho, &raw))| ObservableRecord::compute(t, rho, raw))
        .collect::<Result<Vec<_>>>()?;
    Ok((records, evo))
}

/// Runs one configuration, writing the CSV trajectory and its manifest.
pub fn run_experiment(config: &RunConfig) -> Result<RunOutcome> {
    let (records, evolution) = simulate(config)?;
    let csv_path = config.output_path.clone();
    if let Some(dir) = csv_path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    write_csv(&csv_path, &records)?;
    let manifest_path = manifest_path(&csv_path);
    write_manifest(&manifest_path, config, &evolution, records.len())?;
    Ok(RunOutcome { csv_path, manifest_path, records, evolution })
}

/// One curve of a figure preset.
#[derive(Debug, Clone)]
pub struct PresetCurve {
    pub label: String,
    pub params: SimParams,
    pub state: NamedState,
}

fn curve(label: String, state: NamedState, f: impl FnOnce(&mut SimParams)) -> PresetCurve {
    // μ₀ = 2g throughout; defaults are g₀ = g, Ω = 0, gt ∈ [0, 20] at 0.01
    let mut params = SimParams { mu0: 2.0, g0: 1.0, omega: 0.0, g: 1.0, ..SimParams::default() };
    f(&mut params);
    PresetCurve { label, params, state }
}

/// Parameter sets of the figure presets; `None` for an unknown name.
pub fn preset_curves(name: &str) -> Option<Vec<PresetCurve>> {
    use NamedState::*;
    let temps = |fig: &str, state, ts: &[f64]| -> Vec<PresetCurve> {
        ts.iter().map(|&t| curve(format!("{fig}_T{t}"), state, |p| p.temperature = t)).collect()
    };
    let omegas = |fig: &str, state| -> Vec<PresetCurve> {
        [0.0, 2.0, 5.0]
            .iter()
            .map(|&o| {
                curve(format!("{fig}_omega{o}"), state, |p| {
                    p.temperature = 5.0;
                    p.omega = o;
                })
            })
            .collect()
    };
    let couplings = |fig: &str, state| -> Vec<PresetCurve> {
        [0.2, 1.0, 5.0]
            .iter()
            .map(|&g0| {
                curve(format!("{fig}_g0_{g0}"), state, |p| {
                    p.temperature = 5.0;
                    p.g0 = g0;
                })
            })
            .collect()
    };
    Some(match name {
        "fig1" => temps("fig1", Product11, &[0.2, 2.0, 10.0]),
        "fig2" => temps("fig2", Product11, &[0.2]),
        "fig3" => omegas("fig3", Product11),
        "fig4" => couplings("fig4", Product11),
        "fig5" => temps("fig5", Bell0110, &[2.0, 5.0, 20.0]),
        "fig6" => omegas("fig6", Bell0110),
        "fig7" => couplings("fig7", Bell0110),
        "fig8" => couplings("fig8", Bell0011),
        _ => return None,
    })
}

/// Runs every curve of a preset into `outdir/<label>.csv`.
pub fn run_preset(name: &str, outdir: &Path, method: Method) -> Result<Vec<RunOutcome>> {
    let curves = preset_curves(name).ok_or_else(|| Error::Config {
        line: 0,
        message: format!("unknown preset {name:?}; expected one of {}", PRESET_NAMES.join(", ")),
    })?;
    fs::create_dir_all(outdir)?;
    curves
        .into_iter()
        .map(|c| {
            let config = RunConfig {
                params: c.params,
                initial_state: InitialState::Named(c.state),
                method,
                output_path: outdir.join(format!("{}.csv", c.label)),
                sample_stride: 1,
            };
            run_experiment(&config)
        })
        .collect()
}
