//! Flat `key = value` run configuration.
//!
//! One key per line, `#` starts a comment. Unknown or repeated keys are
//! rejected. Explicit initial states use `initial_state = explicit` plus
//! `a00`, `a01`, `a10`, `a11` given as `re [im]`.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::propagator::Method;
use crate::space::{QubitPairState, SimParams, SpinConvention, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NamedState {
    Product11,
    Bell0110,
    Bell0011,
}

impl NamedState {
    pub fn name(self) -> &'static str {
        match self {
            NamedState::Product11 => "product_11",
            NamedState::Bell0110 => "bell_01_10",
            NamedState::Bell0011 => "bell_00_11",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "product_11" => Some(NamedState::Product11),
            "bell_01_10" => Some(NamedState::Bell0110),
            "bell_00_11" => Some(NamedState::Bell0011),
            _ => None,
        }
    }

    pub fn state(self) -> QubitPairState {
        match self {
            NamedState::Product11 => QubitPairState::product_11(),
            NamedState::Bell0110 => QubitPairState::bell_01_10(),
            NamedState::Bell0011 => QubitPairState::bell_00_11(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialState {
    Named(NamedState),
    Explicit(QubitPairState),
}

impl InitialState {
    pub fn resolve(&self) -> QubitPairState {
        match self {
            InitialState::Named(n) => n.state(),
            InitialState::Explicit(s) => *s,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            InitialState::Named(n) => n.name(),
            InitialState::Explicit(_) => "explicit",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: SimParams,
    pub initial_state: InitialState,
    pub method: Method,
    pub output_path: PathBuf,
    /// Write every n-th point of the time grid.
    pub sample_stride: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            params: SimParams::default(),
            initial_state: InitialState::Named(NamedState::Product11),
            method: Method::Laguerre,
            output_path: PathBuf::from("trajectory.csv"),
            sample_stride: 1,
        }
    }
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut entries: HashMap<String, (usize, String)> = HashMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line_no = n + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Config {
                line: line_no,
                message: format!("expected key = value, got {line:?}"),
            })?;
            let key = key.trim().to_string();
            if key.is_empty() {
                return Err(Error::Config { line: line_no, message: "empty key".into() });
            }
            if entries.insert(key.clone(), (line_no, value.trim().to_string())).is_some() {
                return Err(Error::Config { line: line_no, message: format!("duplicate key {key:?}") });
            }
        }

        let mut config = RunConfig::default();
        let mut amplitudes: [Option<C64>; 4] = [None; 4];
        let mut state_name: Option<(usize, String)> = None;

        let mut keys: Vec<_> = entries.into_iter().collect();
        keys.sort_by_key(|(_, (line, _))| *line);
        for (key, (line, value)) in keys {
            let p = &mut config.params;
            match key.as_str() {
                "mu0" => p.mu0 = real(line, &value)?,
                "omega" => p.omega = real(line, &value)?,
                "g0" => p.g0 = real(line, &value)?,
                "g" => p.g = real(line, &value)?,
                "temperature" => p.temperature = real(line, &value)?,
                "cutoff_tol" => p.cutoff_tol = real(line, &value)?,
                "k_max" => p.k_max = integer(line, &value)?,
                "alpha" => p.alpha = real(line, &value)?,
                "dt" => p.dt = real(line, &value)?,
                "t_max" => p.t_max = real(line, &value)?,
                "trace_tol" => p.trace_tol = real(line, &value)?,
                "spin_convention" => {
                    p.spin_convention = SpinConvention::parse(&value).ok_or_else(|| Error::Config {
                        line,
                        message: format!("unknown spin convention {value:?} (pauli|half)"),
                    })?
                }
                "method" => {
                    config.method = Method::parse(&value).ok_or_else(|| Error::Config {
                        line,
                        message: format!("unknown method {value:?} (laguerre|exact)"),
                    })?
                }
                "output" => config.output_path = PathBuf::from(value),
                "sample_stride" => {
                    config.sample_stride = integer(line, &value)?;
                    if config.sample_stride == 0 {
                        return Err(Error::Config { line, message: "sample_stride must be >= 1".into() });
                    }
                }
                "initial_state" => state_name = Some((line, value)),
                "a00" => amplitudes[0] = Some(complex(line, &value)?),
                "a01" => amplitudes[1] = Some(complex(line, &value)?),
                "a10" => amplitudes[2] = Some(complex(line, &value)?),
                "a11" => amplitudes[3] = Some(complex(line, &value)?),
                other => return Err(Error::Config { line, message: format!("unknown key {other:?}") }),
            }
        }

        let any_amplitude = amplitudes.iter().any(Option::is_some);
        match state_name {
            Some((line, name)) if name == "explicit" => {
                let zero = C64::new(0.0, 0.0);
                let [a00, a01, a10, a11] = amplitudes.map(|a| a.unwrap_or(zero));
                let psi = QubitPairState::new(a00, a11, a01, a10)
                    .map_err(|e| Error::Config { line, message: e.to_string() })?;
                config.initial_state = InitialState::Explicit(psi);
            }
            Some((line, name)) => {
                if any_amplitude {
                    return Err(Error::Config {
                        line,
                        message: "amplitudes given with a named initial state".into(),
                    });
                }
                let named = NamedState::parse(&name).ok_or_else(|| Error::Config {
                    line,
                    message: format!("unknown initial state {name:?}"),
                })?;
                config.initial_state = InitialState::Named(named);
            }
            None if any_amplitude => {
                return Err(Error::Config {
                    line: 0,
                    message: "amplitudes require initial_state = explicit".into(),
                })
            }
            None => {}
        }

        config.params.validate().map_err(|e| Error::Config { line: 0, message: e.to_string() })?;
        Ok(config)
    }
}

fn real(line: usize, value: &str) -> Result<f64> {
    value.parse::<f64>().map_err(|_| Error::Config { line, message: format!("not a number: {value:?}") })
}

fn integer(line: usize, value: &str) -> Result<usize> {
    value.parse::<usize>().map_err(|_| Error::Config { line, message: format!("not an integer: {value:?}") })
}

fn complex(line: usize, value: &str) -> Result<C64> {
    let parts: Vec<&str> = value.split_whitespace().collect();
    match parts.as_slice() {
        [re] => Ok(C64::new(real(line, re)?, 0.0)),
        [re, im] => Ok(C64::new(real(line, re)?, real(line, im)?)),
        _ => Err(Error::Config { line, message: format!("expected `re [im]`, got {value:?}") }),
    }
}
