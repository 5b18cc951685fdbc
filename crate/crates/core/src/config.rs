//! TOML run configuration with command-line overrides.
//!
//! ```toml
//! [system]
//! qubits = 1              # or: dim = 4
//!
//! [hamiltonian]
//! pauli = "1.0 Z"         # or: pauli_file = "h.pauli", matrix_file = "h.txt"
//!
//! [initial_state]
//! preset = "plus_all"     # or "maximally_mixed"; or: basis = 0, file = "rho.txt"
//!
//! [evolution]
//! t = 1.0
//! epsilon = 0.01
//! distribution = { kind = "gaussian", variance = 1.0 }
//!
//! [sampler]               # omit `shots` for the exact channel
//! shots = 200000
//! seed = 7
//!
//! [outputs]
//! state = "out/state.txt"
//! metrics = "out/metrics.csv"
//! omit_wall_time = false
//! ```
//!
//! Relative paths are resolved against the directory of the config file.
//! The distribution is the time-1 member of a convolution semigroup; the run
//! uses its time-`t` member.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::channels::DensityMatrix;
use crate::distribution::DistributionSpec;
use crate::error::CliError;
use crate::hamiltonian::HermitianOperator;
use crate::io::{parse_pauli_terms, read_matrix};

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSection {
    pub qubits: Option<usize>,
    pub dim: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HamiltonianSection {
    pub pauli: Option<String>,
    pub pauli_file: Option<PathBuf>,
    pub matrix_file: Option<PathBuf>,
}

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateSection {
    pub preset: Option<String>,
    pub basis: Option<usize>,
    pub file: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolutionSection {
    pub t: f64,
    pub epsilon: Option<f64>,
    pub distribution: Option<DistributionSpec>,
}

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplerSection {
    pub shots: Option<usize>,
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub state: Option<PathBuf>,
    pub metrics: Option<PathBuf>,
    #[serde(default)]
    pub omit_wall_time: bool,
}

/// The config file as written.
#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub system: SystemSection,
    pub hamiltonian: HamiltonianSection,
    pub initial_state: StateSection,
    pub evolution: EvolutionSection,
    #[serde(default)]
    pub sampler: SamplerSection,
    #[serde(default)]
    pub outputs: OutputSection,
}

/// Command-line values that replace file values.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub t: Option<f64>,
    pub epsilon: Option<f64>,
    pub shots: Option<usize>,
    pub seed: Option<u64>,
    /// Drop `shots` and run the exact channel.
    pub exact: bool,
    pub state_out: Option<PathBuf>,
    pub metrics_out: Option<PathBuf>,
    pub omit_wall_time: bool,
}

/// A validated run: operator and state loaded, paths resolved.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub dim: usize,
    pub hamiltonian: HermitianOperator,
    pub initial_state: DensityMatrix,
    pub t: f64,
    pub epsilon: Option<f64>,
    pub distribution: DistributionSpec,
    pub shots: Option<usize>,
    pub seed: u64,
    pub state_out: Option<PathBuf>,
    pub metrics_out: Option<PathBuf>,
    pub omit_wall_time: bool,
}

impl RawConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| {
            let location = match e.span() {
                Some(span) => {
                    let before = &text[..span.start.min(text.len())];
                    let line = before.matches('\n').count() + 1;
                    let col = before.len() - before.rfind('\n').map_or(0, |p| p + 1) + 1;
                    format!("line {line}, column {col}")
                }
                None => "config".to_string(),
            };
            CliError::parse(location, e.message().to_string())
        })
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(t) = o.t {
            self.evolution.t = t;
        }
        if let Some(eps) = o.epsilon {
            self.evolution.epsilon = Some(eps);
        }
        if let Some(shots) = o.shots {
            self.sampler.shots = Some(shots);
        }
        if o.exact {
            self.sampler.shots = None;
        }
        if let Some(seed) = o.seed {
            self.sampler.seed = Some(seed);
        }
        if let Some(p) = &o.state_out {
            self.outputs.state = Some(p.clone());
        }
        if let Some(p) = &o.metrics_out {
            self.outputs.metrics = Some(p.clone());
        }
        self.outputs.omit_wall_time |= o.omit_wall_time;
    }
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

fn read_input(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn exactly_one(section: &str, names: &[&str], present: &[bool]) -> Result<(), CliError> {
    let count = present.iter().filter(|&&p| p).count();
    if count == 1 {
        Ok(())
    } else {
        Err(CliError::Config(format!("[{section}] needs exactly one of {}, found {count}", names.join(", "))))
    }
}

/// Loads the operator described by `[system]` and `[hamiltonian]`.
pub fn load_hamiltonian(
    system: &SystemSection,
    ham: &HamiltonianSection,
    base: &Path,
) -> Result<HermitianOperator, CliError> {
    exactly_one("system", &["qubits", "dim"], &[system.qubits.is_some(), system.dim.is_some()])?;
    exactly_one(
        "hamiltonian",
        &["pauli", "pauli_file", "matrix_file"],
        &[ham.pauli.is_some(), ham.pauli_file.is_some(), ham.matrix_file.is_some()],
    )?;
    if let Some(path) = &ham.matrix_file {
        let Some(dim) = system.dim else {
            return Err(CliError::Config("a dense matrix file requires [system] dim".into()));
        };
        let m = read_matrix(&resolve(base, path))?;
        if m.rows() != dim {
            return Err(CliError::Config(format!("matrix file is {0}x{0} but [system] dim = {dim}", m.rows())));
        }
        return Ok(HermitianOperator::new(m)?);
    }
    let Some(qubits) = system.qubits else {
        return Err(CliError::Config("a Pauli-sum Hamiltonian requires [system] qubits".into()));
    };
    let text = match (&ham.pauli, &ham.pauli_file) {
        (Some(inline), _) => inline.clone(),
        (None, Some(path)) => read_input(&resolve(base, path))?,
        (None, None) => unreachable!("checked above"),
    };
    let sum = parse_pauli_terms(&text)?;
    if sum.qubits != qubits {
        return Err(CliError::Config(format!(
            "Pauli strings act on {} qubits but [system] qubits = {qubits}",
            sum.qubits
        )));
    }
    Ok(HermitianOperator::new(sum.to_matrix())?)
}

fn load_state(section: &StateSection, dim: usize, base: &Path) -> Result<DensityMatrix, CliError> {
    exactly_one(
        "initial_state",
        &["preset", "basis", "file"],
        &[section.preset.is_some(), section.basis.is_some(), section.file.is_some()],
    )?;
    if let Some(preset) = &section.preset {
        return match preset.as_str() {
            "plus_all" => {
                if !dim.is_power_of_two() {
                    return Err(CliError::Config(format!("preset plus_all needs a qubit register, got dim {dim}")));
                }
                Ok(DensityMatrix::plus_all(dim.trailing_zeros() as usize))
            }
            "maximally_mixed" => Ok(DensityMatrix::maximally_mixed(dim)),
            other => Err(CliError::Config(format!(
                "unknown state preset '{other}' (expected plus_all or maximally_mixed)"
            ))),
        };
    }
    if let Some(index) = section.basis {
        if index >= dim {
            return Err(CliError::Config(format!("basis index {index} out of range for dim {dim}")));
        }
        return Ok(DensityMatrix::basis(dim, index)?);
    }
    let path = resolve(base, section.file.as_ref().expect("checked above"));
    let m = read_matrix(&path)?;
    if m.rows() != dim {
        return Err(CliError::Config(format!("state file is {0}x{0} but the system has dim {dim}", m.rows())));
    }
    Ok(DensityMatrix::new(m)?)
}

impl RunConfig {
    pub fn load(path: &Path, overrides: &Overrides) -> Result<Self, CliError> {
        let text = read_input(path)?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        Self::from_toml_str(&text, base, overrides)
    }

    pub fn from_toml_str(text: &str, base: &Path, overrides: &Overrides) -> Result<Self, CliError> {
        let mut raw = RawConfig::from_toml(text)?;
        raw.apply(overrides);
        Self::from_raw(raw, base)
    }

    pub fn from_raw(raw: RawConfig, base: &Path) -> Result<Self, CliError> {
        let hamiltonian = load_hamiltonian(&raw.system, &raw.hamiltonian, base)?;
        let dim = hamiltonian.dim();
        let initial_state = load_state(&raw.initial_state, dim, base)?;
        let ev = raw.evolution;
        if !(ev.t.is_finite() && ev.t >= 0.0) {
            return Err(CliError::Config(format!("evolution.t must be finite and nonnegative, got {}", ev.t)));
        }
        if let Some(eps) = ev.epsilon {
            if !(eps > 0.0 && eps < 1.0) {
                return Err(CliError::Config(format!("evolution.epsilon must lie in (0, 1), got {eps}")));
            }
        }
        let distribution = ev.distribution.unwrap_or(DistributionSpec::Gaussian { variance: 1.0 });
        distribution.validate()?;
        distribution.at_time(1.0).map_err(|e| CliError::Config(format!("evolution.distribution: {e}")))?;
        if let Some(0) = raw.sampler.shots {
            return Err(CliError::Config("sampler.shots must be at least 1".into()));
        }
        let gaussian = matches!(distribution, DistributionSpec::Gaussian { .. });
        if raw.sampler.shots.is_some() && gaussian && ev.epsilon.is_none() {
            return Err(CliError::Config("evolution.epsilon is required for sampled Gaussian runs".into()));
        }
        Ok(Self {
            dim,
            hamiltonian,
            initial_state,
            t: ev.t,
            epsilon: ev.epsilon,
            distribution,
            shots: raw.sampler.shots,
            seed: raw.sampler.seed.unwrap_or(0),
            state_out: raw.outputs.state.map(|p| resolve(base, &p)),
            metrics_out: raw.outputs.metrics.map(|p| resolve(base, &p)),
            omit_wall_time: raw.outputs.omit_wall_time,
        })
    }
}
