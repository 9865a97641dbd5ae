//! Scenario configuration: a TOML document selecting a model, a time grid,
//! an initial state and the set of diagnostics to run.

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use adlab_core::models::{
    driven_two_level, dual_of, grover_adiabatic, linear_interpolation, rotating_field,
    DrivenTwoLevelParams, DualModel, GroverAdiabatic, HamiltonianModel,
};
use adlab_core::numkernel::ComplexMatrix;

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub total_time: f64,
    pub steps: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    pub model: ModelConfig,
    #[serde(default)]
    pub initial_state: InitialStateConfig,
    #[serde(default)]
    pub diagnostics: DiagnosticsConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub tolerances: ToleranceConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub turns: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h0_file: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h1_file: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_qubits: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub marked: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base: Option<Box<ModelConfig>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InitialStateConfig {
    /// Start in the instantaneous eigenstate with this index at t = 0.
    Level { level: usize },
    /// Explicit complex amplitudes as [re, im] pairs.
    Amplitudes { amplitudes: Vec<[f64; 2]> },
}

impl Default for InitialStateConfig {
    fn default() -> Self {
        InitialStateConfig::Level { level: 0 }
    }
}

impl InitialStateConfig {
    pub fn level(&self) -> Option<usize> {
        match self {
            InitialStateConfig::Level { level } => Some(*level),
            InitialStateConfig::Amplitudes { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiagnosticsConfig {
    pub probabilities: bool,
    pub amplitudes: bool,
    pub metric: bool,
    pub adiabatic_error: bool,
    pub fourier: bool,
    pub zero_count: bool,
    pub drift: bool,
    pub min_time: bool,
    pub min_gap: bool,
    pub curvature: bool,
    pub selection_rule: bool,
    /// Level pairs for per-pair diagnostics. Defaults to every ordered pair
    /// for small systems, pairs involving the initial level otherwise.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pairs: Option<Vec<[usize; 2]>>,
    pub min_time_s_steps: usize,
    pub min_gap_s_steps: usize,
    pub curvature_s: f64,
    pub curvature_step: f64,
    pub cutoff_threshold: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub selection_rule_samples: Option<Vec<f64>>,
    pub timeseries_max_points: usize,
}

impl Default for DiagnosticsConfig {
    fn default() -> Self {
        DiagnosticsConfig {
            probabilities: true,
            amplitudes: true,
            metric: true,
            adiabatic_error: true,
            fourier: true,
            zero_count: true,
            drift: true,
            min_time: true,
            min_gap: true,
            curvature: false,
            selection_rule: false,
            pairs: None,
            min_time_s_steps: 2000,
            min_gap_s_steps: 2000,
            curvature_s: 0.5,
            curvature_step: 1e-3,
            cutoff_threshold: 0.01,
            selection_rule_samples: None,
            timeseries_max_points: 10_001,
        }
    }
}

impl DiagnosticsConfig {
    /// Diagnostics that need an integrated trace.
    pub fn needs_trace(&self) -> bool {
        self.probabilities
            || self.amplitudes
            || self.adiabatic_error
            || self.fourier
            || self.zero_count
    }

    /// Diagnostics that need the eigenpath but not the trace.
    pub fn needs_path(&self) -> bool {
        self.needs_trace() || self.metric || self.drift
    }

    pub fn selection_samples(&self) -> Vec<f64> {
        self.selection_rule_samples
            .clone()
            .unwrap_or_else(|| (1..=9).map(|k| k as f64 / 10.0).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// Ascending total times; the step count scales with T so the grid
    /// spacing stays fixed across the sweep.
    pub total_times: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToleranceConfig {
    pub norm_defect: f64,
    pub probability_completeness: f64,
    pub amplitude_completeness: f64,
    pub quadrature_consistency: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        ToleranceConfig {
            norm_defect: 1e-8,
            probability_completeness: 1e-8,
            amplitude_completeness: 1e-6,
            quadrature_consistency: 1e-3,
        }
    }
}

impl ScenarioConfig {
    pub fn from_path(path: &Path) -> Result<ScenarioConfig, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::validation(format!("cannot read {}: {e}", path.display())))?;
        let config: ScenarioConfig = toml::from_str(&text)
            .map_err(|e| CliError::validation(format!("cannot parse {}: {e}", path.display())))?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if !(self.total_time.is_finite() && self.total_time > 0.0) {
            return Err(CliError::validation(format!(
                "total_time must be positive, got {}",
                self.total_time
            )));
        }
        if self.steps < 1 {
            return Err(CliError::validation("steps must be at least 1"));
        }
        if let Some(sweep) = &self.sweep {
            if sweep.total_times.is_empty() {
                return Err(CliError::validation("sweep.total_times must not be empty"));
            }
            let ascending = sweep
                .total_times
                .windows(2)
                .all(|w| w[0] < w[1]);
            if !ascending {
                return Err(CliError::validation(
                    "sweep.total_times must be strictly ascending",
                ));
            }
            if sweep.total_times.iter().any(|&t| !(t.is_finite() && t > 0.0)) {
                return Err(CliError::validation("sweep.total_times must be positive"));
            }
        }
        if let InitialStateConfig::Amplitudes { amplitudes } = &self.initial_state {
            if amplitudes.is_empty() {
                return Err(CliError::validation("initial_state.amplitudes is empty"));
            }
        }
        if self.diagnostics.selection_rule
            && self.model.name != "dual_of"
            && self.model.name != "grover_adiabatic"
        {
            return Err(CliError::validation(
                "selection_rule applies only to grover_adiabatic models",
            ));
        }
        Ok(())
    }

    pub fn stem(&self, config_path: &Path) -> String {
        self.label.clone().unwrap_or_else(|| {
            config_path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "scenario".to_owned())
        })
    }
}

/// A constructed model, keeping the concrete type where a diagnostic
/// needs more than the trait surface.
pub enum BuiltModel {
    Plain(Box<dyn HamiltonianModel>),
    Grover(Box<GroverAdiabatic>),
    Dual(Box<DualModel>),
}

impl BuiltModel {
    pub fn as_dyn(&self) -> &dyn HamiltonianModel {
        match self {
            BuiltModel::Plain(m) => m.as_ref(),
            BuiltModel::Grover(m) => m.as_ref(),
            BuiltModel::Dual(m) => m.as_ref(),
        }
    }

    pub fn as_grover(&self) -> Option<&GroverAdiabatic> {
        match self {
            BuiltModel::Grover(m) => Some(m),
            _ => None,
        }
    }

    pub fn as_dual(&self) -> Option<&DualModel> {
        match self {
            BuiltModel::Dual(m) => Some(m),
            _ => None,
        }
    }
}

fn require<T: Copy>(value: Option<T>, model: &str, field: &str) -> Result<T, CliError> {
    value.ok_or_else(|| CliError::validation(format!("model {model} requires `{field}`")))
}

/// Builds the configured model. `total_time`/`steps` are passed separately
/// so sweeps can rebuild the same model at other durations; `base_dir`
/// anchors relative matrix-file paths.
pub fn build_model(
    model: &ModelConfig,
    total_time: f64,
    steps: usize,
    base_dir: &Path,
) -> Result<BuiltModel, CliError> {
    match model.name.as_str() {
        "driven_two_level" => {
            let params = DrivenTwoLevelParams {
                eps: require(model.eps, "driven_two_level", "eps")?,
                v: require(model.v, "driven_two_level", "v")?,
                omega0: require(model.omega0, "driven_two_level", "omega0")?,
            };
            Ok(BuiltModel::Plain(Box::new(driven_two_level(
                params, total_time,
            )?)))
        }
        "rotating_field" => {
            let eps = require(model.eps, "rotating_field", "eps")?;
            let turns = model.turns.unwrap_or(1);
            Ok(BuiltModel::Plain(Box::new(rotating_field(
                eps, total_time, turns,
            )?)))
        }
        "linear_interpolation" => {
            let h0_file = model
                .h0_file
                .as_ref()
                .ok_or_else(|| CliError::validation("model linear_interpolation requires `h0_file`"))?;
            let h1_file = model
                .h1_file
                .as_ref()
                .ok_or_else(|| CliError::validation("model linear_interpolation requires `h1_file`"))?;
            let h0 = read_matrix_file(&resolve(base_dir, h0_file))?;
            let h1 = read_matrix_file(&resolve(base_dir, h1_file))?;
            Ok(BuiltModel::Plain(Box::new(linear_interpolation(
                h0, h1, total_time,
            )?)))
        }
        "grover_adiabatic" => {
            let n_qubits = require(model.n_qubits, "grover_adiabatic", "n_qubits")?;
            let marked = model.marked.unwrap_or(0);
            Ok(BuiltModel::Grover(Box::new(grover_adiabatic(
                n_qubits, marked, total_time,
            )?)))
        }
        "dual_of" => {
            let base_cfg = model
                .base
                .as_ref()
                .ok_or_else(|| CliError::validation("model dual_of requires a [model.base] table"))?;
            if base_cfg.name == "dual_of" {
                return Err(CliError::validation("dual_of cannot wrap another dual_of"));
            }
            let base = build_model(base_cfg, total_time, steps, base_dir)?;
            let boxed: Box<dyn HamiltonianModel> = match base {
                BuiltModel::Plain(m) => m,
                BuiltModel::Grover(m) => m,
                BuiltModel::Dual(_) => unreachable!("nested duals rejected above"),
            };
            let grid_points = model.grid_points.unwrap_or(steps + 1);
            Ok(BuiltModel::Dual(Box::new(dual_of(boxed, grid_points)?)))
        }
        other => Err(CliError::validation(format!(
            "unknown model `{other}`; see `adlab list-models`"
        ))),
    }
}

fn resolve(base_dir: &Path, path: &Path) -> PathBuf {
    if path.is_absolute() {
        path.to_owned()
    } else {
        base_dir.join(path)
    }
}

/// Plain-text Hermitian matrix: a `dim N` header, then N rows of N
/// whitespace-separated `re im` pairs. Lines starting with `#` are skipped.
pub fn read_matrix_file(path: &Path) -> Result<ComplexMatrix, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::validation(format!("cannot read {}: {e}", path.display())))?;
    let bad = |msg: String| CliError::validation(format!("{}: {msg}", path.display()));

    let mut lines = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'));
    let header = lines
        .next()
        .ok_or_else(|| bad("empty matrix file".into()))?;
    let dim: usize = header
        .strip_prefix("dim")
        .map(str::trim)
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| bad(format!("expected `dim N` header, got {header:?}")))?;
    if dim == 0 {
        return Err(bad("dimension must be positive".into()));
    }

    let mut matrix = ComplexMatrix::zeros(dim);
    for i in 0..dim {
        let row = lines
            .next()
            .ok_or_else(|| bad(format!("missing row {i}")))?;
        let numbers: Vec<f64> = row
            .split_whitespace()
            .map(|tok| {
                tok.parse::<f64>()
                    .map_err(|e| bad(format!("row {i}: bad number {tok:?}: {e}")))
            })
            .collect::<Result<_, _>>()?;
        if numbers.len() != 2 * dim {
            return Err(bad(format!(
                "row {i}: expected {} numbers (re im pairs), got {}",
                2 * dim,
                numbers.len()
            )));
        }
        for j in 0..dim {
            matrix[(i, j)] = Complex64::new(numbers[2 * j], numbers[2 * j + 1]);
        }
    }
    if lines.next().is_some() {
        return Err(bad("trailing content after the last row".into()));
    }
    Ok(matrix)
}
