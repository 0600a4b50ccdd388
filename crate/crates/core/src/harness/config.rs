//! Experiment configuration.
//!
//! A config is a TOML document, conventionally with a `.cfg` extension.
//! Format version 1 has these tables (keys marked `*` are required):
//!
//! ```toml
//! version = 1
//! name = "case1"
//!
//! [system]            # name* = "benchmark" | "linear"; linear needs a*, b*
//! [cost]              # q, r (default identity)
//! [bases]             # critic*, actor*  (quadratic, linear, case1_actor,
//!                     #  case2_actor, poly:<d>)
//! [learner]           # alpha*, T*, h, t_final*, x0*, w_c0*, w_a0*,
//!                     # hold_until_full_window, pe_window, pe_threshold, saturation
//! [exploration]       # enabled, count, freq_range, amplitude, active_until, seed
//! [outputs]           # dir, log_stride, csv, summary, grid_table
//! [caps]              # state, weight
//! [grid]              # half_width, resolution
//! [kleinman]          # k0, tol, max_iter (linear systems only)
//! ```
//!
//! Unknown keys are rejected. `w_a0` lists the `N_a × m` actor weights in
//! row-major order.

use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::baselines::{kleinman_iteration, LQRSolution};
use crate::basis::{basis_by_name, BasisSet};
use crate::cost::CostSpec;
use crate::dynamics::{attach_quadratic_oracles, make_benchmark, make_linear, SystemModel};
use crate::error::{Error, Result};
use crate::exploration::{make_sinusoid_channels, ExplorationSignal};
use crate::learner::LearnerConfig;
use crate::linalg::is_hurwitz;

pub const FORMAT_VERSION: u32 = 1;

pub type Matrix = Vec<Vec<f64>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "version_default")]
    pub version: u32,
    #[serde(default = "name_default")]
    pub name: String,
    pub system: SystemSection,
    #[serde(default)]
    pub cost: CostSection,
    pub bases: BasesSection,
    pub learner: LearnerSection,
    #[serde(default)]
    pub exploration: ExplorationSection,
    #[serde(default)]
    pub outputs: OutputsSection,
    #[serde(default)]
    pub caps: CapsSection,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kleinman: Option<KleinmanSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSection {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<Matrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<Matrix>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<Matrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<Matrix>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasesSection {
    pub critic: String,
    pub actor: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LearnerSection {
    pub alpha: f64,
    #[serde(rename = "T")]
    pub window: f64,
    #[serde(default = "h_default")]
    pub h: f64,
    pub t_final: f64,
    pub x0: Vec<f64>,
    pub w_c0: Vec<f64>,
    pub w_a0: Vec<f64>,
    #[serde(default = "true_default")]
    pub hold_until_full_window: bool,
    /// Defaults to `T`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pe_window: Option<f64>,
    #[serde(default = "pe_threshold_default")]
    pub pe_threshold: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub saturation: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplorationSection {
    #[serde(default = "true_default")]
    pub enabled: bool,
    /// Sinusoids per input channel.
    #[serde(default = "count_default")]
    pub count: usize,
    #[serde(default = "freq_range_default")]
    pub freq_range: [f64; 2],
    #[serde(default = "one")]
    pub amplitude: f64,
    /// Defaults to `t_final`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub active_until: Option<f64>,
    #[serde(default)]
    pub seed: u64,
}

impl Default for ExplorationSection {
    fn default() -> Self {
        Self {
            enabled: true,
            count: count_default(),
            freq_range: freq_range_default(),
            amplitude: 1.0,
            active_until: None,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputsSection {
    /// Defaults to `out/<name>`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    #[serde(default = "stride_default")]
    pub log_stride: usize,
    #[serde(default = "csv_default")]
    pub csv: String,
    #[serde(default = "summary_default")]
    pub summary: String,
    #[serde(default = "grid_table_default")]
    pub grid_table: String,
}

impl Default for OutputsSection {
    fn default() -> Self {
        Self {
            dir: None,
            log_stride: 1,
            csv: csv_default(),
            summary: summary_default(),
            grid_table: grid_table_default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapsSection {
    #[serde(default = "state_cap_default")]
    pub state: f64,
    #[serde(default = "weight_cap_default")]
    pub weight: f64,
}

impl Default for CapsSection {
    fn default() -> Self {
        Self {
            state: state_cap_default(),
            weight: weight_cap_default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    /// The grid covers `[-half_width, half_width]ⁿ`.
    #[serde(default = "one")]
    pub half_width: f64,
    /// Nodes per axis.
    #[serde(default = "resolution_default")]
    pub resolution: usize,
}

impl Default for GridSection {
    fn default() -> Self {
        Self {
            half_width: 1.0,
            resolution: resolution_default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KleinmanSection {
    /// Initial stabilizing gain (`m × n`); zero if omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k0: Option<Matrix>,
    #[serde(default = "kleinman_tol_default")]
    pub tol: f64,
    #[serde(default = "kleinman_iter_default")]
    pub max_iter: usize,
}

impl Default for KleinmanSection {
    fn default() -> Self {
        Self {
            k0: None,
            tol: kleinman_tol_default(),
            max_iter: kleinman_iter_default(),
        }
    }
}

fn version_default() -> u32 {
    FORMAT_VERSION
}
fn name_default() -> String {
    "experiment".into()
}
fn h_default() -> f64 {
    1e-3
}
fn true_default() -> bool {
    true
}
fn pe_threshold_default() -> f64 {
    1e-8
}
fn count_default() -> usize {
    100
}
fn freq_range_default() -> [f64; 2] {
    [-50.0, 50.0]
}
fn one() -> f64 {
    1.0
}
fn stride_default() -> usize {
    1
}
fn csv_default() -> String {
    "trajectory.csv".into()
}
fn summary_default() -> String {
    "summary.json".into()
}
fn grid_table_default() -> String {
    "grid.csv".into()
}
fn state_cap_default() -> f64 {
    50.0
}
fn weight_cap_default() -> f64 {
    100.0
}
fn resolution_default() -> usize {
    41
}
fn kleinman_tol_default() -> f64 {
    1e-12
}
fn kleinman_iter_default() -> usize {
    100
}

/// Everything needed to run an episode, built from a config.
#[derive(Debug, Clone)]
pub struct Components {
    pub model: SystemModel,
    pub cost: CostSpec,
    pub phi_c: BasisSet,
    pub phi_a: BasisSet,
    pub expl: ExplorationSignal,
    pub learner: LearnerConfig,
    /// Riccati solution for linear systems.
    pub lqr: Option<LQRSolution>,
}

fn matrix(field: &str, rows: &Matrix) -> Result<DMatrix<f64>> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if r == 0 || c == 0 || rows.iter().any(|row| row.len() != c) {
        return Err(Error::config_field(field, "expected a non-empty rectangular matrix"));
    }
    if rows.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::config_field(field, "matrix entries must be finite"));
    }
    Ok(DMatrix::from_fn(r, c, |i, j| rows[i][j]))
}

fn with_field(field: &str, err: Error) -> Error {
    match err {
        Error::Config { field: None, line, message } => Error::Config {
            field: Some(field.to_string()),
            line,
            message,
        },
        other => other,
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| {
            let line = e.span().map(|s| line_at(text, s.start));
            let message = e.message().to_string();
            let field = message
                .split('`')
                .nth(1)
                .filter(|_| message.contains("field"))
                .map(str::to_string);
            Error::Config { field, line, message }
        })?;
        cfg.build().map_err(|e| locate(text, e))?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::config(format!("cannot serialize config: {e}")))
    }

    /// Output directory: `override_dir`, then `outputs.dir`, then `out/<name>`.
    pub fn output_dir(&self, override_dir: Option<&Path>) -> PathBuf {
        match (override_dir, &self.outputs.dir) {
            (Some(d), _) => d.to_path_buf(),
            (None, Some(d)) => d.clone(),
            (None, None) => PathBuf::from("out").join(&self.name),
        }
    }

    pub fn learner_config(&self) -> LearnerConfig {
        let l = &self.learner;
        LearnerConfig {
            alpha: l.alpha,
            window: l.window,
            h: l.h,
            t_final: l.t_final,
            x0: l.x0.clone(),
            w_c0: l.w_c0.clone(),
            w_a0: l.w_a0.clone(),
            hold_until_full_window: l.hold_until_full_window,
            log_stride: self.outputs.log_stride,
            pe_window: l.pe_window.unwrap_or(l.window),
            pe_threshold: l.pe_threshold,
            state_cap: self.caps.state,
            weight_cap: self.caps.weight,
            saturation: l.saturation,
        }
    }

    /// Validates the config and constructs the plant, cost, bases and signal.
    pub fn build(&self) -> Result<Components> {
        if self.version != FORMAT_VERSION {
            return Err(Error::config_field(
                "version",
                format!("unsupported format version {}, expected {FORMAT_VERSION}", self.version),
            ));
        }
        let mut model = match self.system.name.as_str() {
            "benchmark" => {
                if self.system.a.is_some() || self.system.b.is_some() {
                    return Err(Error::config_field("system.a", "the benchmark plant takes no matrices"));
                }
                make_benchmark()
            }
            "linear" => {
                let a = self
                    .system
                    .a
                    .as_ref()
                    .ok_or_else(|| Error::config_field("system.a", "linear system needs `a`"))?;
                let b = self
                    .system
                    .b
                    .as_ref()
                    .ok_or_else(|| Error::config_field("system.b", "linear system needs `b`"))?;
                make_linear(matrix("system.a", a)?, matrix("system.b", b)?)?
            }
            "" => return Err(Error::config_field("system.name", "system name is empty")),
            other => {
                return Err(Error::config_field(
                    "system.name",
                    format!("unknown system `{other}` (expected `benchmark` or `linear`)"),
                ))
            }
        };
        let (n, m) = (model.n, model.m);

        let q = match &self.cost.q {
            Some(q) => matrix("cost.q", q)?,
            None => DMatrix::identity(n, n),
        };
        if q.shape() != (n, n) {
            return Err(Error::config_field("cost.q", format!("Q must be {n}x{n}")));
        }
        let r = match &self.cost.r {
            Some(r) => matrix("cost.r", r)?,
            None => DMatrix::identity(m, m),
        };
        if r.shape() != (m, m) {
            return Err(Error::config_field("cost.r", format!("R must be {m}x{m}")));
        }
        let cost = CostSpec::quadratic(q.clone(), r.clone())?;

        let phi_c = basis_by_name(&self.bases.critic, n).map_err(|e| with_field("bases.critic", e))?;
        let phi_a = basis_by_name(&self.bases.actor, n).map_err(|e| with_field("bases.actor", e))?;

        let learner = self.learner_config();
        learner.validate()?;
        if learner.x0.len() != n {
            return Err(Error::config_field("learner.x0", format!("expected {n} entries")));
        }
        if learner.w_c0.len() != phi_c.dim_out() {
            return Err(Error::config_field(
                "learner.w_c0",
                format!("critic basis `{}` has {} features, got {} weights", phi_c.name, phi_c.dim_out(), learner.w_c0.len()),
            ));
        }
        if learner.w_a0.len() != phi_a.dim_out() * m {
            return Err(Error::config_field(
                "learner.w_a0",
                format!(
                    "actor basis `{}` needs {} x {m} weights, got {}",
                    phi_a.name,
                    phi_a.dim_out(),
                    learner.w_a0.len()
                ),
            ));
        }

        let ex = &self.exploration;
        let expl = if ex.enabled {
            let until = ex.active_until.unwrap_or(self.learner.t_final);
            if !(until >= 0.0) {
                return Err(Error::config_field("exploration.active_until", "must be >= 0"));
            }
            make_sinusoid_channels(m, ex.count, ex.freq_range, ex.seed, until, ex.amplitude)?
        } else {
            ExplorationSignal::none(m)
        };

        if self.grid.resolution < 2 || !(self.grid.half_width > 0.0) {
            return Err(Error::config_field("grid.resolution", "grid needs resolution >= 2 and half_width > 0"));
        }

        let lqr = match (&model.linear_matrices(), &self.kleinman) {
            (Some((a, b)), kl) => {
                let kl = kl.clone().unwrap_or_default();
                let k0 = match &kl.k0 {
                    Some(k) => matrix("kleinman.k0", k)?,
                    None => DMatrix::zeros(m, n),
                };
                if k0.shape() != (m, n) {
                    return Err(Error::config_field("kleinman.k0", format!("K0 must be {m}x{n}")));
                }
                if kl.k0.is_none() && !is_hurwitz(a) {
                    return Err(Error::config_field(
                        "kleinman.k0",
                        "A is not Hurwitz; supply a stabilizing initial gain",
                    ));
                }
                let sol = kleinman_iteration(a, b, &q, &r, &k0, kl.tol, kl.max_iter)
                    .map_err(|e| with_field("kleinman", e))?;
                Some(sol)
            }
            (None, Some(_)) => {
                return Err(Error::config_field("kleinman", "only valid for linear systems"));
            }
            (None, None) => None,
        };
        if let Some(sol) = &lqr {
            model = attach_quadratic_oracles(model, &sol.p, &sol.k);
        }

        Ok(Components {
            model,
            cost,
            phi_c,
            phi_a,
            expl,
            learner,
            lqr,
        })
    }
}

/// Reads and validates a config file.
pub fn load_config(path: impl AsRef<Path>) -> Result<ExperimentConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    ExperimentConfig::from_toml_str(&text)
}

/// Initial weights as a vector, critic first.
pub fn initial_weights(cfg: &ExperimentConfig) -> DVector<f64> {
    DVector::from_iterator(
        cfg.learner.w_c0.len() + cfg.learner.w_a0.len(),
        cfg.learner.w_c0.iter().chain(&cfg.learner.w_a0).copied(),
    )
}

fn line_at(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Fills in the line number of a field-tagged config error.
fn locate(text: &str, err: Error) -> Error {
    match err {
        Error::Config {
            field: Some(field),
            line: None,
            message,
        } => {
            let line = field_line(text, &field);
            Error::Config {
                field: Some(field),
                line,
                message,
            }
        }
        other => other,
    }
}

/// 1-based line of `table.key` (or of `[table]`, or a top-level key).
fn field_line(text: &str, field: &str) -> Option<usize> {
    let (table, key) = match field.split_once('.') {
        Some((t, k)) => (t, Some(k)),
        None => (field, None),
    };
    let mut current = "";
    let mut header = None;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            current = name.trim();
            if current == table {
                header = Some(i + 1);
            }
            continue;
        }
        let lhs = line.split('=').next().unwrap_or("").trim();
        match key {
            Some(k) if current == table && lhs == k => return Some(i + 1),
            None if current.is_empty() && lhs == table => return Some(i + 1),
            _ => {}
        }
    }
    header
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
name = "t"

[system]
name = "benchmark"

[bases]
critic = "quadratic"
actor = "case1_actor"

[learner]
alpha = 10.0
T = 0.025
h = 0.001
t_final = 1.0
x0 = [0.0, 0.0]
w_c0 = [1.0, 1.0, 1.0]
w_a0 = [0.5, -0.5, -0.5, -0.5]
"#;

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = ExperimentConfig::from_toml_str(MINIMAL).unwrap();
        assert_eq!(cfg.exploration.count, 100);
        assert_eq!(cfg.caps.state, 50.0);
        assert_eq!(cfg.grid.resolution, 41);
        assert_eq!(cfg.learner_config().pe_window, 0.025);
        let c = cfg.build().unwrap();
        assert_eq!(c.expl.active_until, 1.0);
        assert!(c.lqr.is_none());
    }

    #[test]
    fn bad_step_names_field_and_line() {
        let text = MINIMAL.replace("h = 0.001", "h = 0.004");
        match ExperimentConfig::from_toml_str(&text).unwrap_err() {
            Error::Config { field, line, .. } => {
                assert_eq!(field.as_deref(), Some("learner.T"));
                assert_eq!(line, Some(13));
            }
            e => panic!("{e}"),
        }
    }

    #[test]
    fn unknown_key_rejected_with_line() {
        let text = MINIMAL.replace("alpha = 10.0", "alpha = 10.0\nbeta = 2.0");
        match ExperimentConfig::from_toml_str(&text).unwrap_err() {
            Error::Config { field, line, message } => {
                assert_eq!(field.as_deref(), Some("beta"), "{message}");
                assert_eq!(line, Some(13));
            }
            e => panic!("{e}"),
        }
    }

    #[test]
    fn missing_system_name() {
        let text = MINIMAL.replace("name = \"benchmark\"", "");
        let err = ExperimentConfig::from_toml_str(&text).unwrap_err();
        assert!(matches!(err, Error::Config { .. }));
        assert!(err.to_string().contains("name"), "{err}");
    }

    #[test]
    fn unknown_basis_and_weight_count() {
        let text = MINIMAL.replace("\"case1_actor\"", "\"case9\"");
        let err = ExperimentConfig::from_toml_str(&text).unwrap_err();
        assert!(err.to_string().contains("bases.actor"), "{err}");
        let text = MINIMAL.replace("w_c0 = [1.0, 1.0, 1.0]", "w_c0 = [1.0]");
        let err = ExperimentConfig::from_toml_str(&text).unwrap_err();
        assert!(err.to_string().contains("learner.w_c0"), "{err}");
    }

    #[test]
    fn linear_system_gets_riccati_oracles() {
        let text = MINIMAL
            .replace("name = \"benchmark\"", "name = \"linear\"\na = [[0.0, 1.0], [-1.0, -2.0]]\nb = [[0.0], [1.0]]")
            .replace("\"case1_actor\"", "\"linear\"")
            .replace("w_a0 = [0.5, -0.5, -0.5, -0.5]", "w_a0 = [0.0, 0.0]");
        let c = ExperimentConfig::from_toml_str(&text).unwrap().build().unwrap();
        assert!(c.model.has_oracles());
        assert!(c.lqr.unwrap().residual <= 1e-8);
    }

    #[test]
    fn toml_round_trip() {
        let cfg = ExperimentConfig::from_toml_str(MINIMAL).unwrap();
        let back = ExperimentConfig::from_toml_str(&cfg.to_toml_string().unwrap()).unwrap();
        assert_eq!(cfg, back);
        let json = serde_json::to_string(&cfg).unwrap();
        assert_eq!(serde_json::from_str::<ExperimentConfig>(&json).unwrap(), cfg);
    }
}
