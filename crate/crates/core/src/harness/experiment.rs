//! Config-driven runs, sweeps and post-hoc checks.

use std::path::{Path, PathBuf};

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::config::{load_config, Components, ExperimentConfig, Matrix};
use super::grid::{eval_error_grid, GridEvalReport, GridSpec};
use super::output::{read_csv, write_csv, write_grid_table, write_json, CsvTable};
use crate::basis::quadratic_weights_to_matrix;
use crate::error::{Error, Result};
use crate::learner::{run_episode_partial, EpisodeSummary, TrajectoryLog, WeightState};

pub const SUMMARY_SCHEMA: u32 = 1;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunOptions {
    pub out_dir: Option<PathBuf>,
    pub seed_override: Option<u64>,
    /// Skip writing the CSV, summary and grid table.
    pub dry_run: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Ok,
    Diverged,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeSummary {
    pub windows: usize,
    pub window_length: f64,
    pub threshold: f64,
    pub min_beta1_exploring: Option<f64>,
    pub windows_below_threshold: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapsStatus {
    pub state_cap: f64,
    pub weight_cap: f64,
    pub max_state_norm: f64,
    pub max_weight_norm: f64,
    pub within_caps: bool,
}

/// Learned `P` (from the quadratic critic) against the Riccati solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LqrComparison {
    pub riccati_p: Matrix,
    pub riccati_k: Matrix,
    pub riccati_residual: f64,
    pub kleinman_iterations: usize,
    /// `None` unless the critic basis is `quadratic`.
    pub learned_p: Option<Matrix>,
    pub max_abs_p_error: Option<f64>,
}

/// The JSON summary written next to every run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub schema: u32,
    pub name: String,
    pub status: RunStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub seed: u64,
    /// The config actually run (after overrides).
    pub config: ExperimentConfig,
    pub episode: EpisodeSummary,
    pub grid: Option<GridEvalReport>,
    pub pe: PeSummary,
    pub caps: CapsStatus,
    pub lqr: Option<LqrComparison>,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub log: TrajectoryLog,
    pub grid: Option<GridEvalReport>,
    pub summary: RunSummary,
    pub out_dir: PathBuf,
}

fn to_rows(m: &nalgebra::DMatrix<f64>) -> Matrix {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

fn summarize(
    cfg: &ExperimentConfig,
    parts: &Components,
    log: &TrajectoryLog,
    grid: Option<GridEvalReport>,
    error: Option<&Error>,
) -> Result<RunSummary> {
    let ep = &log.summary;
    let lqr = match &parts.lqr {
        Some(sol) => {
            let learned = if parts.phi_c.name == "quadratic" {
                let w = DVector::from_column_slice(&ep.final_w_c);
                Some(quadratic_weights_to_matrix(&w, parts.model.n)?)
            } else {
                None
            };
            Some(LqrComparison {
                riccati_p: to_rows(&sol.p),
                riccati_k: to_rows(&sol.k),
                riccati_residual: sol.residual,
                kleinman_iterations: sol.iterations,
                max_abs_p_error: learned.as_ref().map(|p| (p - &sol.p).abs().max()),
                learned_p: learned.as_ref().map(to_rows),
            })
        }
        None => None,
    };
    Ok(RunSummary {
        schema: SUMMARY_SCHEMA,
        name: cfg.name.clone(),
        status: if error.is_some() { RunStatus::Diverged } else { RunStatus::Ok },
        error: error.map(|e| e.to_string()),
        seed: cfg.exploration.seed,
        config: cfg.clone(),
        episode: ep.clone(),
        grid,
        pe: PeSummary {
            windows: ep.pe_windows,
            window_length: parts.learner.pe_window,
            threshold: parts.learner.pe_threshold,
            min_beta1_exploring: ep.min_beta1_exploring,
            windows_below_threshold: ep.pe_windows_below_threshold,
        },
        caps: CapsStatus {
            state_cap: cfg.caps.state,
            weight_cap: cfg.caps.weight,
            max_state_norm: ep.max_state_norm,
            max_weight_norm: ep.max_weight_norm,
            within_caps: error.is_none() && ep.max_state_norm <= cfg.caps.state && ep.max_weight_norm <= cfg.caps.weight,
        },
        lqr,
    })
}

fn grid_spec(cfg: &ExperimentConfig, n: usize) -> GridSpec {
    GridSpec::cube(n, cfg.grid.half_width, cfg.grid.resolution)
}

/// Builds everything from `cfg`, runs one episode and writes
/// `<out>/trajectory.csv`, `<out>/summary.json` and, when the plant has
/// oracles, `<out>/grid.csv`. A diverged run still writes its partial log and
/// a summary with `status = "diverged"` before the error is returned.
pub fn run_experiment(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<ExperimentOutcome> {
    let mut cfg = cfg.clone();
    if let Some(seed) = opts.seed_override {
        cfg.exploration.seed = seed;
    }
    let out_dir = cfg.output_dir(opts.out_dir.as_deref());
    let parts = cfg.build()?;
    if !opts.dry_run {
        std::fs::create_dir_all(&out_dir).map_err(|e| Error::io(&out_dir, e))?;
    }
    let csv_path = out_dir.join(&cfg.outputs.csv);
    let summary_path = out_dir.join(&cfg.outputs.summary);

    let result = run_episode_partial(&parts.model, &parts.cost, &parts.phi_c, &parts.phi_a, &parts.expl, &parts.learner);
    let log = match result {
        Ok(log) => log,
        Err((partial, err)) => {
            if let (Some(log), false) = (partial, opts.dry_run) {
                write_csv(&log, &csv_path)?;
                let summary = summarize(&cfg, &parts, &log, None, Some(&err))?;
                write_json(&summary, &summary_path)?;
            }
            return Err(err);
        }
    };

    let grid = if parts.model.has_oracles() {
        let w = log.final_weights();
        Some(eval_error_grid(&w, &parts.phi_c, &parts.phi_a, &parts.model, &grid_spec(&cfg, parts.model.n))?)
    } else {
        None
    };
    let summary = summarize(&cfg, &parts, &log, grid.clone(), None)?;
    if !opts.dry_run {
        write_csv(&log, &csv_path)?;
        write_json(&summary, &summary_path)?;
        if let Some(g) = &grid {
            write_grid_table(g, out_dir.join(&cfg.outputs.grid_table))?;
        }
    }
    Ok(ExperimentOutcome {
        log,
        grid,
        summary,
        out_dir,
    })
}

/// Loads and runs every `*.cfg` in `dir` (sorted by name), one thread per
/// config. With `opts.out_dir` set, each run writes to `out_dir/<stem>`.
pub fn sweep(dir: impl AsRef<Path>, opts: &RunOptions) -> Result<Vec<(PathBuf, Result<RunSummary>)>> {
    let dir = dir.as_ref();
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|ext| ext == "cfg"))
        .collect();
    paths.sort();
    let results = std::thread::scope(|scope| {
        let handles: Vec<_> = paths
            .iter()
            .map(|path| {
                scope.spawn(move || {
                    let cfg = load_config(path)?;
                    let mut o = opts.clone();
                    o.out_dir = opts.out_dir.as_ref().map(|d| {
                        d.join(path.file_stem().expect("cfg files have a stem"))
                    });
                    run_experiment(&cfg, &o).map(|out| out.summary)
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|_| Err(Error::config("worker panicked"))))
            .collect::<Vec<_>>()
    });
    Ok(paths.into_iter().zip(results).collect())
}

pub fn read_summary(path: impl AsRef<Path>) -> Result<RunSummary> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Config {
        field: None,
        line: Some(e.line()),
        message: format!("{}: {e}", path.display()),
    })
}

/// Re-evaluates the grid errors of the final weights stored in a summary.
pub fn eval_summary(summary: &RunSummary) -> Result<GridEvalReport> {
    let parts = summary.config.build()?;
    let ep = &summary.episode;
    let mut stacked = ep.final_w_c.clone();
    stacked.extend_from_slice(&ep.final_w_a);
    let w = WeightState::from_stacked(
        DVector::from_vec(stacked),
        parts.phi_c.dim_out(),
        parts.phi_a.dim_out(),
        parts.model.m,
    )?;
    eval_error_grid(&w, &parts.phi_c, &parts.phi_a, &parts.model, &grid_spec(&summary.config, parts.model.n))
}

/// PE windows read back from a CSV log.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeCheckReport {
    /// `(window end, beta1)` for every logged PE window.
    pub windows: Vec<(f64, f64)>,
    /// Last logged time with a nonzero probing signal.
    pub exploration_end: Option<f64>,
    pub exploring_windows: usize,
    pub min_beta1_exploring: Option<f64>,
    pub median_beta1_exploring: Option<f64>,
    pub threshold: f64,
    pub below_threshold: Vec<f64>,
    /// First window after exploration whose beta1 is below a tenth of the
    /// exploring-phase median.
    pub loss_detected_at: Option<f64>,
}

impl PeCheckReport {
    pub fn passed(&self) -> bool {
        self.below_threshold.is_empty()
    }
}

pub fn pe_check(table: &CsvTable, threshold: f64) -> Result<PeCheckReport> {
    let t_col = table.column("t").ok_or_else(|| Error::config("CSV has no `t` column"))?;
    let b_col = table.column("beta1").ok_or_else(|| Error::config("CSV has no `beta1` column"))?;
    let e_cols: Vec<usize> = table
        .header
        .iter()
        .enumerate()
        .filter(|(_, h)| h.starts_with('e') && h[1..].parse::<usize>().is_ok())
        .map(|(i, _)| i)
        .collect();

    let mut exploration_end = None;
    let mut windows = Vec::new();
    for row in &table.rows {
        let t = row.get(t_col).copied().flatten().ok_or_else(|| Error::config("row without time"))?;
        if e_cols.iter().any(|&c| row.get(c).copied().flatten().is_some_and(|v| v != 0.0)) {
            exploration_end = Some(t);
        }
        if let Some(b) = row.get(b_col).copied().flatten() {
            windows.push((t, b));
        }
    }
    let exploring: Vec<f64> = windows
        .iter()
        .filter(|(t, _)| exploration_end.is_some_and(|end| *t <= end))
        .map(|(_, b)| *b)
        .collect();
    let min = exploring.iter().copied().reduce(f64::min);
    let median = if exploring.is_empty() {
        None
    } else {
        let mut s = exploring.clone();
        s.sort_by(f64::total_cmp);
        let k = s.len();
        Some(if k % 2 == 1 { s[k / 2] } else { 0.5 * (s[k / 2 - 1] + s[k / 2]) })
    };
    let below_threshold = windows
        .iter()
        .filter(|(t, b)| exploration_end.is_some_and(|end| *t <= end) && *b < threshold)
        .map(|(t, _)| *t)
        .collect();
    let loss_detected_at = match (exploration_end, median) {
        (Some(end), Some(med)) => windows.iter().find(|(t, b)| *t > end && *b < med / 10.0).map(|(t, _)| *t),
        _ => None,
    };
    Ok(PeCheckReport {
        windows,
        exploration_end,
        exploring_windows: exploring.len(),
        min_beta1_exploring: min,
        median_beta1_exploring: median,
        threshold,
        below_threshold,
        loss_detected_at,
    })
}

pub fn pe_check_file(path: impl AsRef<Path>, threshold: f64) -> Result<PeCheckReport> {
    pe_check(&read_csv(path)?, threshold)
}
