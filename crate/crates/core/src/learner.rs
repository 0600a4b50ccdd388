//! Synchronous integral Q-learning.
//!
//! The plant, the running-cost integral `P(t) = ∫₀ᵗ r dτ` and the
//! exploration integral `Q(t) = ∫₀ᵗ 2φ_a ⊗ (R e) dτ` are advanced together
//! by one RK4 step. A ring buffer of `(φ_c(x), P, Q)` spanning one window
//! turns those cumulative values into the windowed regressor
//!
//! ```text
//! δ = [φ_c(x(t)) − φ_c(x(t−T));  Q(t) − Q(t−T)],   ρ = P(t) − P(t−T)
//! ```
//!
//! and the stacked weights `Ŵ = [ŵ_c; rowvec(ŵ_a)]` follow the normalized
//! gradient law `Ŵ̇ = −α δ E / (1 + δᵀδ)²` with `E = Ŵᵀδ + ρ`, discretized
//! by explicit Euler at the integrator step.
//!
//! `r` inside `ρ` is evaluated at the actor output `μ̂(x)` only; the probing
//! signal enters through `δ_a`. With that split `E` vanishes identically
//! along any trajectory once `(ŵ_c, ŵ_a)` equal the optimal weights.

use std::collections::VecDeque;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::basis::BasisSet;
use crate::cost::CostSpec;
use crate::dynamics::{rk4_step, steps_per, SystemModel};
use crate::error::{Error, Result};
use crate::exploration::{normalized_regressor, ExplorationSignal, GramAccumulator, PEReport};

/// Critic and actor weights stored once as the stacked vector
/// `[ŵ_c; rowvec(ŵ_a)]`, where `ŵ_a` is `N_a × m` and `rowvec` is row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightState {
    stacked: DVector<f64>,
    n_c: usize,
    n_a: usize,
    m: usize,
}

impl WeightState {
    pub fn new(w_c: &DVector<f64>, w_a: &DMatrix<f64>) -> Self {
        let (n_a, m) = w_a.shape();
        let n_c = w_c.len();
        let mut stacked = DVector::zeros(n_c + n_a * m);
        stacked.rows_mut(0, n_c).copy_from(w_c);
        for i in 0..n_a {
            for j in 0..m {
                stacked[n_c + i * m + j] = w_a[(i, j)];
            }
        }
        Self { stacked, n_c, n_a, m }
    }

    /// Single-input convenience: `w_a` is the `N_a`-vector of actor weights.
    pub fn from_slices(w_c: &[f64], w_a: &[f64]) -> Self {
        Self::new(
            &DVector::from_column_slice(w_c),
            &DMatrix::from_column_slice(w_a.len(), 1, w_a),
        )
    }

    pub fn from_stacked(stacked: DVector<f64>, n_c: usize, n_a: usize, m: usize) -> Result<Self> {
        if stacked.len() != n_c + n_a * m {
            return Err(Error::config(format!(
                "stacked weights have length {}, expected {}",
                stacked.len(),
                n_c + n_a * m
            )));
        }
        Ok(Self { stacked, n_c, n_a, m })
    }

    pub fn zeros(n_c: usize, n_a: usize, m: usize) -> Self {
        Self {
            stacked: DVector::zeros(n_c + n_a * m),
            n_c,
            n_a,
            m,
        }
    }

    pub fn stacked(&self) -> &DVector<f64> {
        &self.stacked
    }

    pub fn stacked_mut(&mut self) -> &mut DVector<f64> {
        &mut self.stacked
    }

    pub fn critic(&self) -> DVector<f64> {
        self.stacked.rows(0, self.n_c).into_owned()
    }

    /// `ŵ_a` as an `N_a × m` matrix.
    pub fn actor(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n_a, self.m, |i, j| self.stacked[self.n_c + i * self.m + j])
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.n_c, self.n_a, self.m)
    }

    pub fn len(&self) -> usize {
        self.stacked.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stacked.is_empty()
    }
}

/// Windowed quantities at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressorSample {
    pub t: f64,
    pub delta_c: DVector<f64>,
    pub delta_a: DVector<f64>,
    pub rho: f64,
    pub m_s: f64,
}

impl RegressorSample {
    pub fn new(t: f64, delta_c: DVector<f64>, delta_a: DVector<f64>, rho: f64) -> Self {
        let m_s = 1.0 + delta_c.norm_squared() + delta_a.norm_squared();
        Self {
            t,
            delta_c,
            delta_a,
            rho,
            m_s,
        }
    }

    /// `δ = [δ_c; δ_a]`.
    pub fn delta(&self) -> DVector<f64> {
        let mut d = DVector::zeros(self.delta_c.len() + self.delta_a.len());
        d.rows_mut(0, self.delta_c.len()).copy_from(&self.delta_c);
        d.rows_mut(self.delta_c.len(), self.delta_a.len()).copy_from(&self.delta_a);
        d
    }
}

/// `E = Ŵᵀδ + ρ`.
pub fn bellman_residual(w: &WeightState, s: &RegressorSample) -> f64 {
    let n_c = s.delta_c.len();
    let ws = w.stacked();
    ws.rows(0, n_c).dot(&s.delta_c) + ws.rows(n_c, s.delta_a.len()).dot(&s.delta_a) + s.rho
}

/// `Ŵ̇ = −α δ E / m_s²`.
pub fn weight_derivative(w: &WeightState, s: &RegressorSample, alpha: f64) -> DVector<f64> {
    let e = bellman_residual(w, s);
    s.delta() * (-alpha * e / (s.m_s * s.m_s))
}

/// `V̂(x) = ŵ_cᵀφ_c(x)`.
pub fn value_estimate(w: &WeightState, phi_c: &BasisSet, x: &DVector<f64>) -> Result<f64> {
    let phi = phi_c.eval(x)?;
    if phi.len() != w.dims().0 {
        return Err(Error::config("critic basis does not match critic weights"));
    }
    Ok(w.critic().dot(&phi))
}

/// `μ̂(x) = ŵ_aᵀφ_a(x)`.
pub fn policy_estimate(w: &WeightState, phi_a: &BasisSet, x: &DVector<f64>) -> Result<DVector<f64>> {
    let phi = phi_a.eval(x)?;
    if phi.len() != w.dims().1 {
        return Err(Error::config("actor basis does not match actor weights"));
    }
    Ok(w.actor().transpose() * phi)
}

#[derive(Debug, Clone)]
struct BufferEntry {
    t: f64,
    phi_c: DVector<f64>,
    cost_integral: f64,
    probe_integral: DVector<f64>,
}

/// Ring buffer of cumulative integrals, one entry per integrator step.
#[derive(Debug, Clone)]
pub struct WindowBuffer {
    entries: VecDeque<BufferEntry>,
    window_steps: usize,
}

impl WindowBuffer {
    pub fn new(window_steps: usize) -> Self {
        Self {
            entries: VecDeque::with_capacity(window_steps + 1),
            window_steps,
        }
    }

    /// Appends the values at time `t`, evicting anything older than one window.
    pub fn push(&mut self, t: f64, phi_c: DVector<f64>, cost_integral: f64, probe_integral: DVector<f64>) {
        if self.entries.len() == self.window_steps + 1 {
            self.entries.pop_front();
        }
        self.entries.push_back(BufferEntry {
            t,
            phi_c,
            cost_integral,
            probe_integral,
        });
    }

    pub fn is_full(&self) -> bool {
        self.entries.len() == self.window_steps + 1
    }

    pub fn window_steps(&self) -> usize {
        self.window_steps
    }
}

/// Differences over the trailing window `[t−T, t]`; `None` until a full
/// window has been buffered.
pub fn assemble_regressor(buffer: &WindowBuffer) -> Option<RegressorSample> {
    if !buffer.is_full() {
        return None;
    }
    let head = buffer.entries.back()?;
    let tail = buffer.entries.front()?;
    Some(RegressorSample::new(
        head.t,
        &head.phi_c - &tail.phi_c,
        &head.probe_integral - &tail.probe_integral,
        head.cost_integral - tail.cost_integral,
    ))
}

/// Episode settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnerConfig {
    pub alpha: f64,
    /// Window length `T` (s).
    pub window: f64,
    /// Integrator step (s); must divide `window` exactly.
    pub h: f64,
    pub t_final: f64,
    pub x0: Vec<f64>,
    pub w_c0: Vec<f64>,
    /// Row-major `N_a × m` actor weights.
    pub w_a0: Vec<f64>,
    pub hold_until_full_window: bool,
    /// Keep every `log_stride`-th step in the trajectory log.
    pub log_stride: usize,
    /// Length of the non-overlapping PE windows (s); a multiple of `h`.
    pub pe_window: f64,
    pub pe_threshold: f64,
    pub state_cap: f64,
    pub weight_cap: f64,
    /// Symmetric clip applied to each applied input channel.
    pub saturation: Option<f64>,
}

impl LearnerConfig {
    pub fn new(alpha: f64, window: f64, h: f64, t_final: f64) -> Self {
        Self {
            alpha,
            window,
            h,
            t_final,
            x0: vec![],
            w_c0: vec![],
            w_a0: vec![],
            hold_until_full_window: true,
            log_stride: 1,
            pe_window: window,
            pe_threshold: 1e-8,
            state_cap: 50.0,
            weight_cap: 100.0,
            saturation: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(Error::config_field("learner.alpha", "learning rate must be finite and >= 0"));
        }
        if !(self.h > 0.0 && self.h.is_finite()) {
            return Err(Error::config_field("learner.h", "step must be positive"));
        }
        if !(self.window > 0.0) {
            return Err(Error::config_field("learner.T", "window length must be positive"));
        }
        steps_per(self.window, self.h)?;
        steps_per(self.pe_window, self.h)
            .map_err(|_| Error::config_field("learner.pe_window", "PE window must be a multiple of h"))?;
        if !(self.t_final >= self.window) {
            return Err(Error::config_field("learner.t_final", "t_final must be at least T"));
        }
        steps_per(self.t_final, self.h)
            .map_err(|_| Error::config_field("learner.t_final", "t_final must be a multiple of h"))?;
        if self.log_stride == 0 {
            return Err(Error::config_field("outputs.log_stride", "stride must be >= 1"));
        }
        if !(self.state_cap > 0.0 && self.weight_cap > 0.0) {
            return Err(Error::config_field("caps", "caps must be positive"));
        }
        Ok(())
    }
}

/// One logged integrator step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub t: f64,
    pub x: DVector<f64>,
    pub u: DVector<f64>,
    pub e: DVector<f64>,
    pub w: DVector<f64>,
    pub bellman: Option<f64>,
    pub m_s: Option<f64>,
    pub beta1: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeSummary {
    pub steps: usize,
    pub t_final: f64,
    pub final_w_c: Vec<f64>,
    pub final_w_a: Vec<f64>,
    pub max_state_norm: f64,
    pub max_weight_norm: f64,
    /// Largest `|E|` over all full windows.
    pub max_abs_bellman: f64,
    pub pe_windows: usize,
    /// Smallest β₁ among PE windows that end while exploration is active.
    pub min_beta1_exploring: Option<f64>,
    /// PE windows below `pe_threshold` while exploration is active.
    pub pe_windows_below_threshold: usize,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone)]
pub struct TrajectoryLog {
    pub n: usize,
    pub m: usize,
    pub weight_labels: Vec<String>,
    pub records: Vec<StepRecord>,
    pub pe_reports: Vec<PEReport>,
    pub summary: EpisodeSummary,
}

impl TrajectoryLog {
    pub fn final_weights(&self) -> WeightState {
        let n_c = self.summary.final_w_c.len();
        let n_a = self.summary.final_w_a.len() / self.m.max(1);
        let mut stacked = self.summary.final_w_c.clone();
        stacked.extend_from_slice(&self.summary.final_w_a);
        WeightState::from_stacked(DVector::from_vec(stacked), n_c, n_a, self.m)
            .expect("summary weights have consistent length")
    }
}

/// Column labels for the stacked weight vector.
pub fn weight_labels(phi_c: &BasisSet, phi_a: &BasisSet, m: usize) -> Vec<String> {
    let mut labels: Vec<String> = phi_c.labels().into_iter().map(|l| format!("wc[{l}]")).collect();
    for l in phi_a.labels() {
        for j in 0..m {
            if m == 1 {
                labels.push(format!("wa[{l}]"));
            } else {
                labels.push(format!("wa[{l},u{}]", j + 1));
            }
        }
    }
    labels
}

struct Problem<'a> {
    model: &'a SystemModel,
    cost: &'a CostSpec,
    phi_a: &'a BasisSet,
    expl: &'a ExplorationSignal,
    saturation: Option<f64>,
}

impl Problem<'_> {
    fn applied_input(&self, mu: &DVector<f64>, e: &DVector<f64>) -> DVector<f64> {
        let mut u = mu + e;
        if let Some(limit) = self.saturation {
            u.apply(|v| *v = v.clamp(-limit, limit));
        }
        u
    }

    /// Derivative of `z = [x; P; Q]` with the actor held at `w_a`.
    fn augmented_rhs(&self, t: f64, z: &DVector<f64>, w_a: &DMatrix<f64>) -> DVector<f64> {
        let n = self.model.n;
        let m = self.model.m;
        let n_a = self.phi_a.dim_out();
        let x = z.rows(0, n).into_owned();
        let phi_a = self.phi_a.eval_unchecked(&x);
        let mu = w_a.transpose() * &phi_a;
        let e = self.expl.eval(t);
        let u = self.applied_input(&mu, &e);

        let mut dz = DVector::zeros(n + 1 + n_a * m);
        dz.rows_mut(0, n).copy_from(&self.model.velocity(&x, &u));
        dz[n] = self.cost.eval_unchecked(&x, &mu);
        let re = &self.cost.r * &e;
        for i in 0..n_a {
            for j in 0..m {
                dz[n + 1 + i * m + j] = 2.0 * phi_a[i] * re[j];
            }
        }
        dz
    }
}

fn check_dims(
    model: &SystemModel,
    cost: &CostSpec,
    phi_c: &BasisSet,
    phi_a: &BasisSet,
    expl: &ExplorationSignal,
    cfg: &LearnerConfig,
) -> Result<()> {
    let n = model.n;
    let m = model.m;
    if phi_c.dim_in() != n || phi_a.dim_in() != n {
        return Err(Error::config(format!(
            "bases take inputs of length {} / {}, plant has n = {n}",
            phi_c.dim_in(),
            phi_a.dim_in()
        )));
    }
    if cost.input_dim() != m {
        return Err(Error::config(format!("R is {0}x{0}, plant has m = {m}", cost.input_dim())));
    }
    if expl.m != m {
        return Err(Error::config(format!("exploration has {} channels, plant has m = {m}", expl.m)));
    }
    if cfg.x0.len() != n {
        return Err(Error::config_field("learner.x0", format!("expected {n} entries, got {}", cfg.x0.len())));
    }
    if cfg.w_c0.len() != phi_c.dim_out() {
        return Err(Error::config_field(
            "learner.w_c0",
            format!("expected {} entries, got {}", phi_c.dim_out(), cfg.w_c0.len()),
        ));
    }
    if cfg.w_a0.len() != phi_a.dim_out() * m {
        return Err(Error::config_field(
            "learner.w_a0",
            format!("expected {} entries, got {}", phi_a.dim_out() * m, cfg.w_a0.len()),
        ));
    }
    Ok(())
}

/// Runs one episode. On divergence the error is returned together with the
/// log accumulated up to the last finite step.
#[allow(clippy::result_large_err)]
pub fn run_episode_partial(
    model: &SystemModel,
    cost: &CostSpec,
    phi_c: &BasisSet,
    phi_a: &BasisSet,
    expl: &ExplorationSignal,
    cfg: &LearnerConfig,
) -> std::result::Result<TrajectoryLog, (Option<TrajectoryLog>, Error)> {
    cfg.validate().map_err(|e| (None, e))?;
    check_dims(model, cost, phi_c, phi_a, expl, cfg).map_err(|e| (None, e))?;
    let started = Instant::now();

    let n = model.n;
    let m = model.m;
    let n_c = phi_c.dim_out();
    let n_a = phi_a.dim_out();
    let h = cfg.h;
    let total_steps = steps_per(cfg.t_final, h).map_err(|e| (None, e))?;
    let window_steps = steps_per(cfg.window, h).map_err(|e| (None, e))?;
    let pe_steps = steps_per(cfg.pe_window, h).map_err(|e| (None, e))?;

    let problem = Problem {
        model,
        cost,
        phi_a,
        expl,
        saturation: cfg.saturation,
    };
    let w_a0 = DMatrix::from_row_slice(n_a, m, &cfg.w_a0);
    let mut weights = WeightState::new(&DVector::from_column_slice(&cfg.w_c0), &w_a0);
    let mut z = DVector::zeros(n + 1 + n_a * m);
    z.rows_mut(0, n).copy_from_slice(&cfg.x0);

    let mut buffer = WindowBuffer::new(window_steps);
    let mut gram = GramAccumulator::new(weights.len(), 0.0);
    let mut records = Vec::with_capacity(total_steps / cfg.log_stride + 2);
    let mut pe_reports = Vec::new();
    let mut summary = EpisodeSummary {
        steps: total_steps,
        t_final: cfg.t_final,
        final_w_c: vec![],
        final_w_a: vec![],
        max_state_norm: 0.0,
        max_weight_norm: 0.0,
        max_abs_bellman: 0.0,
        pe_windows: 0,
        min_beta1_exploring: None,
        pe_windows_below_threshold: 0,
        wall_time_s: 0.0,
    };
    let labels = weight_labels(phi_c, phi_a, m);

    let finish = |summary: &mut EpisodeSummary, weights: &WeightState, records, pe_reports| {
        summary.final_w_c = weights.critic().iter().copied().collect();
        summary.final_w_a = weights.stacked().rows(n_c, n_a * m).iter().copied().collect();
        summary.wall_time_s = started.elapsed().as_secs_f64();
        TrajectoryLog {
            n,
            m,
            weight_labels: labels.clone(),
            records,
            pe_reports,
            summary: summary.clone(),
        }
    };

    for k in 0..=total_steps {
        // Times are k·h rather than accumulated so the grid stays exact.
        let t = k as f64 * h;
        let x = z.rows(0, n).into_owned();

        let state_norm = x.norm();
        let weight_norm = weights.stacked().norm();
        let bad_state = !state_norm.is_finite() || state_norm > cfg.state_cap;
        let bad_weights = !weight_norm.is_finite() || weight_norm > cfg.weight_cap;
        if bad_state || bad_weights {
            let last_valid = records
                .last()
                .map(|r: &StepRecord| {
                    std::iter::once(r.t).chain(r.x.iter().copied()).chain(r.w.iter().copied()).collect()
                })
                .unwrap_or_default();
            let message = if bad_state {
                format!("|x| = {state_norm:e} exceeds cap {}", cfg.state_cap)
            } else {
                format!("|W| = {weight_norm:e} exceeds cap {}", cfg.weight_cap)
            };
            let log = finish(&mut summary, &weights, records, pe_reports);
            return Err((Some(log), Error::Divergence { t, message, last_valid }));
        }
        summary.max_state_norm = summary.max_state_norm.max(state_norm);
        summary.max_weight_norm = summary.max_weight_norm.max(weight_norm);

        let w_a = weights.actor();
        buffer.push(
            t,
            phi_c.eval_unchecked(&x),
            z[n],
            z.rows(n + 1, n_a * m).into_owned(),
        );

        let mut bellman = None;
        let mut m_s = None;
        let mut beta1 = None;
        let mut update = None;
        if let Some(sample) = assemble_regressor(&buffer) {
            let res = bellman_residual(&weights, &sample);
            summary.max_abs_bellman = summary.max_abs_bellman.max(res.abs());
            bellman = Some(res);
            m_s = Some(sample.m_s);

            gram.push(&normalized_regressor(&sample.delta()), h);
            if gram.samples() == pe_steps {
                let rep = gram.report().map_err(|e| (None, e))?;
                beta1 = Some(rep.beta1);
                summary.pe_windows += 1;
                if expl.is_active(rep.window_start) && expl.is_active(t) {
                    summary.min_beta1_exploring =
                        Some(summary.min_beta1_exploring.map_or(rep.beta1, |b: f64| b.min(rep.beta1)));
                    if rep.beta1 < cfg.pe_threshold {
                        summary.pe_windows_below_threshold += 1;
                    }
                }
                pe_reports.push(rep);
                gram.reset(t);
            }
            update = Some(weight_derivative(&weights, &sample, cfg.alpha));
        } else if !cfg.hold_until_full_window {
            // Partial window: regress on whatever history exists so far.
            let head = buffer.entries.back().expect("just pushed");
            let tail = buffer.entries.front().expect("just pushed");
            if buffer.entries.len() > 1 {
                let sample = RegressorSample::new(
                    t,
                    &head.phi_c - &tail.phi_c,
                    &head.probe_integral - &tail.probe_integral,
                    head.cost_integral - tail.cost_integral,
                );
                update = Some(weight_derivative(&weights, &sample, cfg.alpha));
            }
        }

        if k % cfg.log_stride == 0 || k == total_steps || beta1.is_some() {
            let mu = &w_a.transpose() * phi_a.eval_unchecked(&x);
            let e = expl.eval(t);
            records.push(StepRecord {
                t,
                u: problem.applied_input(&mu, &e),
                e,
                x,
                w: weights.stacked().clone(),
                bellman,
                m_s,
                beta1,
            });
        }

        if k == total_steps {
            break;
        }

        match rk4_step(|tau, zz| problem.augmented_rhs(tau, zz, &w_a), t, &z, h) {
            Ok(next) => z = next,
            Err(err) => {
                let log = finish(&mut summary, &weights, records, pe_reports);
                return Err((Some(log), err));
            }
        }
        if let Some(dw) = update {
            *weights.stacked_mut() += dw * h;
        }
    }

    Ok(finish(&mut summary, &weights, records, pe_reports))
}

/// Result of [`collect_windows`].
#[derive(Debug, Clone)]
pub struct WindowBatch {
    pub samples: Vec<RegressorSample>,
    pub x_end: DVector<f64>,
    pub t_end: f64,
    pub max_state_norm: f64,
}

/// Simulates `count` consecutive, non-overlapping windows of length `window`
/// from `(t0, x0)` with the weights frozen, returning one regressor per
/// window. Used by the offline baselines.
#[allow(clippy::too_many_arguments)]
pub fn collect_windows(
    model: &SystemModel,
    cost: &CostSpec,
    phi_c: &BasisSet,
    phi_a: &BasisSet,
    expl: &ExplorationSignal,
    weights: &WeightState,
    x0: &DVector<f64>,
    t0: f64,
    window: f64,
    h: f64,
    count: usize,
) -> Result<WindowBatch> {
    let (n_c, n_a, m) = weights.dims();
    if x0.len() != model.n || phi_c.dim_out() != n_c || phi_a.dim_out() != n_a || m != model.m {
        return Err(Error::config("collect_windows: dimension mismatch"));
    }
    let n = model.n;
    let window_steps = steps_per(window, h)?;
    let problem = Problem {
        model,
        cost,
        phi_a,
        expl,
        saturation: None,
    };
    let w_a = weights.actor();
    let mut z = DVector::zeros(n + 1 + n_a * m);
    z.rows_mut(0, n).copy_from(x0);
    let mut samples = Vec::with_capacity(count);
    let mut max_norm = x0.norm();
    let mut k = 0usize;
    for _ in 0..count {
        let x_start = z.rows(0, n).into_owned();
        let phi_start = phi_c.eval_unchecked(&x_start);
        let p_start = z[n];
        let q_start = z.rows(n + 1, n_a * m).into_owned();
        for _ in 0..window_steps {
            let t = t0 + k as f64 * h;
            z = rk4_step(|tau, zz| problem.augmented_rhs(tau, zz, &w_a), t, &z, h)?;
            k += 1;
            max_norm = max_norm.max(z.rows(0, n).norm());
        }
        let x = z.rows(0, n).into_owned();
        samples.push(RegressorSample::new(
            t0 + k as f64 * h,
            phi_c.eval_unchecked(&x) - phi_start,
            z.rows(n + 1, n_a * m) - q_start,
            z[n] - p_start,
        ));
    }
    Ok(WindowBatch {
        samples,
        x_end: z.rows(0, n).into_owned(),
        t_end: t0 + k as f64 * h,
        max_state_norm: max_norm,
    })
}

/// Runs one episode of synchronous integral Q-learning.
pub fn run_episode(
    model: &SystemModel,
    cost: &CostSpec,
    phi_c: &BasisSet,
    phi_a: &BasisSet,
    expl: &ExplorationSignal,
    cfg: &LearnerConfig,
) -> Result<TrajectoryLog> {
    run_episode_partial(model, cost, phi_c, phi_a, expl, cfg).map_err(|(_, e)| e)
}
