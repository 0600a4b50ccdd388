//! Probing signals and persistence-of-excitation diagnostics.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
pub use crate::linalg::symmetric_eigen;

/// A frozen sum of sinusoids, switched off at `active_until`.
///
/// Component `k` contributes `amplitudes[k] · sin(frequencies[k] t + phases[k])`
/// to input channel `channels[k]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplorationSignal {
    pub frequencies: Vec<f64>,
    pub amplitudes: Vec<f64>,
    pub phases: Vec<f64>,
    pub channels: Vec<usize>,
    pub m: usize,
    pub active_until: f64,
    pub seed: u64,
}

impl ExplorationSignal {
    /// The zero signal on `m` channels.
    pub fn none(m: usize) -> Self {
        Self {
            frequencies: vec![],
            amplitudes: vec![],
            phases: vec![],
            channels: vec![],
            m,
            active_until: 0.0,
            seed: 0,
        }
    }

    pub fn eval(&self, t: f64) -> DVector<f64> {
        let mut e = DVector::zeros(self.m);
        self.eval_into(t, &mut e);
        e
    }

    pub(crate) fn eval_into(&self, t: f64, e: &mut DVector<f64>) {
        e.fill(0.0);
        if t >= self.active_until {
            return;
        }
        for k in 0..self.frequencies.len() {
            e[self.channels[k]] += self.amplitudes[k] * (self.frequencies[k] * t + self.phases[k]).sin();
        }
    }

    /// Triangle-inequality bound on `|e_j(t)|` over all channels.
    pub fn bound(&self) -> f64 {
        (0..self.m)
            .map(|j| {
                self.amplitudes
                    .iter()
                    .zip(&self.channels)
                    .filter(|(_, &c)| c == j)
                    .map(|(a, _)| a.abs())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    pub fn is_active(&self, t: f64) -> bool {
        t < self.active_until && !self.frequencies.is_empty()
    }
}

/// `amplitude · Σₖ sin(ωₖ t)` with `count` frequencies drawn uniformly from
/// `freq_range` by a ChaCha8 stream seeded with `seed`.
pub fn make_sinusoid_sum(
    count: usize,
    freq_range: [f64; 2],
    seed: u64,
    active_until: f64,
    amplitude: f64,
) -> Result<ExplorationSignal> {
    make_sinusoid_channels(1, count, freq_range, seed, active_until, amplitude)
}

/// Like [`make_sinusoid_sum`], drawing `count` independent frequencies for
/// each of `m` input channels (channel 0 first).
pub fn make_sinusoid_channels(
    m: usize,
    count: usize,
    freq_range: [f64; 2],
    seed: u64,
    active_until: f64,
    amplitude: f64,
) -> Result<ExplorationSignal> {
    if count == 0 {
        return Err(Error::config_field("exploration.count", "need at least one sinusoid"));
    }
    if m == 0 {
        return Err(Error::config("exploration needs at least one input channel"));
    }
    let [lo, hi] = freq_range;
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::config_field(
            "exploration.freq_range",
            format!("expected lo < hi, got [{lo}, {hi}]"),
        ));
    }
    if !amplitude.is_finite() {
        return Err(Error::config_field("exploration.amplitude", "amplitude must be finite"));
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let total = m * count;
    let frequencies: Vec<f64> = (0..total).map(|_| rng.random_range(lo..hi)).collect();
    Ok(ExplorationSignal {
        frequencies,
        amplitudes: vec![amplitude; total],
        phases: vec![0.0; total],
        channels: (0..total).map(|k| k / count).collect(),
        m,
        active_until,
        seed,
    })
}

/// `δ / (1 + δᵀδ)`.
pub fn normalized_regressor(delta: &DVector<f64>) -> DVector<f64> {
    delta / (1.0 + delta.norm_squared())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PEReport {
    pub window_start: f64,
    pub window_end: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub gram_dim: usize,
}

/// Running left-Riemann sum `Σ δ̄δ̄ᵀ dτ`.
#[derive(Debug, Clone)]
pub struct GramAccumulator {
    gram: DMatrix<f64>,
    start: f64,
    span: f64,
    samples: usize,
}

impl GramAccumulator {
    pub fn new(dim: usize, start: f64) -> Self {
        Self {
            gram: DMatrix::zeros(dim, dim),
            start,
            span: 0.0,
            samples: 0,
        }
    }

    pub fn push(&mut self, delta_bar: &DVector<f64>, dt: f64) {
        self.gram.ger(dt, delta_bar, delta_bar, 1.0);
        self.span += dt;
        self.samples += 1;
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    pub fn report(&self) -> Result<PEReport> {
        if self.samples == 0 {
            return Err(Error::config("PE window has no samples"));
        }
        let full = &self.gram;
        let eig = symmetric_eigen(full)?;
        Ok(PEReport {
            window_start: self.start,
            window_end: self.start + self.span,
            // Roundoff can push the smallest eigenvalue of a singular PSD
            // matrix slightly negative.
            beta1: eig[0].max(0.0),
            beta2: eig[eig.len() - 1].max(0.0),
            gram_dim: full.nrows(),
        })
    }

    pub fn reset(&mut self, start: f64) {
        self.gram.fill(0.0);
        self.start = start;
        self.span = 0.0;
        self.samples = 0;
    }
}

/// Gram matrix of `(δ̄, dτ)` samples starting at `window_start`, and its
/// extreme eigenvalues.
pub fn pe_gram(window_start: f64, samples: &[(DVector<f64>, f64)]) -> Result<PEReport> {
    let first = samples
        .first()
        .ok_or_else(|| Error::config("pe_gram: empty sample set"))?;
    let mut acc = GramAccumulator::new(first.0.len(), window_start);
    for (d, dt) in samples {
        if d.len() != first.0.len() {
            return Err(Error::config("pe_gram: inconsistent regressor lengths"));
        }
        acc.push(d, *dt);
    }
    acc.report()
}
