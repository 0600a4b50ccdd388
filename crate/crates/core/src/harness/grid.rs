//! Approximation errors against closed-form oracles on a state grid.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::basis::BasisSet;
use crate::dynamics::SystemModel;
use crate::error::{Error, Result};
use crate::learner::{policy_estimate, value_estimate, WeightState};

/// Tensor grid over `[lo, hi]` with `resolution` nodes per axis, both ends
/// included.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub resolution: usize,
}

impl GridSpec {
    pub fn cube(n: usize, half_width: f64, resolution: usize) -> Self {
        Self {
            lo: vec![-half_width; n],
            hi: vec![half_width; n],
            resolution,
        }
    }

    fn check(&self) -> Result<()> {
        if self.resolution < 2 || self.lo.len() != self.hi.len() || self.lo.is_empty() {
            return Err(Error::config_field("grid", "grid needs matching bounds and resolution >= 2"));
        }
        if self.lo.iter().zip(&self.hi).any(|(l, h)| !(l < h)) {
            return Err(Error::config_field("grid", "grid bounds must satisfy lo < hi"));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.resolution.pow(self.lo.len() as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Node `idx` in lexicographic order, first coordinate slowest.
    pub fn node(&self, mut idx: usize) -> DVector<f64> {
        let n = self.lo.len();
        let r = self.resolution;
        let mut x = DVector::zeros(n);
        for i in (0..n).rev() {
            let k = idx % r;
            idx /= r;
            // Exact endpoints: the last node is `hi`, not lo + (r-1)·step.
            x[i] = if k == r - 1 {
                self.hi[i]
            } else {
                self.lo[i] + (self.hi[i] - self.lo[i]) * k as f64 / (r - 1) as f64
            };
        }
        x
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub x: Vec<f64>,
    pub value_error: f64,
    pub policy_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridEvalReport {
    pub grid: GridSpec,
    pub max_value_error: f64,
    pub mean_value_error: f64,
    /// Euclidean norm of `μ̂ − μ*` (absolute value for one input).
    pub max_policy_error: f64,
    pub mean_policy_error: f64,
    #[serde(skip)]
    pub points: Vec<GridPoint>,
}

/// `|V̂ − V*|` and `‖μ̂ − μ*‖` at every grid node.
pub fn eval_error_grid(
    w: &WeightState,
    phi_c: &BasisSet,
    phi_a: &BasisSet,
    model: &SystemModel,
    grid: &GridSpec,
) -> Result<GridEvalReport> {
    grid.check()?;
    if !model.has_oracles() {
        return Err(Error::config_field(
            "system",
            format!("system `{}` has no closed-form value/policy to compare against", model.name),
        ));
    }
    if grid.lo.len() != model.n {
        return Err(Error::config_field("grid", format!("grid has dimension {}, plant has n = {}", grid.lo.len(), model.n)));
    }
    let mut points = Vec::with_capacity(grid.len());
    for idx in 0..grid.len() {
        let x = grid.node(idx);
        let v_star = model.oracle_value(&x).expect("checked above");
        let mu_star = model.oracle_policy(&x).expect("checked above");
        let value_error = (value_estimate(w, phi_c, &x)? - v_star).abs();
        let policy_error = (policy_estimate(w, phi_a, &x)? - mu_star).norm();
        points.push(GridPoint {
            x: x.iter().copied().collect(),
            value_error,
            policy_error,
        });
    }
    let count = points.len() as f64;
    let max = |f: fn(&GridPoint) -> f64| points.iter().map(f).fold(0.0, f64::max);
    let mean = |f: fn(&GridPoint) -> f64| points.iter().map(f).sum::<f64>() / count;
    Ok(GridEvalReport {
        grid: grid.clone(),
        max_value_error: max(|p| p.value_error),
        mean_value_error: mean(|p| p.value_error),
        max_policy_error: max(|p| p.policy_error),
        mean_policy_error: mean(|p| p.policy_error),
        points,
    })
}
