//! Running cost `r(x, u) = S(x) + uᵀRu`.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use serde::Serialize;

use crate::dynamics::ScalarField;
use crate::error::{Error, Result};
use crate::linalg;

/// State penalty `S(x)`.
#[derive(Clone)]
pub enum StateCost {
    /// `xᵀQx`.
    Quadratic(DMatrix<f64>),
    Custom { name: String, eval: ScalarField },
}

impl fmt::Debug for StateCost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StateCost::Quadratic(q) => f.debug_tuple("Quadratic").field(q).finish(),
            StateCost::Custom { name, .. } => f.debug_struct("Custom").field("name", name).finish(),
        }
    }
}

impl StateCost {
    pub fn eval(&self, x: &DVector<f64>) -> f64 {
        match self {
            StateCost::Quadratic(q) => x.dot(&(q * x)),
            StateCost::Custom { eval, .. } => eval(x),
        }
    }
}

#[derive(Debug, Clone)]
pub struct CostSpec {
    pub state_cost: StateCost,
    pub r: DMatrix<f64>,
}

impl CostSpec {
    pub fn quadratic(q: DMatrix<f64>, r: DMatrix<f64>) -> Result<Self> {
        if q.nrows() != q.ncols() {
            return Err(Error::config_field("cost.q", "Q must be square"));
        }
        if linalg::asymmetry(&q) > 1e-12 {
            return Err(Error::config_field("cost.q", "Q must be symmetric"));
        }
        check_input_weight(&r)?;
        Ok(Self {
            state_cost: StateCost::Quadratic(q),
            r,
        })
    }

    pub fn custom(
        name: impl Into<String>,
        state_cost: impl Fn(&DVector<f64>) -> f64 + Send + Sync + 'static,
        r: DMatrix<f64>,
    ) -> Result<Self> {
        check_input_weight(&r)?;
        Ok(Self {
            state_cost: StateCost::Custom {
                name: name.into(),
                eval: Arc::new(state_cost),
            },
            r,
        })
    }

    /// `S(x) = x₁² + x₂²`, `R = 1`: the cost paired with the benchmark plant.
    pub fn benchmark() -> Self {
        Self::quadratic(DMatrix::identity(2, 2), DMatrix::identity(1, 1)).expect("static cost")
    }

    pub fn input_dim(&self) -> usize {
        self.r.nrows()
    }

    pub(crate) fn eval_unchecked(&self, x: &DVector<f64>, u: &DVector<f64>) -> f64 {
        self.state_cost.eval(x) + u.dot(&(&self.r * u))
    }
}

/// Checks that `R` is symmetric to 1e-12 and positive definite.
pub fn check_input_weight(r: &DMatrix<f64>) -> Result<()> {
    if r.nrows() != r.ncols() || r.nrows() == 0 {
        return Err(Error::config_field("cost.r", "R must be square and non-empty"));
    }
    let asym = linalg::asymmetry(r);
    if asym > 1e-12 {
        return Err(Error::config_field(
            "cost.r",
            format!("R must be symmetric (asymmetry {asym:e})"),
        ));
    }
    if r.clone().cholesky().is_none() {
        let eig = linalg::symmetric_eigen(r)?;
        return Err(Error::config_field(
            "cost.r",
            format!("R is not positive definite (eigenvalue {})", (eig[0] * 1e12).round() / 1e12),
        ));
    }
    Ok(())
}

pub fn running_cost(cost: &CostSpec, x: &DVector<f64>, u: &DVector<f64>) -> Result<f64> {
    if u.len() != cost.input_dim() {
        return Err(Error::config(format!(
            "input has length {}, R is {}x{}",
            u.len(),
            cost.r.nrows(),
            cost.r.ncols()
        )));
    }
    if x.iter().chain(u.iter()).any(|v| !v.is_finite()) {
        return Err(Error::Numerical {
            t: f64::NAN,
            state: x.iter().copied().collect(),
            message: "non-finite input to running cost".into(),
        });
    }
    let r = cost.eval_unchecked(x, u);
    if !r.is_finite() {
        return Err(Error::Numerical {
            t: f64::NAN,
            state: x.iter().copied().collect(),
            message: "running cost is not finite".into(),
        });
    }
    Ok(r)
}

/// Axis-aligned sampling box.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleRegion {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl SampleRegion {
    pub fn cube(n: usize, half_width: f64) -> Self {
        Self {
            lo: vec![-half_width; n],
            hi: vec![half_width; n],
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CostReport {
    pub r_positive_definite: bool,
    pub r_min_eigenvalue: f64,
    pub state_cost_at_origin: f64,
    /// Minimum of `S(x)/‖x‖²` over the sampled nonzero points.
    pub min_state_ratio: f64,
    pub samples: usize,
    pub warnings: Vec<String>,
}

impl CostReport {
    pub fn passed(&self) -> bool {
        self.r_positive_definite && self.warnings.is_empty()
    }
}

const VALIDATION_SAMPLES: usize = 1000;
const SEMIDEFINITE_RATIO: f64 = 1e-9;

/// Samples `S` over `region` (axis points of the box plus 1000 uniform
/// draws) and checks `R`. An indefinite `R` is an error, a merely
/// semidefinite `S` is a warning.
pub fn validate_cost(cost: &CostSpec, region: &SampleRegion) -> Result<CostReport> {
    check_input_weight(&cost.r)?;
    let n = region.lo.len();
    if region.hi.len() != n || region.lo.iter().zip(&region.hi).any(|(l, h)| !(l < h)) {
        return Err(Error::config("sample region must be a non-empty box"));
    }
    let r_min = linalg::symmetric_eigen(&cost.r)?[0];

    let mut points: Vec<DVector<f64>> = Vec::with_capacity(VALIDATION_SAMPLES + 2 * n);
    for i in 0..n {
        for bound in [region.lo[i], region.hi[i]] {
            if bound != 0.0 {
                let mut x = DVector::zeros(n);
                x[i] = bound;
                points.push(x);
            }
        }
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5eed);
    while points.len() < VALIDATION_SAMPLES + 2 * n {
        let x = DVector::from_fn(n, |i, _| rng.random_range(region.lo[i]..region.hi[i]));
        if x.norm_squared() > 0.0 {
            points.push(x);
        }
    }

    let min_ratio = points
        .iter()
        .map(|x| cost.state_cost.eval(x) / x.norm_squared())
        .fold(f64::INFINITY, f64::min);
    let at_origin = cost.state_cost.eval(&DVector::zeros(n));

    let mut warnings = Vec::new();
    if at_origin != 0.0 {
        warnings.push(format!("S(0) = {at_origin}, expected 0"));
    }
    if min_ratio <= SEMIDEFINITE_RATIO {
        warnings.push(format!(
            "S is not positive definite on the sample (min S(x)/|x|^2 = {min_ratio:e})"
        ));
    }
    Ok(CostReport {
        r_positive_definite: true,
        r_min_eigenvalue: r_min,
        state_cost_at_origin: at_origin,
        min_state_ratio: min_ratio,
        samples: points.len(),
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn v(xs: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(xs)
    }

    #[test]
    fn benchmark_cost_values() {
        let c = CostSpec::benchmark();
        assert_eq!(running_cost(&c, &v(&[1.0, 1.0]), &v(&[2.0])).unwrap(), 6.0);
        assert_eq!(running_cost(&c, &v(&[0.0, 0.0]), &v(&[0.0])).unwrap(), 0.0);
        assert_eq!(c.r, DMatrix::identity(1, 1));
    }

    #[test]
    fn non_finite_input_rejected() {
        let c = CostSpec::benchmark();
        let err = running_cost(&c, &v(&[f64::NAN, 0.0]), &v(&[0.0])).unwrap_err();
        assert!(matches!(err, Error::Numerical { .. }));
    }

    #[test]
    fn validation_passes_for_benchmark() {
        let rep = validate_cost(&CostSpec::benchmark(), &SampleRegion::cube(2, 1.0)).unwrap();
        assert!(rep.passed());
        assert!((rep.min_state_ratio - 1.0).abs() < 1e-12);
    }

    #[test]
    fn indefinite_r_names_eigenvalue() {
        let r = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        let err = CostSpec::quadratic(DMatrix::identity(2, 2), r.clone()).unwrap_err();
        assert!(err.to_string().contains("eigenvalue -1"), "{err}");

        let bad = CostSpec {
            state_cost: StateCost::Quadratic(DMatrix::identity(2, 2)),
            r,
        };
        assert!(matches!(
            validate_cost(&bad, &SampleRegion::cube(2, 1.0)),
            Err(Error::Config { .. })
        ));
    }

    #[test]
    fn semidefinite_state_cost_warns() {
        let c = CostSpec::custom("x1_only", |x| x[0] * x[0], DMatrix::identity(1, 1)).unwrap();
        let rep = validate_cost(&c, &SampleRegion::cube(2, 1.0)).unwrap();
        assert_eq!(rep.min_state_ratio, 0.0);
        assert_eq!(rep.warnings.len(), 1);
        assert!(!rep.passed());
    }

    proptest! {
        #[test]
        fn quadratic_in_input(x1 in -3.0..3.0f64, x2 in -3.0..3.0f64, u in -3.0..3.0f64) {
            let c = CostSpec::benchmark();
            let x = v(&[x1, x2]);
            let s = c.state_cost.eval(&x);
            let r1 = running_cost(&c, &x, &v(&[u])).unwrap();
            let r2 = running_cost(&c, &x, &v(&[2.0 * u])).unwrap();
            prop_assert!(r1 >= 0.0);
            prop_assert!(((r2 - s) - 4.0 * (r1 - s)).abs() <= 1e-12 * (1.0 + r2.abs()));
        }
    }
}
