//! Input-affine plants `ẋ = f(x) + g(x) u` and the fixed-step integrator.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub type VectorField = Arc<dyn Fn(&DVector<f64>) -> DVector<f64> + Send + Sync>;
pub type GainField = Arc<dyn Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync>;
pub type ScalarField = Arc<dyn Fn(&DVector<f64>) -> f64 + Send + Sync>;

/// An input-affine plant, optionally carrying its closed-form optimal
/// value function and policy.
#[derive(Clone)]
pub struct SystemModel {
    pub name: String,
    pub n: usize,
    pub m: usize,
    drift: VectorField,
    input_gain: GainField,
    oracle_value: Option<ScalarField>,
    oracle_value_gradient: Option<VectorField>,
    oracle_policy: Option<VectorField>,
    linear: Option<(DMatrix<f64>, DMatrix<f64>)>,
}

impl fmt::Debug for SystemModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SystemModel")
            .field("name", &self.name)
            .field("n", &self.n)
            .field("m", &self.m)
            .field("has_oracles", &self.has_oracles())
            .field("linear", &self.linear.is_some())
            .finish()
    }
}

impl SystemModel {
    pub fn new(
        name: impl Into<String>,
        n: usize,
        m: usize,
        drift: VectorField,
        input_gain: GainField,
    ) -> Self {
        Self {
            name: name.into(),
            n,
            m,
            drift,
            input_gain,
            oracle_value: None,
            oracle_value_gradient: None,
            oracle_policy: None,
            linear: None,
        }
    }

    /// Attaches closed-form `V*`, its gradient and `μ*`.
    pub fn with_oracles(
        mut self,
        value: ScalarField,
        value_gradient: VectorField,
        policy: VectorField,
    ) -> Self {
        self.oracle_value = Some(value);
        self.oracle_value_gradient = Some(value_gradient);
        self.oracle_policy = Some(policy);
        self
    }

    pub fn drift(&self, x: &DVector<f64>) -> DVector<f64> {
        (self.drift)(x)
    }

    pub fn input_gain(&self, x: &DVector<f64>) -> DMatrix<f64> {
        (self.input_gain)(x)
    }

    /// `f(x) + g(x) u`.
    pub fn velocity(&self, x: &DVector<f64>, u: &DVector<f64>) -> DVector<f64> {
        self.drift(x) + self.input_gain(x) * u
    }

    pub fn oracle_value(&self, x: &DVector<f64>) -> Option<f64> {
        self.oracle_value.as_ref().map(|v| v(x))
    }

    pub fn oracle_value_gradient(&self, x: &DVector<f64>) -> Option<DVector<f64>> {
        self.oracle_value_gradient.as_ref().map(|v| v(x))
    }

    pub fn oracle_policy(&self, x: &DVector<f64>) -> Option<DVector<f64>> {
        self.oracle_policy.as_ref().map(|v| v(x))
    }

    pub fn has_oracles(&self) -> bool {
        self.oracle_value.is_some() && self.oracle_policy.is_some()
    }

    /// `(A, B)` when the model was built by [`make_linear`].
    pub fn linear_matrices(&self) -> Option<(&DMatrix<f64>, &DMatrix<f64>)> {
        self.linear.as_ref().map(|(a, b)| (a, b))
    }
}

fn benchmark_gain(x1: f64) -> f64 {
    (2.0 * x1).cos() + 2.0
}

/// The second-order nonlinear benchmark whose optimal solution under
/// `S(x) = x₁² + x₂²`, `R = 1` is `V*(x) = ½x₁² + x₂²`, `μ*(x) = −(cos 2x₁ + 2) x₂`.
pub fn make_benchmark() -> SystemModel {
    let drift: VectorField = Arc::new(|x: &DVector<f64>| {
        let (x1, x2) = (x[0], x[1]);
        let c = benchmark_gain(x1);
        DVector::from_vec(vec![-x1 + x2, -0.5 * x1 - 0.5 * x2 * (1.0 - c * c)])
    });
    let gain: GainField =
        Arc::new(|x: &DVector<f64>| DMatrix::from_column_slice(2, 1, &[0.0, benchmark_gain(x[0])]));
    let value: ScalarField = Arc::new(|x: &DVector<f64>| 0.5 * x[0] * x[0] + x[1] * x[1]);
    let value_gradient: VectorField =
        Arc::new(|x: &DVector<f64>| DVector::from_vec(vec![x[0], 2.0 * x[1]]));
    let policy: VectorField =
        Arc::new(|x: &DVector<f64>| DVector::from_element(1, -benchmark_gain(x[0]) * x[1]));
    SystemModel::new("benchmark", 2, 1, drift, gain).with_oracles(value, value_gradient, policy)
}

/// `ẋ = A x + B u`. Oracles are attached later from a Riccati solution.
pub fn make_linear(a: DMatrix<f64>, b: DMatrix<f64>) -> Result<SystemModel> {
    let n = a.nrows();
    if a.ncols() != n || n == 0 {
        return Err(Error::config_field(
            "system.a",
            format!("A must be square and non-empty, got {}x{}", a.nrows(), a.ncols()),
        ));
    }
    if b.nrows() != n || b.ncols() == 0 {
        return Err(Error::config_field(
            "system.b",
            format!("B must have {n} rows and at least one column, got {}x{}", b.nrows(), b.ncols()),
        ));
    }
    let m = b.ncols();
    let a_drift = a.clone();
    let b_gain = b.clone();
    let drift: VectorField = Arc::new(move |x: &DVector<f64>| &a_drift * x);
    let gain: GainField = Arc::new(move |_: &DVector<f64>| b_gain.clone());
    let mut model = SystemModel::new("linear", n, m, drift, gain);
    model.linear = Some((a, b));
    Ok(model)
}

/// Attaches `V*(x) = xᵀPx` and `μ*(x) = −Kx` to a linear model.
pub fn attach_quadratic_oracles(model: SystemModel, p: &DMatrix<f64>, k: &DMatrix<f64>) -> SystemModel {
    let pv = p.clone();
    let pg = p.clone();
    let kk = k.clone();
    model.with_oracles(
        Arc::new(move |x: &DVector<f64>| x.dot(&(&pv * x))),
        Arc::new(move |x: &DVector<f64>| (&pg + pg.transpose()) * x),
        Arc::new(move |x: &DVector<f64>| -(&kk * x)),
    )
}

/// Fixed-step integration settings. Only classical RK4 is provided.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub h: f64,
}

impl IntegratorConfig {
    pub fn new(h: f64) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::config_field("learner.h", format!("step must be positive, got {h}")));
        }
        Ok(Self { h })
    }

    /// Number of steps covering `span`, failing unless `span` is an integer
    /// multiple of `h` (to within 1e-9 relative).
    pub fn steps_in(&self, span: f64) -> Result<usize> {
        steps_per(span, self.h)
    }
}

pub(crate) fn steps_per(span: f64, h: f64) -> Result<usize> {
    let ratio = span / h;
    let rounded = ratio.round();
    if rounded < 1.0 || (ratio - rounded).abs() > 1e-9 * rounded.max(1.0) {
        return Err(Error::config_field(
            "learner.T",
            format!("interval {span} is not an integer multiple of step {h}"),
        ));
    }
    Ok(rounded as usize)
}

fn check_finite(t: f64, z: &DVector<f64>, k: &DVector<f64>) -> Result<()> {
    if k.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::Numerical {
            t,
            state: z.iter().copied().collect(),
            message: "non-finite derivative".into(),
        })
    }
}

/// One classical Runge–Kutta step `z + h/6 (k₁ + 2k₂ + 2k₃ + k₄)`.
pub fn rk4_step<F>(mut deriv: F, t: f64, z: &DVector<f64>, h: f64) -> Result<DVector<f64>>
where
    F: FnMut(f64, &DVector<f64>) -> DVector<f64>,
{
    let half = 0.5 * h;
    let k1 = deriv(t, z);
    check_finite(t, z, &k1)?;
    let z2 = z + &k1 * half;
    let k2 = deriv(t + half, &z2);
    check_finite(t + half, &z2, &k2)?;
    let z3 = z + &k2 * half;
    let k3 = deriv(t + half, &z3);
    check_finite(t + half, &z3, &k3)?;
    let z4 = z + &k3 * h;
    let k4 = deriv(t + h, &z4);
    check_finite(t + h, &z4, &k4)?;
    Ok(z + (k1 + (k2 + k3) * 2.0 + k4) * (h / 6.0))
}
