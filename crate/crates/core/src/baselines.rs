//! Reference solvers: Lyapunov equations, Kleinman iteration for LQR, and
//! batch least-squares policy iteration with exploration.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::basis::BasisSet;
use crate::cost::{check_input_weight, CostSpec};
use crate::dynamics::SystemModel;
use crate::error::{Error, Result};
use crate::exploration::ExplorationSignal;
use crate::learner::{collect_windows, WeightState};
use crate::linalg::{asymmetry, is_hurwitz, solve_dense, spectral_abscissa, symmetric_eigen};

const LYAPUNOV_TOL: f64 = 1e-10;

/// `‖AᵀP + PA + Q‖_F`.
pub fn lyapunov_residual(a: &DMatrix<f64>, p: &DMatrix<f64>, q: &DMatrix<f64>) -> f64 {
    (a.transpose() * p + p * a + q).norm()
}

/// Solves `A_clᵀP + P A_cl + Q = 0` for symmetric `P` by vectorizing into
/// `(I⊗A_clᵀ + A_clᵀ⊗I) vec(P) = −vec(Q)`.
pub fn solve_lyapunov(a_cl: &DMatrix<f64>, q: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a_cl.nrows();
    if a_cl.ncols() != n || q.shape() != (n, n) {
        return Err(Error::config("solve_lyapunov: A_cl and Q must be square of equal size"));
    }
    if asymmetry(q) > 1e-10 {
        return Err(Error::config("solve_lyapunov: Q must be symmetric"));
    }
    if !is_hurwitz(a_cl) {
        return Err(Error::Solver(format!(
            "A_cl is not Hurwitz (spectral abscissa {:e})",
            spectral_abscissa(a_cl)
        )));
    }
    let at = a_cl.transpose();
    let eye = DMatrix::<f64>::identity(n, n);
    let lhs = eye.kronecker(&at) + at.kronecker(&eye);
    let rhs = -DVector::from_column_slice(q.as_slice());
    let vec_p = solve_dense(&lhs, &rhs)?;
    let p = DMatrix::from_column_slice(n, n, vec_p.as_slice());
    let p = (&p + p.transpose()) * 0.5;
    let res = lyapunov_residual(a_cl, &p, q);
    let scale = 1.0_f64.max(q.norm());
    if !(res <= LYAPUNOV_TOL * scale) {
        return Err(Error::Solver(format!("Lyapunov residual {res:e} above tolerance")));
    }
    Ok(p)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LQRSolution {
    pub p: DMatrix<f64>,
    /// `u = −Kx`.
    pub k: DMatrix<f64>,
    pub iterations: usize,
    /// Frobenius norm of the algebraic Riccati residual at `P`.
    pub residual: f64,
    /// `P_0, P_1, …` in iteration order.
    pub history: Vec<DMatrix<f64>>,
}

/// `‖AᵀP + PA − PBR⁻¹BᵀP + S‖_F`.
pub fn riccati_residual(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    s: &DMatrix<f64>,
    r: &DMatrix<f64>,
    p: &DMatrix<f64>,
) -> Result<f64> {
    let k = gain_from(b, r, p)?;
    Ok((a.transpose() * p + p * a - p * b * &k + s).norm())
}

/// `R⁻¹BᵀP`.
fn gain_from(b: &DMatrix<f64>, r: &DMatrix<f64>, p: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let bt_p = b.transpose() * p;
    let mut k = DMatrix::zeros(bt_p.nrows(), bt_p.ncols());
    for j in 0..bt_p.ncols() {
        let col = solve_dense(r, &bt_p.column(j).into_owned())?;
        k.set_column(j, &col);
    }
    Ok(k)
}

/// Kleinman's policy iteration for `ẋ = Ax + Bu`, cost `xᵀSx + uᵀRu`.
pub fn kleinman_iteration(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    s: &DMatrix<f64>,
    r: &DMatrix<f64>,
    k0: &DMatrix<f64>,
    tol: f64,
    max_iter: usize,
) -> Result<LQRSolution> {
    let n = a.nrows();
    let m = b.ncols();
    if a.shape() != (n, n) || b.nrows() != n || s.shape() != (n, n) || k0.shape() != (m, n) {
        return Err(Error::config(format!(
            "kleinman: inconsistent shapes A {:?}, B {:?}, S {:?}, K0 {:?}",
            a.shape(),
            b.shape(),
            s.shape(),
            k0.shape()
        )));
    }
    check_input_weight(r)?;
    if r.nrows() != m {
        return Err(Error::config_field("cost.r", format!("R must be {m}x{m}")));
    }
    let a0 = a - b * k0;
    if !is_hurwitz(&a0) {
        return Err(Error::config_field(
            "k0",
            format!(
                "initial gain does not stabilize A - B K0 (spectral abscissa {:e})",
                spectral_abscissa(&a0)
            ),
        ));
    }

    let mut k = k0.clone();
    let mut history: Vec<DMatrix<f64>> = Vec::new();
    for i in 0..max_iter {
        let a_cl = a - b * &k;
        let q = s + k.transpose() * r * &k;
        let p = solve_lyapunov(&a_cl, &((&q + q.transpose()) * 0.5))?;
        k = gain_from(b, r, &p)?;
        let step = history.last().map(|prev| (&p - prev).norm());
        history.push(p);
        if let Some(step) = step {
            if step <= tol {
                let p = history.last().expect("non-empty").clone();
                let residual = riccati_residual(a, b, s, r, &p)?;
                return Ok(LQRSolution {
                    p,
                    k,
                    iterations: i + 1,
                    residual,
                    history,
                });
            }
        }
    }
    let residual = match history.last() {
        Some(p) => riccati_residual(a, b, s, r, p)?,
        None => f64::NAN,
    };
    Err(Error::Convergence {
        iterations: max_iter,
        residual,
    })
}

/// Smallest eigenvalue of `P_i − P_{i+1}` over consecutive iterates; Kleinman
/// iterates are non-increasing, so this should be ≥ 0 up to roundoff.
pub fn loewner_monotonicity(history: &[DMatrix<f64>]) -> Result<f64> {
    let mut worst = f64::INFINITY;
    for pair in history.windows(2) {
        let d = &pair[0] - &pair[1];
        let d = (&d + d.transpose()) * 0.5;
        worst = worst.min(symmetric_eigen(&d)?[0]);
    }
    Ok(worst)
}

/// Settings for [`batch_ls_pi`].
#[derive(Debug, Clone, PartialEq)]
pub struct BatchPIConfig {
    pub window: f64,
    pub h: f64,
    /// Windows per iteration; `None` means `2 (N_c + N_a m)`.
    pub window_count: Option<usize>,
    pub iterations: usize,
    pub x0: Vec<f64>,
    /// States beyond this norm flag the iteration.
    pub state_cap: f64,
    /// Regressor condition numbers above this are treated as rank deficient.
    pub max_condition: f64,
}

impl BatchPIConfig {
    pub fn new(window: f64, h: f64, iterations: usize, x0: Vec<f64>) -> Self {
        Self {
            window,
            h,
            window_count: None,
            iterations,
            x0,
            state_cap: 50.0,
            max_condition: 1e8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PIIterationRecord {
    pub iteration: usize,
    pub w_c: Vec<f64>,
    /// Row-major `N_a × m`.
    pub w_a: Vec<f64>,
    /// 2-norm condition number of the stacked regressor.
    pub condition: f64,
    /// `‖Φ W + ρ‖₂` at the solution.
    pub residual: f64,
    pub max_state_norm: f64,
    pub state_flagged: bool,
}

/// Least-squares policy iteration on windowed data: each iteration runs the
/// current actor with exploration for `window_count` consecutive windows and
/// solves `δᵀW = −ρ` for the next `(w_c, w_a)` jointly. State and time carry
/// over between iterations.
pub fn batch_ls_pi(
    model: &SystemModel,
    cost: &CostSpec,
    phi_c: &BasisSet,
    phi_a: &BasisSet,
    expl: &ExplorationSignal,
    cfg: &BatchPIConfig,
    initial: &WeightState,
) -> Result<Vec<PIIterationRecord>> {
    let (n_c, n_a, m) = initial.dims();
    let dim = n_c + n_a * m;
    let count = cfg.window_count.unwrap_or(2 * dim);
    if count < dim {
        return Err(Error::config_field(
            "window_count",
            format!("need at least {dim} windows, got {count}"),
        ));
    }
    if cfg.x0.len() != model.n {
        return Err(Error::config_field("x0", format!("expected {} entries", model.n)));
    }

    let mut weights = initial.clone();
    let mut x = DVector::from_column_slice(&cfg.x0);
    let mut t = 0.0;
    let mut out = Vec::with_capacity(cfg.iterations);
    for it in 0..cfg.iterations {
        let batch = collect_windows(model, cost, phi_c, phi_a, expl, &weights, &x, t, cfg.window, cfg.h, count)?;
        let phi = DMatrix::from_fn(count, dim, |row, col| {
            let s = &batch.samples[row];
            if col < n_c {
                s.delta_c[col]
            } else {
                s.delta_a[col - n_c]
            }
        });
        let rho = DVector::from_iterator(count, batch.samples.iter().map(|s| s.rho));

        let normal = phi.transpose() * &phi;
        let eig = symmetric_eigen(&((&normal + normal.transpose()) * 0.5))?;
        let (lo, hi) = (eig[0].max(0.0), eig[dim - 1]);
        let condition = if lo > 0.0 { (hi / lo).sqrt() } else { f64::INFINITY };
        if !(condition <= cfg.max_condition) {
            return Err(Error::Excitation { condition });
        }
        let reg = normal + DMatrix::identity(dim, dim) * 1e-12;
        let w = solve_dense(&reg, &(-(phi.transpose() * &rho)))?;
        let residual = (&phi * &w + &rho).norm();
        weights = WeightState::from_stacked(w, n_c, n_a, m)?;

        out.push(PIIterationRecord {
            iteration: it,
            w_c: weights.critic().iter().copied().collect(),
            w_a: weights.stacked().rows(n_c, n_a * m).iter().copied().collect(),
            condition,
            residual,
            max_state_norm: batch.max_state_norm,
            state_flagged: !(batch.max_state_norm <= cfg.state_cap),
        });
        x = batch.x_end;
        t = batch.t_end;
    }
    Ok(out)
}
