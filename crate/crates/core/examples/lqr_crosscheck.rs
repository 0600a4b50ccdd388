//! On a linear plant the synchronous learner should recover the Riccati
//! solution found by Kleinman iteration.
//!
//!     cargo run --release --example lqr_crosscheck

use nalgebra::{DMatrix, DVector};
use siql::baselines::{kleinman_iteration, loewner_monotonicity};
use siql::basis::{polynomial_basis, quadratic_basis, quadratic_weights_to_matrix};
use siql::cost::CostSpec;
use siql::dynamics::make_linear;
use siql::exploration::make_sinusoid_sum;
use siql::learner::{run_episode, LearnerConfig};

fn main() -> siql::Result<()> {
    let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, -2.0]);
    let b = DMatrix::from_row_slice(2, 1, &[0.0, 1.0]);
    let s = DMatrix::identity(2, 2);
    let r = DMatrix::identity(1, 1);

    let sol = kleinman_iteration(&a, &b, &s, &r, &DMatrix::zeros(1, 2), 1e-12, 100)?;
    println!("Kleinman: {} iterations, Riccati residual {:.1e}", sol.iterations, sol.residual);
    println!("  min eig(P_i - P_i+1) = {:.1e}", loewner_monotonicity(&sol.history)?);
    for (i, p) in sol.history.iter().enumerate() {
        println!("  P_{i} = {:.6?}", p.as_slice());
    }

    let sys = make_linear(a, b)?;
    let cost = CostSpec::quadratic(s, r)?;
    let expl = make_sinusoid_sum(100, [-50.0, 50.0], 9, 90.0, 1.0)?;
    let mut cfg = LearnerConfig::new(1000.0, 0.025, 1e-3, 100.0);
    cfg.x0 = vec![0.0, 0.0];
    cfg.w_c0 = vec![1.0, 1.0, 1.0];
    cfg.w_a0 = vec![0.0, 0.0];
    cfg.log_stride = 10_000;
    let log = run_episode(&sys, &cost, &quadratic_basis(2)?, &polynomial_basis(2, 1)?, &expl, &cfg)?;

    let p = quadratic_weights_to_matrix(&DVector::from_column_slice(&log.summary.final_w_c), 2)?;
    println!("learned P = {:.6?}", p.as_slice());
    println!("Riccati P = {:.6?}", sol.p.as_slice());
    println!("max |difference| = {:.2e}", (&p - &sol.p).abs().max());
    // The actor weights are -K^T.
    println!("learned K = {:.6?}, Riccati K = {:.6?}", log.summary.final_w_a.iter().map(|w| -w).collect::<Vec<_>>(), sol.k.as_slice());
    Ok(())
}
