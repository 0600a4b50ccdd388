//! Offline baseline: least-squares policy iteration on windowed data, each
//! iteration evaluating and improving the policy in one solve.
//!
//!     cargo run --release --example batch_pi

use siql::baselines::{batch_ls_pi, BatchPIConfig};
use siql::basis::{case1_actor_basis, quadratic_basis};
use siql::cost::CostSpec;
use siql::dynamics::make_benchmark;
use siql::exploration::{make_sinusoid_sum, ExplorationSignal};
use siql::learner::WeightState;
use siql::Error;

fn main() -> siql::Result<()> {
    let sys = make_benchmark();
    let cost = CostSpec::benchmark();
    let phi_c = quadratic_basis(2)?;
    let phi_a = case1_actor_basis();
    // An admissible but suboptimal starting actor.
    let w0 = WeightState::from_slices(&[1.0, 1.0, 1.0], &[0.0, 0.0, -0.9, -1.8]);
    let mut cfg = BatchPIConfig::new(0.025, 1e-3, 8, vec![0.5, -0.5]);
    cfg.window_count = Some(400);

    let expl = make_sinusoid_sum(100, [-50.0, 50.0], 1, f64::INFINITY, 1.0)?;
    for rec in batch_ls_pi(&sys, &cost, &phi_c, &phi_a, &expl, &cfg, &w0)? {
        println!(
            "iter {}: w_c = {:.5?} w_a = {:.5?} cond = {:.1e} residual = {:.1e}",
            rec.iteration, rec.w_c, rec.w_a, rec.condition, rec.residual
        );
    }

    // Without probing the actor block of the regressor is identically zero.
    match batch_ls_pi(&sys, &cost, &phi_c, &phi_a, &ExplorationSignal::none(1), &cfg, &w0) {
        Err(Error::Excitation { condition }) => println!("no exploration: rejected, condition {condition:e}"),
        other => println!("no exploration: unexpected {other:?}"),
    }
    Ok(())
}
