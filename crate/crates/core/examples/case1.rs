//! Case 1 built directly from the library: exact actor features, so the
//! weights should land on the closed-form optimum.
//!
//!     cargo run --release --example case1 [seed]

use nalgebra::DVector;
use siql::basis::{case1_actor_basis, quadratic_basis};
use siql::cost::CostSpec;
use siql::dynamics::make_benchmark;
use siql::exploration::make_sinusoid_sum;
use siql::harness::{eval_error_grid, GridSpec};
use siql::learner::{run_episode, LearnerConfig};

fn main() -> siql::Result<()> {
    let seed = std::env::args().nth(1).map_or(9, |s| s.parse().expect("seed must be an integer"));

    let sys = make_benchmark();
    let cost = CostSpec::benchmark();
    let phi_c = quadratic_basis(2)?;
    let phi_a = case1_actor_basis();
    let expl = make_sinusoid_sum(100, [-50.0, 50.0], seed, 90.0, 1.0)?;

    let mut cfg = LearnerConfig::new(1000.0, 0.025, 1e-3, 100.0);
    cfg.x0 = vec![0.0, 0.0];
    cfg.w_c0 = vec![1.0, 1.0, 1.0];
    cfg.w_a0 = vec![0.5, -0.5, -0.5, -0.5];
    cfg.pe_window = 2.0;
    cfg.log_stride = 1000;

    let log = run_episode(&sys, &cost, &phi_c, &phi_a, &expl, &cfg)?;
    for r in log.records.iter().filter(|r| r.t.fract() == 0.0 && (r.t as u64).is_multiple_of(10)) {
        println!("t = {:5.1}  x = [{:+.4}, {:+.4}]  W = {:.4?}", r.t, r.x[0], r.x[1], r.w.as_slice());
    }

    let w = log.final_weights();
    println!("w_c = {:.6?}  (optimum [0.5, 0, 1])", w.critic().as_slice());
    println!("w_a = {:.6?}  (optimum [0, 0, -1, -2])", w.actor().as_slice());
    let grid = eval_error_grid(&w, &phi_c, &phi_a, &sys, &GridSpec::cube(2, 1.0, 41))?;
    println!("max |V - V*| = {:.2e}, max |u - u*| = {:.2e}", grid.max_value_error, grid.max_policy_error);

    let x = DVector::from_vec(vec![0.5, -0.5]);
    println!("V*(0.5,-0.5) = {:.6}", sys.oracle_value(&x).expect("benchmark oracle"));
    println!("summary wall time {:.2} s", log.summary.wall_time_s);
    Ok(())
}
