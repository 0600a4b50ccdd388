//! Persistence-of-excitation monitoring: beta1 of the normalized-regressor
//! Gram for several PE block lengths, and the drop after probing stops.
//!
//!     cargo run --release --example pe_diagnostics [seed]

use siql::basis::{case1_actor_basis, quadratic_basis};
use siql::cost::CostSpec;
use siql::dynamics::make_benchmark;
use siql::exploration::make_sinusoid_sum;
use siql::learner::{run_episode, LearnerConfig};

fn main() -> siql::Result<()> {
    let seed = std::env::args().nth(1).map_or(9, |s| s.parse().expect("seed must be an integer"));
    let sys = make_benchmark();
    let expl = make_sinusoid_sum(100, [-50.0, 50.0], seed, 90.0, 1.0)?;

    for pe_window in [0.025, 0.5, 2.0] {
        let mut cfg = LearnerConfig::new(1000.0, 0.025, 1e-3, 100.0);
        cfg.x0 = vec![0.0, 0.0];
        cfg.w_c0 = vec![1.0, 1.0, 1.0];
        cfg.w_a0 = vec![0.5, -0.5, -0.5, -0.5];
        cfg.pe_window = pe_window;
        cfg.log_stride = 100_000;
        let log = run_episode(&sys, &CostSpec::benchmark(), &quadratic_basis(2)?, &case1_actor_basis(), &expl, &cfg)?;

        let mut during: Vec<f64> = log.pe_reports.iter().filter(|r| r.window_end <= 90.0).map(|r| r.beta1).collect();
        during.sort_by(f64::total_cmp);
        let after: Vec<f64> = log.pe_reports.iter().filter(|r| r.window_start >= 90.0).map(|r| r.beta1).collect();
        println!(
            "PE block {pe_window:>5} s: {} windows while probing, beta1 min {:.2e} median {:.2e}; {} below {:e}",
            during.len(),
            during[0],
            during[during.len() / 2],
            log.summary.pe_windows_below_threshold,
            cfg.pe_threshold
        );
        if let Some(first) = after.first() {
            println!("    first block after probing stops: beta1 {first:.2e}");
        }
    }
    Ok(())
}
