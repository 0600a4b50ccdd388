//! Runs Case 1 for several exploration seeds on parallel workers and
//! tabulates how far each ends from the optimum.
//!
//!     cargo run --release --example sweep_seeds [first] [count]

use siql::harness::{load_config, run_experiment, RunOptions};

fn main() -> siql::Result<()> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<u64>().expect("integer argument"));
    let first = args.next().unwrap_or(1);
    let count = args.next().unwrap_or(4);
    let cfg = load_config(concat!(env!("CARGO_MANIFEST_DIR"), "/configs/case1.cfg"))?;

    let results: Vec<_> = std::thread::scope(|scope| {
        let handles: Vec<_> = (first..first + count)
            .map(|seed| {
                let cfg = &cfg;
                scope.spawn(move || {
                    let opts = RunOptions {
                        seed_override: Some(seed),
                        dry_run: true,
                        ..Default::default()
                    };
                    (seed, run_experiment(cfg, &opts))
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    });

    println!("seed  max|V-V*|   max|u-u*|   min beta1");
    for (seed, res) in results {
        match res {
            Ok(out) => {
                let g = out.grid.expect("benchmark has oracles");
                println!(
                    "{seed:>4}  {:.3e}   {:.3e}   {:.3e}",
                    g.max_value_error,
                    g.max_policy_error,
                    out.summary.pe.min_beta1_exploring.unwrap_or(f64::NAN)
                );
            }
            Err(e) => println!("{seed:>4}  {e}"),
        }
    }
    Ok(())
}
