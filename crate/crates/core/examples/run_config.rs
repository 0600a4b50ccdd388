//! Runs any experiment config and writes its CSV log, JSON summary and grid
//! table, like `siql run`.
//!
//!     cargo run --release --example run_config -- configs/case2.cfg [out-dir]

use std::path::PathBuf;

use siql::harness::{load_config, run_experiment, RunOptions};

fn main() {
    let mut args = std::env::args().skip(1);
    let path = args.next().unwrap_or_else(|| "crates/core/configs/case1.cfg".into());
    let opts = RunOptions {
        out_dir: args.next().map(PathBuf::from),
        ..Default::default()
    };
    let result = load_config(&path).and_then(|cfg| run_experiment(&cfg, &opts));
    match result {
        Ok(out) => {
            let s = &out.summary;
            println!("{} finished in {:.1} s", s.name, s.episode.wall_time_s);
            println!("final w_c {:?}", s.episode.final_w_c);
            println!("final w_a {:?}", s.episode.final_w_a);
            if let Some(g) = &s.grid {
                println!("grid errors: value {:.2e}, policy {:.2e}", g.max_value_error, g.max_policy_error);
            }
            println!("outputs in {}", out.out_dir.display());
        }
        Err(e) => {
            eprintln!("{path}: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
