//! Command line front end. Exit codes: 0 ok, 1 configuration, 2 divergence, 3 I/O.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nalgebra::DMatrix;

use siql::baselines::{loewner_monotonicity, lyapunov_residual};
use siql::harness::{self, RunOptions, RunSummary};
use siql::{Error, Result};

#[derive(Parser)]
#[command(name = "siql", version, about = "Synchronous integral Q-learning experiments")]
struct Cli {
    /// Write outputs here instead of the config's `outputs.dir`.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Replace `exploration.seed`.
    #[arg(long, global = true)]
    seed_override: Option<u64>,
    /// Print only errors.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one experiment.
    Run { cfg: PathBuf },
    /// Run every *.cfg in a directory, one worker per config.
    Sweep { cfg_dir: PathBuf },
    /// Recompute grid errors from a summary.json.
    EvalGrid { summary: PathBuf },
    /// Kleinman iteration for a linear-system config.
    LqrOracle { cfg: PathBuf },
    /// Persistence-of-excitation report from a CSV log.
    PeCheck {
        log: PathBuf,
        #[arg(long, default_value_t = 1e-8)]
        threshold: f64,
    },
}

fn fmt_matrix(m: &DMatrix<f64>) -> String {
    (0..m.nrows())
        .map(|i| {
            let row: Vec<String> = m.row(i).iter().map(|v| format!("{v:>14.10}")).collect();
            format!("  [{}]", row.join(", "))
        })
        .collect::<Vec<_>>()
        .join("\n")
}

fn print_summary(s: &RunSummary) {
    let ep = &s.episode;
    println!("{}: {:?} after {} steps ({:.2} s wall)", s.name, s.status, ep.steps, ep.wall_time_s);
    println!("  w_c = {:?}", ep.final_w_c);
    println!("  w_a = {:?}", ep.final_w_a);
    println!(
        "  max |x| = {:.4}, max |W| = {:.4}, within caps: {}",
        ep.max_state_norm, ep.max_weight_norm, s.caps.within_caps
    );
    if let Some(g) = &s.grid {
        println!("  grid max |V-V*| = {:.3e}, max |u-u*| = {:.3e}", g.max_value_error, g.max_policy_error);
    }
    match s.pe.min_beta1_exploring {
        Some(b) => println!(
            "  PE: {} windows of {} s, min beta1 while exploring {:.3e}, {} below {:e}",
            s.pe.windows, s.pe.window_length, b, s.pe.windows_below_threshold, s.pe.threshold
        ),
        None => println!("  PE: {} windows, none while exploring", s.pe.windows),
    }
    if let Some(l) = &s.lqr {
        if let Some(e) = l.max_abs_p_error {
            println!("  learned P vs Riccati P: max abs error {e:.3e}");
        }
    }
}

fn run(cli: &Cli) -> Result<()> {
    let opts = RunOptions {
        out_dir: cli.out_dir.clone(),
        seed_override: cli.seed_override,
        dry_run: false,
    };
    match &cli.cmd {
        Cmd::Run { cfg } => {
            let cfg = harness::load_config(cfg)?;
            let out = harness::run_experiment(&cfg, &opts)?;
            if !cli.quiet {
                print_summary(&out.summary);
                println!("  wrote {}", out.out_dir.display());
            }
            Ok(())
        }
        Cmd::Sweep { cfg_dir } => {
            let results = harness::sweep(cfg_dir, &opts)?;
            let mut worst: Option<Error> = None;
            for (path, res) in results {
                match res {
                    Ok(s) => {
                        if !cli.quiet {
                            print_summary(&s);
                        }
                    }
                    Err(e) => {
                        eprintln!("{}: {e}", path.display());
                        if worst.as_ref().is_none_or(|w| e.exit_code() > w.exit_code()) {
                            worst = Some(e);
                        }
                    }
                }
            }
            worst.map_or(Ok(()), Err)
        }
        Cmd::EvalGrid { summary } => {
            let s = harness::read_summary(summary)?;
            let report = harness::eval_summary(&s)?;
            let dir = cli
                .out_dir
                .clone()
                .unwrap_or_else(|| summary.parent().map(PathBuf::from).unwrap_or_default());
            std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
            let table = dir.join(&s.config.outputs.grid_table);
            harness::output::write_grid_table(&report, &table)?;
            if !cli.quiet {
                println!(
                    "{}: {}x{} grid, max |V-V*| = {:.3e} (mean {:.3e}), max |u-u*| = {:.3e} (mean {:.3e})",
                    s.name,
                    report.grid.resolution,
                    report.grid.resolution,
                    report.max_value_error,
                    report.mean_value_error,
                    report.max_policy_error,
                    report.mean_policy_error
                );
                println!("  wrote {}", table.display());
            }
            Ok(())
        }
        Cmd::LqrOracle { cfg } => {
            let cfg = harness::load_config(cfg)?;
            let parts = cfg.build()?;
            let sol = parts
                .lqr
                .ok_or_else(|| Error::config_field("system.name", "lqr-oracle needs a linear system"))?;
            let (a, b) = parts.model.linear_matrices().expect("linear system");
            let a_cl = a - b * &sol.k;
            let s = match &parts.cost.state_cost {
                siql::cost::StateCost::Quadratic(q) => q.clone(),
                siql::cost::StateCost::Custom { .. } => unreachable!("configs build quadratic costs"),
            };
            let q_total = &s + sol.k.transpose() * &parts.cost.r * &sol.k;
            if !cli.quiet {
                println!("P =\n{}", fmt_matrix(&sol.p));
                println!("K =\n{}", fmt_matrix(&sol.k));
                println!("Kleinman iterations: {}", sol.iterations);
                println!("Riccati residual:    {:.3e}", sol.residual);
                println!("Lyapunov residual:   {:.3e}", lyapunov_residual(&a_cl, &sol.p, &q_total));
                println!("Loewner monotonicity (min eig of P_i - P_i+1): {:.3e}", loewner_monotonicity(&sol.history)?);
                println!(
                    "critic weights for the quadratic basis: {:?}",
                    siql::basis::matrix_to_quadratic_weights(&sol.p).as_slice()
                );
            }
            Ok(())
        }
        Cmd::PeCheck { log, threshold } => {
            let rep = harness::pe_check_file(log, *threshold)?;
            if !cli.quiet {
                println!("{} PE windows, {} while exploring", rep.windows.len(), rep.exploring_windows);
                if let (Some(min), Some(med)) = (rep.min_beta1_exploring, rep.median_beta1_exploring) {
                    println!("  exploring beta1: min {min:.3e}, median {med:.3e}");
                }
                if let Some(end) = rep.exploration_end {
                    println!("  exploration ends at t = {end}");
                }
                match rep.loss_detected_at {
                    Some(t) => println!("  loss of excitation detected at t = {t}"),
                    None => println!("  no loss of excitation detected"),
                }
                if rep.passed() {
                    println!("  all exploring windows above {threshold:e}");
                } else {
                    println!(
                        "  FLAG: {} exploring windows below {threshold:e}, first at t = {}",
                        rep.below_threshold.len(),
                        rep.below_threshold[0]
                    );
                }
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    // clap's own usage exit code (2) would collide with divergence.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
