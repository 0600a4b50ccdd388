//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails. Runs the bundled configs in `configs/`.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};

use siql::baselines::{kleinman_iteration, loewner_monotonicity};
use siql::basis::{case1_actor_basis, quadratic_basis, quadratic_weights_to_matrix};
use siql::cost::CostSpec;
use siql::dynamics::{make_benchmark, rk4_step};
use siql::exploration::make_sinusoid_sum;
use siql::harness::{load_config, run_experiment, ExperimentOutcome, RunOptions};
use siql::learner::{bellman_residual, run_episode, weight_derivative, LearnerConfig, RegressorSample, WeightState};

const W_C_STAR: [f64; 3] = [0.5, 0.0, 1.0];
const W_A_STAR: [f64; 4] = [0.0, 0.0, -1.0, -2.0];

#[derive(Default)]
struct Report {
    lines: Vec<(u32, bool, String)>,
}

impl Report {
    fn line(&mut self, id: u32, name: &str, ok: bool, detail: String) {
        self.lines.push((id, ok, format!("criterion {id} [{}] {name}: {detail}", if ok { "PASS" } else { "FAIL" })));
    }

    fn finish(mut self) -> usize {
        self.lines.sort_by_key(|l| l.0);
        for (_, _, l) in &self.lines {
            println!("{l}");
        }
        self.lines.iter().filter(|l| !l.1).count()
    }
}

fn config_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn run_bundled(name: &str) -> Result<(ExperimentOutcome, f64), siql::Error> {
    let cfg = load_config(config_path(name))?;
    let opts = RunOptions {
        dry_run: true,
        ..Default::default()
    };
    let started = Instant::now();
    let out = run_experiment(&cfg, &opts)?;
    Ok((out, started.elapsed().as_secs_f64()))
}

fn inf_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Least-squares slope of `ys` against `xs`.
fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

fn case1_checks(rep: &mut Report) -> Option<ExperimentOutcome> {
    let (out, secs) = match run_bundled("case1.cfg") {
        Ok(v) => v,
        Err(e) => {
            rep.line(1, "Case 1 reproduction", false, format!("run failed: {e}"));
            rep.line(2, "Case 1 grid errors", false, "no run".into());
            rep.line(8, "PE diagnostics", false, "no run".into());
            return None;
        }
    };
    let cfg = &out.summary.config;
    let settings_ok = cfg.learner.alpha == 1000.0
        && cfg.learner.window == 0.025
        && cfg.learner.h == 1e-3
        && cfg.learner.t_final == 100.0
        && cfg.exploration.count == 100
        && cfg.exploration.freq_range == [-50.0, 50.0]
        && cfg.exploration.active_until == Some(90.0)
        && cfg.learner.x0 == [0.0, 0.0]
        && cfg.learner.w_c0 == [1.0, 1.0, 1.0]
        && cfg.learner.w_a0 == [0.5, -0.5, -0.5, -0.5];
    let ep = &out.summary.episode;
    let dc = inf_dist(&ep.final_w_c, &W_C_STAR);
    let da = inf_dist(&ep.final_w_a, &W_A_STAR);
    rep.line(
        1,
        "Case 1 reproduction",
        settings_ok && dc <= 5e-3 && da <= 5e-3 && secs < 30.0,
        format!(
            "|w_c - w_c*|inf = {dc:.2e}, |w_a - w_a*|inf = {da:.2e} (tol 5e-3), settings as specified: {settings_ok}, wall {secs:.1} s (limit 30 s)"
        ),
    );

    let grid = out.grid.as_ref().expect("benchmark has oracles");
    rep.line(
        2,
        "Case 1 grid errors",
        grid.grid.resolution == 41
            && grid.grid.lo == [-1.0, -1.0]
            && grid.grid.hi == [1.0, 1.0]
            && grid.max_value_error <= 1e-3
            && grid.max_policy_error <= 1e-3,
        format!(
            "41x41 on [-1,1]^2: max |V-V*| = {:.2e}, max |u-u*| = {:.2e} (tol 1e-3)",
            grid.max_value_error, grid.max_policy_error
        ),
    );

    // PE: every window inside the exploration phase above 1e-8, then a drop
    // below a tenth of the exploring median within 5 s of switch-off.
    let active_until = 90.0;
    let pe = &out.log.pe_reports;
    let exploring: Vec<f64> = pe.iter().filter(|r| r.window_end <= active_until).map(|r| r.beta1).collect();
    let min = exploring.iter().copied().fold(f64::INFINITY, f64::min);
    let mut sorted = exploring.clone();
    sorted.sort_by(f64::total_cmp);
    let median = if sorted.is_empty() { f64::NAN } else { sorted[sorted.len() / 2] };
    let drop = pe
        .iter()
        .find(|r| r.window_end > active_until && r.window_end <= active_until + 5.0 && r.beta1 < median / 10.0);
    rep.line(
        8,
        "PE diagnostics",
        !exploring.is_empty() && min > 1e-8 && drop.is_some(),
        format!(
            "{} exploring windows of {} s, min beta1 = {min:.2e} (> 1e-8), median {median:.2e}; post-exploration drop at t = {}",
            exploring.len(),
            out.summary.pe.window_length,
            drop.map_or("none".to_string(), |r| format!("{:.3} (beta1 {:.2e})", r.window_end, r.beta1))
        ),
    );
    Some(out)
}

fn case2_checks(rep: &mut Report) -> Option<ExperimentOutcome> {
    match run_bundled("case2.cfg") {
        Ok((out, secs)) => {
            let ep = &out.summary.episode;
            let dc = inf_dist(&ep.final_w_c, &W_C_STAR);
            let g = out.grid.as_ref().expect("benchmark has oracles");
            rep.line(
                3,
                "Case 2 reproduction",
                dc <= 2e-2 && g.max_value_error <= 2e-2 && g.max_policy_error <= 2e-2,
                format!(
                    "|w_c - w_c*|inf = {dc:.2e}, max |V-V*| = {:.2e}, max |u-u*| = {:.2e} (tol 2e-2), t_f = {} s, wall {secs:.1} s",
                    g.max_value_error, g.max_policy_error, ep.t_final
                ),
            );
            Some(out)
        }
        Err(e) => {
            rep.line(3, "Case 2 reproduction", false, format!("run failed: {e}"));
            None
        }
    }
}

fn lqr_check(rep: &mut Report) {
    let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, -2.0]);
    let b = DMatrix::from_row_slice(2, 1, &[0.0, 1.0]);
    let s = DMatrix::identity(2, 2);
    let r = DMatrix::identity(1, 1);
    let oracle = match kleinman_iteration(&a, &b, &s, &r, &DMatrix::zeros(1, 2), 1e-12, 100) {
        Ok(o) => o,
        Err(e) => {
            rep.line(4, "LQR cross-check", false, format!("Kleinman failed: {e}"));
            return;
        }
    };
    let mono = loewner_monotonicity(&oracle.history).unwrap_or(f64::NEG_INFINITY);
    let learned = run_bundled("lqr_demo.cfg").and_then(|(out, _)| {
        let cfg = &out.summary.config;
        let same_plant = cfg.system.a == Some(vec![vec![0.0, 1.0], vec![-1.0, -2.0]])
            && cfg.system.b == Some(vec![vec![0.0], vec![1.0]])
            && cfg.bases.critic == "quadratic";
        let p = quadratic_weights_to_matrix(&DVector::from_column_slice(&out.summary.episode.final_w_c), 2)?;
        Ok((p, same_plant))
    });
    match learned {
        Ok((p, same_plant)) => {
            let err = (&p - &oracle.p).abs().max();
            rep.line(
                4,
                "LQR cross-check",
                same_plant && err <= 1e-3 && oracle.residual <= 1e-8 && mono >= -1e-10,
                format!(
                    "max |P_learned - P_kleinman| = {err:.2e} (tol 1e-3), Riccati residual {:.2e} (tol 1e-8), min eig(P_i - P_i+1) = {mono:.2e} (>= -1e-10), {} iterations",
                    oracle.residual, oracle.iterations
                ),
            );
        }
        Err(e) => rep.line(4, "LQR cross-check", false, format!("learner run failed: {e}")),
    }
}

fn exact_weights_check(rep: &mut Report) {
    let sys = make_benchmark();
    let expl = make_sinusoid_sum(100, [-50.0, 50.0], 9, 20.0, 1.0).expect("valid signal");
    let mut cfg = LearnerConfig::new(0.0, 0.025, 1e-3, 20.0);
    cfg.x0 = vec![0.0, 0.0];
    cfg.w_c0 = W_C_STAR.to_vec();
    cfg.w_a0 = W_A_STAR.to_vec();
    match run_episode(&sys, &CostSpec::benchmark(), &quadratic_basis(2).expect("basis"), &case1_actor_basis(), &expl, &cfg) {
        Ok(log) => {
            let windows = log.records.iter().filter(|r| r.bellman.is_some()).count();
            let max_e = log.summary.max_abs_bellman;
            rep.line(
                5,
                "Exact-weights residual",
                windows > 0 && max_e <= 1e-5,
                format!("max |E| = {max_e:.2e} over {windows} windows of a 20 s exploratory run (tol 1e-5)"),
            );
        }
        Err(e) => rep.line(5, "Exact-weights residual", false, format!("run failed: {e}")),
    }
}

fn gradient_check(rep: &mut Report) {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
    let step = 1e-6;
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let dim_c = 3;
        let dim = 7;
        let d: Vec<f64> = (0..dim).map(|_| rng.random_range(-2.0..2.0)).collect();
        let ws: Vec<f64> = (0..dim).map(|_| rng.random_range(-2.0..2.0)).collect();
        let rho = rng.random_range(-3.0..3.0);
        let alpha = rng.random_range(0.1..1000.0);
        let s = RegressorSample::new(0.0, DVector::from_column_slice(&d[..dim_c]), DVector::from_column_slice(&d[dim_c..]), rho);
        let w = WeightState::from_slices(&ws[..dim_c], &ws[dim_c..]);
        let analytic = weight_derivative(&w, &s, alpha);
        // −α/m_s² · ∂(½E²)/∂W by central differences
        let fd = DVector::from_fn(dim, |k, _| {
            let mut plus = w.clone();
            let mut minus = w.clone();
            plus.stacked_mut()[k] += step;
            minus.stacked_mut()[k] -= step;
            let k_plus = 0.5 * bellman_residual(&plus, &s).powi(2);
            let k_minus = 0.5 * bellman_residual(&minus, &s).powi(2);
            -alpha / (s.m_s * s.m_s) * (k_plus - k_minus) / (2.0 * step)
        });
        let rel = (&analytic - &fd).norm() / analytic.norm().max(fd.norm()).max(f64::MIN_POSITIVE);
        worst = worst.max(rel);
    }
    rep.line(
        6,
        "Gradient check",
        worst <= 1e-8,
        format!("worst relative error over 100 random triples = {worst:.2e} (tol 1e-8, FD step 1e-6)"),
    );
}

fn itd_check(rep: &mut Report) {
    // Plant under the closed-form policy, cost integral carried as a third state.
    let sys = make_benchmark();
    let cost = CostSpec::benchmark();
    let h = 1e-3;
    let window = 25;
    let steps = 5000;
    let rhs = |_: f64, z: &DVector<f64>| {
        let x = z.rows(0, 2).into_owned();
        let u = sys.oracle_policy(&x).expect("oracle");
        let dx = sys.velocity(&x, &u);
        let r = cost.state_cost.eval(&x) + u.dot(&(&cost.r * &u));
        DVector::from_vec(vec![dx[0], dx[1], r])
    };
    let mut z = DVector::from_vec(vec![1.0, -1.0, 0.0]);
    let mut hist = vec![z.clone()];
    for k in 0..steps {
        z = rk4_step(rhs, k as f64 * h, &z, h).expect("finite");
        hist.push(z.clone());
    }
    let v = |z: &DVector<f64>| sys.oracle_value(&z.rows(0, 2).into_owned()).expect("oracle");
    let worst = (window..=steps)
        .map(|k| {
            let (a, b) = (&hist[k - window], &hist[k]);
            (v(a) - (b[2] - a[2]) - v(b)).abs()
        })
        .fold(0.0, f64::max);
    rep.line(
        7,
        "I-TD identity",
        worst <= 1e-6,
        format!("max |V*(x(t-T)) - int r - V*(x(t))| = {worst:.2e} over {} windows in 5 s (tol 1e-6)", steps - window + 1),
    );
}

fn boundedness_check(rep: &mut Report, case1: Option<&ExperimentOutcome>, case2: Option<&ExperimentOutcome>) {
    let (Some(c1), Some(c2)) = (case1, case2) else {
        rep.line(9, "Boundedness", false, "Case 1 or Case 2 run missing or diverged".into());
        return;
    };
    let caps = |o: &ExperimentOutcome| o.summary.episode.max_state_norm <= 50.0 && o.summary.episode.max_weight_norm <= 100.0;
    let w_star = DVector::from_iterator(7, W_C_STAR.iter().chain(&W_A_STAR).copied());
    let (ts, ys): (Vec<f64>, Vec<f64>) = c1
        .log
        .records
        .iter()
        .filter(|r| (5.0..=60.0).contains(&r.t))
        .map(|r| (r.t, (&w_star - &r.w).norm().ln()))
        .unzip();
    let k = slope(&ts, &ys);
    rep.line(
        9,
        "Boundedness",
        caps(c1) && caps(c2) && k < 0.0,
        format!(
            "max |x| = {:.2} / {:.2}, max |W| = {:.2} / {:.2} (Case 1 / Case 2, caps 50 and 100); slope of log|W*-W| on [5,60] s = {k:.3e} (< 0)",
            c1.summary.episode.max_state_norm,
            c2.summary.episode.max_state_norm,
            c1.summary.episode.max_weight_norm,
            c2.summary.episode.max_weight_norm
        ),
    );
}

fn main() -> ExitCode {
    // `cargo test` passes harness flags; listing requests get an empty list.
    if std::env::args().any(|a| a == "--list") {
        return ExitCode::SUCCESS;
    }
    let mut rep = Report::default();
    let case1 = case1_checks(&mut rep);
    let case2 = case2_checks(&mut rep);
    lqr_check(&mut rep);
    exact_weights_check(&mut rep);
    gradient_check(&mut rep);
    itd_check(&mut rep);
    boundedness_check(&mut rep, case1.as_ref(), case2.as_ref());
    let failures = rep.finish();
    println!("acceptance: {failures} of 9 criteria failing");
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
