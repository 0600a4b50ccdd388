mod common;

use nalgebra::DVector;
use siql::baselines::{batch_ls_pi, kleinman_iteration, BatchPIConfig};
use siql::basis::quadratic_weights_to_matrix;
use siql::cost::running_cost;
use siql::exploration::ExplorationSignal;
use siql::harness::output::{read_csv, write_csv};
use siql::harness::config::initial_weights;
use siql::harness::{eval_error_grid, run_experiment, ExperimentConfig, GridSpec, RunOptions};
use siql::learner::{collect_windows, policy_estimate, WeightState};

use common::{config_text, short_case1};

fn dry() -> RunOptions {
    RunOptions {
        dry_run: true,
        ..Default::default()
    }
}

#[test]
fn csv_round_trip_is_exact() {
    let cfg = ExperimentConfig::from_toml_str(&short_case1()).unwrap();
    let out = run_experiment(&cfg, &dry()).unwrap();
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("log.csv");
    write_csv(&out.log, &path).unwrap();
    let table = read_csv(&path).unwrap();

    assert_eq!(table.rows.len(), out.log.records.len());
    let (e_col, ms_col, b_col) = (table.column("E").unwrap(), table.column("m_s").unwrap(), table.column("beta1").unwrap());
    for (row, rec) in table.rows.iter().zip(&out.log.records) {
        let values: Vec<f64> = std::iter::once(rec.t)
            .chain(rec.x.iter().chain(rec.u.iter()).chain(rec.e.iter()).chain(rec.w.iter()).copied())
            .collect();
        let read: Vec<f64> = row[..values.len()].iter().map(|v| v.unwrap()).collect();
        assert_eq!(read, values);
        assert_eq!(row[e_col], rec.bellman);
        assert_eq!(row[ms_col], rec.m_s);
        assert_eq!(row[b_col], rec.beta1);
    }
    // Nothing to regress on before the first full window.
    assert_eq!(table.rows[0][e_col], None);
}

#[test]
fn empty_log_writes_header_only() {
    let cfg = ExperimentConfig::from_toml_str(&short_case1()).unwrap();
    let mut log = run_experiment(&cfg, &dry()).unwrap().log;
    log.records.clear();
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("empty.csv");
    write_csv(&log, &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 1);
    assert!(text.starts_with("t,x1,x2,u1,e1,wc["));
    assert!(text.trim_end().ends_with("E,m_s,beta1"));
}

#[test]
fn identical_configs_give_identical_runs() {
    let cfg = ExperimentConfig::from_toml_str(&short_case1()).unwrap();
    let a = run_experiment(&cfg, &dry()).unwrap();
    let b = run_experiment(&cfg, &dry()).unwrap();
    let mut sa = a.summary.clone();
    let mut sb = b.summary.clone();
    sa.episode.wall_time_s = 0.0;
    sb.episode.wall_time_s = 0.0;
    assert_eq!(serde_json::to_string(&sa).unwrap(), serde_json::to_string(&sb).unwrap());
    assert!(a.log.records.iter().zip(&b.log.records).all(|(x, y)| x.w == y.w && x.x == y.x));
}

#[test]
fn config_echo_reruns_identically() {
    let cfg = ExperimentConfig::from_toml_str(&short_case1()).unwrap();
    let first = run_experiment(&cfg, &dry()).unwrap().summary;
    let echoed: serde_json::Value = serde_json::to_value(&first).unwrap();
    let cfg2: ExperimentConfig = serde_json::from_value(echoed["config"].clone()).unwrap();
    assert_eq!(cfg2, cfg);
    let second = run_experiment(&cfg2, &dry()).unwrap().summary;
    assert_eq!(first.episode.final_w_c, second.episode.final_w_c);
    assert_eq!(first.episode.final_w_a, second.episode.final_w_a);

    let reparsed = ExperimentConfig::from_toml_str(&cfg.to_toml_string().unwrap()).unwrap();
    assert_eq!(reparsed, cfg);
}

#[test]
fn zero_learning_rate_keeps_initial_weights() {
    let text = short_case1().replace("alpha = 1000.0", "alpha = 0.0");
    let cfg = ExperimentConfig::from_toml_str(&text).unwrap();
    let out = run_experiment(&cfg, &dry()).unwrap();
    assert_eq!(out.summary.episode.final_w_c, cfg.learner.w_c0);
    assert_eq!(out.summary.episode.final_w_a, cfg.learner.w_a0);

    let parts = cfg.build().unwrap();
    let w0 = initial_weights(&cfg);
    let w0 = WeightState::from_stacked(w0, 3, 4, 1).unwrap();
    let g0 = eval_error_grid(&w0, &parts.phi_c, &parts.phi_a, &parts.model, &GridSpec::cube(2, 1.0, 41)).unwrap();
    let g = out.grid.unwrap();
    assert_eq!(g.max_value_error, g0.max_value_error);
    assert_eq!(g.max_policy_error, g0.max_policy_error);
}

#[test]
fn integral_reinforcement_matches_trapezoid() {
    // Without probing, rho over each window is the integral of r(x, mu(x))
    // along the closed loop; check it against the trapezoid rule on a fine
    // independent RK4 run.
    let cfg = ExperimentConfig::from_toml_str(&short_case1()).unwrap();
    let parts = cfg.build().unwrap();
    let w = WeightState::from_slices(&cfg.learner.w_c0, &cfg.learner.w_a0);
    let x0 = DVector::from_vec(vec![1.0, -1.0]);
    let none = ExplorationSignal::none(1);
    let (window, h, count) = (0.025, 1e-3, 40);
    let batch = collect_windows(&parts.model, &parts.cost, &parts.phi_c, &parts.phi_a, &none, &w, &x0, 0.0, window, h, count).unwrap();

    let fine = h / 10.0;
    let reward = |x: &DVector<f64>| {
        let mu = policy_estimate(&w, &parts.phi_a, x).unwrap();
        running_cost(&parts.cost, x, &mu).unwrap()
    };
    let rhs = |x: &DVector<f64>| {
        let mu = policy_estimate(&w, &parts.phi_a, x).unwrap();
        parts.model.velocity(x, &mu)
    };
    let mut x = x0.clone();
    let steps = (window / fine).round() as usize;
    let mut worst: f64 = 0.0;
    for s in &batch.samples {
        let mut integral = 0.0;
        let mut r_prev = reward(&x);
        for _ in 0..steps {
            let k1 = rhs(&x);
            let k2 = rhs(&(&x + &k1 * (fine / 2.0)));
            let k3 = rhs(&(&x + &k2 * (fine / 2.0)));
            let k4 = rhs(&(&x + &k3 * fine));
            x += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (fine / 6.0);
            let r = reward(&x);
            integral += 0.5 * fine * (r_prev + r);
            r_prev = r;
        }
        worst = worst.max((integral - s.rho).abs());
        assert_eq!(s.delta_a.norm(), 0.0);
    }
    assert!(worst <= 1e-5, "worst quadrature gap {worst:e}");
    assert!((&x - &batch.x_end).norm() < 1e-9);
}

#[test]
fn batch_pi_agrees_with_kleinman_on_linear_plant() {
    let cfg = ExperimentConfig::from_toml_str(&config_text("lqr_demo.cfg", &[])).unwrap();
    let parts = cfg.build().unwrap();
    let (a, b) = parts.model.linear_matrices().unwrap();
    let s = nalgebra::DMatrix::identity(2, 2);
    let sol = kleinman_iteration(a, b, &s, &parts.cost.r, &nalgebra::DMatrix::zeros(1, 2), 1e-12, 100).unwrap();

    let mut pi = BatchPIConfig::new(0.025, 1e-3, 6, vec![0.5, -0.5]);
    pi.window_count = Some(200);
    let w0 = WeightState::from_slices(&[1.0, 1.0, 1.0], &[0.0, 0.0]);
    let records = batch_ls_pi(&parts.model, &parts.cost, &parts.phi_c, &parts.phi_a, &parts.expl, &pi, &w0).unwrap();
    let last = records.last().unwrap();
    let p = quadratic_weights_to_matrix(&DVector::from_column_slice(&last.w_c), 2).unwrap();
    let err = (&p - &sol.p).abs().max();
    assert!(err <= 1e-3, "batch PI P error {err:e}");
    assert!(records.iter().all(|r| !r.state_flagged));
}
