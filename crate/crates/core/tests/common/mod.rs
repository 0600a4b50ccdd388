// Shared helpers for the integration tests; not a test target of its own.
#![allow(dead_code)]

use std::path::{Path, PathBuf};

pub fn config_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

/// Bundled config text with some `key = value` lines replaced.
pub fn config_text(name: &str, replace: &[(&str, &str)]) -> String {
    let text = std::fs::read_to_string(config_path(name)).unwrap();
    let mut out = String::new();
    for line in text.lines() {
        let key = line.split('=').next().unwrap().trim();
        match replace.iter().find(|(k, _)| *k == key) {
            Some((k, v)) => out.push_str(&format!("{k} = {v}")),
            None => out.push_str(line),
        }
        out.push('\n');
    }
    out
}

/// A short Case 1 run, cheap enough for unoptimized builds.
pub fn short_case1() -> String {
    config_text("case1.cfg", &[("t_final", "3.0"), ("active_until", "2.5"), ("log_stride", "10"), ("pe_window", "0.5")])
}

/// Open-loop unstable plant with a zero actor and no learning, so the state
/// leaves the cap a few seconds in.
pub const DIVERGING: &str = r#"
version = 1
name = "unstable"

[system]
name = "linear"
a = [[0.5, 1.0], [0.0, 0.5]]
b = [[0.0], [1.0]]

[cost]
q = [[1.0, 0.0], [0.0, 1.0]]
r = [[1.0]]

[bases]
critic = "quadratic"
actor = "linear"

[learner]
alpha = 0.0
T = 0.025
h = 0.001
t_final = 60.0
x0 = [1.0, 0.0]
w_c0 = [1.0, 0.0, 1.0]
w_a0 = [0.0, 0.0]

[exploration]
enabled = false

[kleinman]
k0 = [[5.0, 5.0]]
"#;

pub fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}
