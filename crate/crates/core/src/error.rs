use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid input, config value or dimension mismatch.
    #[error("configuration error{}: {message}", location(.field, .line))]
    Config {
        field: Option<String>,
        line: Option<usize>,
        message: String,
    },

    /// A derivative evaluation or cost returned a non-finite value.
    #[error("numerical failure at t = {t}: {message} (state = {state:?})")]
    Numerical {
        t: f64,
        state: Vec<f64>,
        message: String,
    },

    /// The closed loop or the weights left the finite (or capped) region.
    #[error("divergence at t = {t}: {message}")]
    Divergence {
        t: f64,
        message: String,
        /// Last record that was still finite, flattened as `[t, x.., w..]`.
        last_valid: Vec<f64>,
    },

    #[error("linear solver failed: {0}")]
    Solver(String),

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    Convergence { iterations: usize, residual: f64 },

    #[error("insufficient excitation: regressor condition number {condition:e}")]
    Excitation { condition: f64 },

    #[error("I/O error on {}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn location(field: &Option<String>, line: &Option<usize>) -> String {
    match (field, line) {
        (Some(f), Some(l)) => format!(" in `{f}` (line {l})"),
        (Some(f), None) => format!(" in `{f}`"),
        (None, Some(l)) => format!(" (line {l})"),
        (None, None) => String::new(),
    }
}

impl Error {
    pub fn config(message: impl Into<String>) -> Self {
        Error::Config {
            field: None,
            line: None,
            message: message.into(),
        }
    }

    pub fn config_field(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: Some(field.into()),
            line: None,
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the command line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } => 1,
            Error::Divergence { .. } | Error::Numerical { .. } => 2,
            Error::Io { .. } => 3,
            // Solver-side failures come from bad inputs (non-stabilizing gain,
            // missing excitation) and are reported as configuration problems.
            Error::Solver(_) | Error::Convergence { .. } | Error::Excitation { .. } => 1,
        }
    }
}
