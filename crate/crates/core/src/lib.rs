//! Synchronous integral Q-learning: a continuous-time actor-critic that
//! tunes critic and actor weights together from windowed integral Bellman
//! errors, with Kleinman/Riccati and batch policy-iteration references.
//!
//! The modules follow the data flow: [`dynamics`] (control-affine plants and
//! RK4), [`basis`] (feature maps), [`cost`], [`exploration`] (probing signals
//! and persistence-of-excitation monitoring), [`learner`] (the online update),
//! [`baselines`] (offline references) and [`harness`] (configs, logs, grid
//! evaluation).

// `!(a <= b)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod basis;
pub mod cost;
pub mod dynamics;
pub mod error;
pub mod exploration;
pub mod harness;
pub mod learner;
pub mod linalg;

pub use error::{Error, Result};
