//! Asymptotic theory of the Durbin-Watson statistic for stable AR(p)
//! processes driven by AR(1) noise.
//!
//! The model is
//!
//! ```text
//! X_n = θ_1 X_{n-1} + ... + θ_p X_{n-p} + ε_n
//! ε_n = ρ ε_{n-1} + V_n
//! ```
//!
//! with `‖θ‖_1 < 1`, `|ρ| < 1` and `(V_n)` i.i.d. with zero mean and
//! variance `σ²`. The crate provides:
//!
//! * [`limits`]: closed-form limits of the least-squares estimators and the
//!   Durbin-Watson statistic, together with their asymptotic covariances,
//!   and a Lyapunov fixed-point oracle for the autocovariances.
//! * [`simulate`]: seeded trajectory generation.
//! * [`estimate`]: least-squares and Yule-Walker fitting of an observed series.
//! * [`hypothesis`]: the chi-square Durbin-Watson test and four competitors.
//! * [`montecarlo`]: size/power studies and CLT / rate diagnostics, run in
//!   parallel with rayon when the `parallel` feature is enabled.

// `!(x > 0.0)` is used on purpose so that NaN takes the error branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dist;
pub mod error;
pub mod estimate;
pub mod hypothesis;
pub mod io;
pub mod limits;
pub mod linalg;
pub mod montecarlo;
pub mod params;
pub mod rng;
pub mod simulate;

pub use error::{Error, Result};
pub use estimate::{fit, FitOptions, FitResult};
pub use hypothesis::{TestName, TestOutcome};
pub use limits::{limit_summary, LimitSummary};
pub use params::ModelParams;
pub use simulate::{simulate, NoiseFamily, NoiseSpec, Trajectory};
