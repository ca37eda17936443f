//! Change-point detection in nonparametric production frontiers.
//!
//! Observations `(X_t, Y_t)` are inputs and outputs of an economy over time.
//! The frontier `f` bounding `Y <= f(X)` is estimated by the free disposal
//! hull, and detectors look for times where it shifts upward, either on the
//! whole input space ([`detect_multi`], [`detect_multi_robust`]) or on part of
//! it ([`detect_multi_local`]). [`change_interval`] attaches one-sided
//! confidence intervals to detected locations.
//!
//! Every estimator is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix `f64`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod eval;
pub mod fdh;
pub mod global;
pub mod grid;
pub mod inference;
pub mod io;
pub mod local;
pub mod model;
pub mod scalar;
pub mod scores;
pub mod sim;
pub mod stat;

pub use error::{FcpError, Result};
pub use eval::{
    hausdorff, run_benchmark, table_row, BenchmarkPlan, BenchmarkSummary, DetectorSpec, EvalRecord,
};
pub use fdh::{evaluate_quantile, Frontier, FrontierEstimate};
pub use global::{detect_multi, detect_multi_robust, detect_single, SingleChange};
pub use grid::{a_n_from_side, build_grid, GridCell, MultiScaleGrid};
pub use inference::{
    change_interval, confidence_interval, estimate_mu, estimate_theta_general, estimate_theta_iid,
    Bandwidths, CiMode, CiSettings, GeometricCI,
};
pub use local::{detect_multi_local, quasi_lr_scan_cell};
pub use model::{
    default_lambda, trim_quantile, DetectionResult, DetectorConfig, FrontierKind, Observation,
    Series, TrimBox,
};
pub use scalar::Scalar;
pub use scores::{compute_scores, segment_scores, ScoreSeries};
pub use sim::{
    generate, FrontierFamily, FrontierSpec, ScoreDist, SimConfig, TechnologyPath, Truth,
};
pub use stat::{lr_value, quasi_lr_scan, SegmentStat};

pub type Series64 = Series<f64>;
pub type Series32 = Series<f32>;
pub type FrontierEstimate64 = FrontierEstimate<f64>;
pub type ScoreSeries64 = ScoreSeries<f64>;
pub type DetectorConfig64 = DetectorConfig<f64>;
pub type DetectionResult64 = DetectionResult<f64>;
pub type GeometricCI64 = GeometricCI<f64>;
