//! Online facility location with per-demand facility predictions.
//!
//! The crate provides:
//! - metric spaces (Euclidean and graph shortest-path) with a facility
//!   universe whose opening costs are normalized to powers of 2
//!   ([`metric`]);
//! - online instances, prediction streams and error measures with file
//!   ingestion ([`instance`]);
//! - the prediction-augmented online algorithm and its two baselines
//!   ([`algorithms`], built from [`meyerson`] and [`prediction`]);
//! - offline benchmark solvers ([`offline`]);
//! - prediction generators ([`predictors`]);
//! - a lower-bound instance generator over hierarchically well-separated
//!   trees ([`hst`]);
//! - an experiment harness with CSV reporting ([`bench`]), exposed through
//!   the `oflp` binary.

pub mod algorithms;
pub mod bench;
pub mod error;
pub mod hst;
pub mod instance;
pub mod metric;
pub mod meyerson;
pub mod offline;
pub mod prediction;
pub mod predictors;

pub use algorithms::{run_follow_predict, run_meyerson, run_pam, CostSummary, RunState};
pub use error::{Error, Result};
pub use instance::{OnlineInstance, PredictionStream};
pub use metric::{FacilityId, FacilityUniverse, MetricSpace, PointId};
pub use offline::{brute_force, mp_solve, OfflineSolution};
