//! Converse bounds for non-adaptive probabilistic group testing in the
//! linear regime, with exact small-instance oracles and a simulator for the
//! adaptive pairing scheme.
//!
//! - [`entropy`]: binary entropy and the weight-`k` function family.
//! - [`bounds`]: counting, quantization, individual-testing and general
//!   converse bounds, their crossover and the adaptivity gap.
//! - [`oracle`]: enumeration and inclusion-exclusion ground truth.
//! - [`adaptive`]: the pairing algorithm and its Monte Carlo simulation.
//! - [`cli`]: the `gtbounds` command-line front end.

// `!(a < b)` is used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod adaptive;
pub mod bounds;
pub mod cli;
pub mod entropy;
pub mod error;
pub mod oracle;
pub mod plot;

pub use bounds::{BoundKind, BoundQuery, BoundResult, CurveRow, DELTA_STAR};
pub use entropy::{DefectModel, TestProfile};
pub use error::{Error, Result};
pub use oracle::{JointDistribution, TestMatrix};
