//! Fleet sizing and cost planning for sidewalk delivery robots that serve
//! online food orders in fixed delivery intervals.
//!
//! - [`ca_model`]: continuous-approximation route lengths.
//! - [`fleet_plan`]: closed-form optimal fleet, costs and KKT certificate.
//! - [`sensitivity`]: trade-off derivatives, level-of-service and sweeps.
//! - [`scenario_io`]: scenario files, depot comparison and reports.
//! - [`mc_oracle`]: Monte Carlo routing checks of the CA constants.
//! - [`cli`]: the `sdr-planner` command line.
// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ca_model;
pub mod cli;
pub mod error;
pub mod fixtures;
pub mod fleet_plan;
pub mod mc_oracle;
pub mod reproduce;
pub mod scenario_io;
pub mod sensitivity;

pub use error::{Error, Result};
