//! Criticality-aware processing of automotive radar point clouds.
//!
//! Points near a (possibly synthesized) vehicle trajectory are scored,
//! and criticality regions around them suspend the RCS filter in the
//! following scans so that weak returns of vulnerable road users survive
//! into clustering.

// `!(x > 0.0)` style checks deliberately reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod clustering;
pub mod criticality;
pub mod error;
pub mod evaluation;
pub mod filtering;
pub mod model;
pub mod reachability;
pub mod regions;
pub mod synth;
pub mod trajectory;

pub use error::{Error, Result};
