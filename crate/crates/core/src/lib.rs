//! Hearability of base stations for cellular positioning.
//!
//! The crate models base stations as a Poisson point process around a device
//! at the origin and answers one question: with what probability can the
//! device hear at least `L` base stations above a post-processing SINR
//! threshold? It provides
//!
//! * closed-form bounds and dominant-interferer approximations ([`analytic`]),
//! * the random frequency reuse composition ([`reuse`]),
//! * a Monte Carlo ground truth over PPP and hexagonal deployments ([`simulate`]),
//! * an OTDOA-style positioning pipeline with E911 percentile checks ([`e911`]).
//!
//! Monte Carlo loops run on rayon when the `parallel` feature is enabled (the
//! default) and fall back to plain iterators otherwise. Results are identical
//! in both modes.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod analytic;
pub mod e911;
mod error;
pub mod model;
pub mod numerics;
pub mod par;
pub mod reuse;
pub mod rng;
pub mod simulate;
pub mod stats;

pub use analytic::{evaluate, MethodTag};
pub use error::{Error, Result};
pub use model::{Realization, Scenario, ScenarioBuilder, ShadowingSpec};
pub use numerics::QuadratureSpec;
pub use simulate::{Deployment, McEstimate, SimConfig, TruthMode};

/// Converts decibels to a linear power ratio.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Converts a linear power ratio to decibels.
pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}
