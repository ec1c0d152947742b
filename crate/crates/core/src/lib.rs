//! Multiple-source domain adaptation with distribution-weighted predictors.
//!
//! Given per-domain distributions `D_k` and predictors `h_k`, the crate builds
//! combined predictors `h_z` and finds mixture weights `z` that equalize the
//! per-domain losses by difference-of-convex programming.

pub mod dc_solver;
pub mod domain_model;
mod error;
pub mod oracle;
pub mod predictors;
pub mod scenarios;

pub use error::{Error, Result};
