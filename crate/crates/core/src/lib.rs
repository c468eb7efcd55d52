//! Construct-validity tooling for embedding-based measurement.
//!
//! The crate covers the data contract ([`corpus`]), the statistical kernels
//! ([`stats`]), nuisance featurization ([`nuisance`]), embedding-space
//! entanglement diagnostics ([`geometry`]), a latent-factor generator with
//! planted ground truth ([`synthetic`]), the five validity cards
//! ([`cards`]) and report rendering ([`report`]).

pub mod cards;
pub mod corpus;
pub mod error;
pub mod geometry;
pub mod nuisance;
pub mod report;
pub mod stats;
pub mod synthetic;

pub use error::{Error, Result};
