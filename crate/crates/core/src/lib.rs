//! Bayesian models for volleyball results.
//!
//! A set is described by who won it, how many points the loser scored
//! before any deuce, and how many extra points the deuce added. The crate
//! fits the model family by MCMC, compares variants by DIC and simulates
//! leagues, remaining fixtures and playoff brackets from the posterior.

pub mod cli;
pub mod data;
pub mod error;
pub mod evaluate;
pub mod inference;
pub mod model;
pub mod simulate;
pub mod synth;

#[cfg(test)]
pub(crate) mod fixtures;

pub use error::{Error, Result};
