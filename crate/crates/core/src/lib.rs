//! Country-level well-being modelling: panel preparation, GRNN regression
//! with linear baselines, and discrete Bayesian-network structure learning
//! with exact inference.

pub mod bayesnet;
pub mod cli;
pub mod cv;
pub mod data_pipeline;
pub mod discretizer;
pub mod error;
pub mod evaluation;
pub mod grnn;
pub mod inference;
pub mod structure_search;
pub mod variables;

pub use error::{Error, Result};
