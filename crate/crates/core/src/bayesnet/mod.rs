//! Discrete Bayesian networks over ternary (Low/Medium/High) variables:
//! graph representation, BIC scoring, CPT estimation and the factorized
//! joint distribution.

mod cpt;
mod dag;
mod data;
mod score;
pub mod text;

pub use cpt::{fit_cpts, CategoricalCpt, DiscreteBayesNet};
pub use dag::{find_cycle, reachable, topological_sort, Dag};
pub use data::CategoricalData;
pub use score::{bic_score, family_score, ScoreCache};

/// Every variable has exactly three levels.
pub const LEVELS: usize = 3;
