use std::collections::BTreeMap;

use super::score::{config_index, family_counts};
use super::{CategoricalData, Dag, LEVELS};
use crate::discretizer::Level;
use crate::error::{Error, Result};

/// `P(child | parents)`: one probability row per parent configuration,
/// indexed with the first parent as the most significant base-3 digit.
#[derive(Debug, Clone, PartialEq)]
pub struct CategoricalCpt {
    pub child: usize,
    pub parents: Vec<usize>,
    pub rows: Vec<[f64; LEVELS]>,
}

impl CategoricalCpt {
    pub fn uniform(child: usize, parents: Vec<usize>) -> Self {
        let q = LEVELS.pow(parents.len() as u32);
        CategoricalCpt {
            child,
            parents,
            rows: vec![[1.0 / LEVELS as f64; LEVELS]; q],
        }
    }

    /// Row for the parent levels found in `assignment` (indexed by node).
    pub fn row_for(&self, assignment: &[usize]) -> &[f64; LEVELS] {
        &self.rows[config_index(&self.parents, |p| assignment[p])]
    }

    fn validate(&self, dag: &Dag) -> Result<()> {
        let expected: Vec<usize> = dag.parents(self.child).iter().copied().collect();
        if self.parents != expected {
            return Err(Error::Graph(format!(
                "CPT parents for `{}` do not match the graph",
                dag.name(self.child)
            )));
        }
        if self.rows.len() != LEVELS.pow(self.parents.len() as u32) {
            return Err(Error::Graph(format!(
                "CPT for `{}` has {} rows, expected {}",
                dag.name(self.child),
                self.rows.len(),
                LEVELS.pow(self.parents.len() as u32)
            )));
        }
        for row in &self.rows {
            let sum: f64 = row.iter().sum();
            if row.iter().any(|p| !(*p >= 0.0)) || (sum - 1.0).abs() > 1e-9 {
                return Err(Error::Graph(format!(
                    "CPT row for `{}` is not a probability vector: {row:?}",
                    dag.name(self.child)
                )));
            }
        }
        Ok(())
    }
}

/// A DAG with one CPT per node; `cpts[i].child == i`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteBayesNet {
    dag: Dag,
    cpts: Vec<CategoricalCpt>,
}

impl DiscreteBayesNet {
    pub fn new(dag: Dag, cpts: Vec<CategoricalCpt>) -> Result<Self> {
        if cpts.len() != dag.n() {
            return Err(Error::Graph(format!("{} CPTs for {} nodes", cpts.len(), dag.n())));
        }
        for (i, cpt) in cpts.iter().enumerate() {
            if cpt.child != i {
                return Err(Error::Graph("CPTs must be listed in node order".into()));
            }
            cpt.validate(&dag)?;
        }
        Ok(DiscreteBayesNet { dag, cpts })
    }

    pub fn uniform(dag: Dag) -> Self {
        let cpts = (0..dag.n())
            .map(|v| CategoricalCpt::uniform(v, dag.parents(v).iter().copied().collect()))
            .collect();
        DiscreteBayesNet { dag, cpts }
    }

    pub fn dag(&self) -> &Dag {
        &self.dag
    }

    pub fn cpts(&self) -> &[CategoricalCpt] {
        &self.cpts
    }

    pub fn cpt(&self, node: usize) -> &CategoricalCpt {
        &self.cpts[node]
    }

    pub fn n(&self) -> usize {
        self.dag.n()
    }

    /// Product of CPT entries for a full assignment of level indices.
    pub fn joint_levels(&self, assignment: &[usize]) -> f64 {
        self.cpts
            .iter()
            .map(|c| c.row_for(assignment)[assignment[c.child]])
            .product()
    }

    pub fn joint_probability(&self, assignment: &BTreeMap<String, Level>) -> Result<f64> {
        let mut levels = Vec::with_capacity(self.n());
        for name in self.dag.nodes() {
            let level = assignment
                .get(name)
                .ok_or_else(|| Error::IncompleteAssignment(name.clone()))?;
            levels.push(level.index());
        }
        if let Some(extra) = assignment.keys().find(|k| self.dag.index_of(k).is_none()) {
            return Err(Error::Schema(format!("unknown variable `{extra}`")));
        }
        Ok(self.joint_levels(&levels))
    }

    /// Σ over rows of ln P(row).
    pub fn log_likelihood(&self, data: &CategoricalData) -> f64 {
        let mut row = vec![0usize; self.n()];
        (0..data.n_rows())
            .map(|r| {
                for (v, slot) in row.iter_mut().enumerate() {
                    *slot = data.column(v)[r] as usize;
                }
                self.joint_levels(&row).ln()
            })
            .sum()
    }
}

/// Estimates every CPT as `(N_jk + α) / (N_j + 3α)`. With α = 0 an
/// unobserved parent configuration gets a uniform row.
pub fn fit_cpts(dag: &Dag, data: &CategoricalData, alpha: f64) -> Result<DiscreteBayesNet> {
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(Error::Parameter(format!(
            "smoothing α must be finite and nonnegative, got {alpha}"
        )));
    }
    if dag.nodes() != data.variables() {
        return Err(Error::Schema("graph nodes do not match data variables".into()));
    }
    let cpts = (0..dag.n())
        .map(|v| {
            let parents: Vec<usize> = dag.parents(v).iter().copied().collect();
            let counts = family_counts(v, &parents, data);
            let q = LEVELS.pow(parents.len() as u32);
            let rows = (0..q)
                .map(|j| {
                    let c = counts.get(&j).copied().unwrap_or([0; LEVELS]);
                    let n_j: u32 = c.iter().sum();
                    let denom = n_j as f64 + LEVELS as f64 * alpha;
                    if denom == 0.0 {
                        [1.0 / LEVELS as f64; LEVELS]
                    } else {
                        c.map(|n| (n as f64 + alpha) / denom)
                    }
                })
                .collect();
            CategoricalCpt {
                child: v,
                parents,
                rows,
            }
        })
        .collect();
    DiscreteBayesNet::new(dag.clone(), cpts)
}
