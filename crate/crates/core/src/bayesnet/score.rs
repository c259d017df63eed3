use std::collections::HashMap;

use super::{CategoricalData, Dag, LEVELS};
use crate::error::{Error, Result};

/// Index of a parent configuration: the first parent is the most
/// significant base-3 digit.
pub(crate) fn config_index(parents: &[usize], levels: impl Fn(usize) -> usize) -> usize {
    parents.iter().fold(0, |acc, &p| acc * LEVELS + levels(p))
}

/// `N_{jk}` for every observed parent configuration `j`.
pub(crate) fn family_counts(child: usize, parents: &[usize], data: &CategoricalData) -> HashMap<usize, [u32; LEVELS]> {
    let mut counts: HashMap<usize, [u32; LEVELS]> = HashMap::new();
    let child_col = data.column(child);
    let cols: Vec<&[u8]> = parents.iter().map(|&p| data.column(p)).collect();
    for row in 0..data.n_rows() {
        let j = cols.iter().fold(0usize, |acc, c| acc * LEVELS + c[row] as usize);
        counts.entry(j).or_insert([0; LEVELS])[child_col[row] as usize] += 1;
    }
    counts
}

/// BIC family score, higher is better:
/// `Σ_{j,k} N_jk ln(N_jk / N_j) − (ln N / 2) · q · (r − 1)` with r = 3 and
/// q = 3^|parents|. Unobserved configurations add nothing to the
/// likelihood but still count in the penalty.
pub fn family_score(child: usize, parents: &[usize], data: &CategoricalData) -> f64 {
    debug_assert!(!parents.contains(&child));
    let mut loglik = 0.0;
    // summing in configuration order keeps the result independent of
    // hash iteration order
    let mut counts: Vec<(usize, [u32; LEVELS])> = family_counts(child, parents, data).into_iter().collect();
    counts.sort_unstable_by_key(|(j, _)| *j);
    for (_, row) in counts {
        let n_j: u32 = row.iter().sum();
        for &n_jk in &row {
            if n_jk > 0 {
                loglik += n_jk as f64 * (n_jk as f64 / n_j as f64).ln();
            }
        }
    }
    let q = (LEVELS as f64).powi(parents.len() as i32);
    let n = data.n_rows().max(1) as f64;
    loglik - 0.5 * n.ln() * q * (LEVELS - 1) as f64
}

fn check_nodes(dag: &Dag, data: &CategoricalData) -> Result<()> {
    if dag.nodes() != data.variables() {
        return Err(Error::Schema(format!(
            "graph nodes {:?} do not match data variables {:?}",
            dag.nodes(),
            data.variables()
        )));
    }
    Ok(())
}

pub fn bic_score(dag: &Dag, data: &CategoricalData) -> Result<f64> {
    check_nodes(dag, data)?;
    Ok((0..dag.n())
        .map(|v| {
            let parents: Vec<usize> = dag.parents(v).iter().copied().collect();
            family_score(v, &parents, data)
        })
        .sum())
}

/// Memoised family scores for one dataset, keyed by (child, parent bitmask).
pub struct ScoreCache<'a> {
    data: &'a CategoricalData,
    memo: HashMap<(usize, u64), f64>,
}

impl<'a> ScoreCache<'a> {
    pub fn new(data: &'a CategoricalData) -> Result<Self> {
        if data.n_vars() > 64 {
            return Err(Error::Parameter("score cache supports at most 64 variables".into()));
        }
        Ok(ScoreCache {
            data,
            memo: HashMap::new(),
        })
    }

    pub fn data(&self) -> &CategoricalData {
        self.data
    }

    /// `parents` must be sorted ascending.
    pub fn family(&mut self, child: usize, parents: &[usize]) -> f64 {
        let mask = parents.iter().fold(0u64, |m, &p| m | (1 << p));
        let data = self.data;
        *self
            .memo
            .entry((child, mask))
            .or_insert_with(|| family_score(child, parents, data))
    }

    pub fn check(&self, dag: &Dag) -> Result<()> {
        check_nodes(dag, self.data)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("v{i}")).collect()
    }

    fn random_data(n_vars: usize, rows: usize, seed: u64) -> CategoricalData {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows: Vec<Vec<u8>> = (0..rows)
            .map(|_| (0..n_vars).map(|_| rng.random_range(0..3u8)).collect())
            .collect();
        CategoricalData::from_rows(names(n_vars), &rows).unwrap()
    }

    #[test]
    fn uniform_marginal_hand_value() {
        let rows: Vec<Vec<u8>> = (0..300).map(|i| vec![(i % 3) as u8]).collect();
        let data = CategoricalData::from_rows(names(1), &rows).unwrap();
        let s = family_score(0, &[], &data);
        let loglik = 300.0 * (1.0f64 / 3.0).ln();
        let penalty = 300f64.ln() / 2.0 * 2.0;
        assert!((loglik - -329.584).abs() < 1e-3);
        assert!((penalty - 5.704).abs() < 1e-3);
        assert!((s - (loglik - penalty)).abs() < 1e-9);
        assert!((s - -335.287).abs() < 0.01);
    }

    #[test]
    fn deterministic_parent_scores_minus_penalty() {
        let rows: Vec<Vec<u8>> = (0..300).map(|i| vec![(i % 3) as u8, ((i + 1) % 3) as u8]).collect();
        let data = CategoricalData::from_rows(names(2), &rows).unwrap();
        let s = family_score(1, &[0], &data);
        let penalty = 300f64.ln() / 2.0 * 3.0 * 2.0;
        assert!((s + penalty).abs() < 1e-9);
    }

    #[test]
    fn noise_parent_lowers_score() {
        let data = random_data(2, 1000, 17);
        assert!(family_score(0, &[1], &data) < family_score(0, &[], &data));
    }

    #[test]
    fn empty_graph_is_sum_of_marginals() {
        let data = random_data(4, 200, 3);
        let dag = Dag::empty(names(4)).unwrap();
        let expected: f64 = (0..4).map(|v| family_score(v, &[], &data)).sum();
        assert_eq!(bic_score(&dag, &data).unwrap(), expected);
    }

    #[test]
    fn node_mismatch_is_schema_error() {
        let data = random_data(3, 10, 1);
        let dag = Dag::empty(names(4)).unwrap();
        assert!(matches!(bic_score(&dag, &data), Err(Error::Schema(_))));
    }

    #[test]
    fn relabeling_preserves_score() {
        let data = random_data(4, 300, 5);
        let dag = Dag::from_edges(names(4), &[(0, 1), (2, 1), (1, 3)]).unwrap();
        let perm = [3, 1, 0, 2];
        let pd = dag.permute(&perm).unwrap();
        let pdata = data.permute_variables(&perm);
        let (a, b) = (bic_score(&dag, &data).unwrap(), bic_score(&pd, &pdata).unwrap());
        assert!((a - b).abs() < 1e-9 * a.abs());
    }

    #[test]
    fn cache_matches_direct() {
        let data = random_data(5, 150, 9);
        let mut cache = ScoreCache::new(&data).unwrap();
        for _ in 0..2 {
            assert_eq!(cache.family(3, &[0, 2]), family_score(3, &[0, 2], &data));
        }
    }
}
