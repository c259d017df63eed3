//! Seeded k-fold assignment shared by the σ and ridge-λ searches.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// One fold: indices held out for validation and the rest used for fitting.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fold {
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
}

/// Shuffles `0..n` with `seed` and deals the indices round-robin into `k`
/// folds. Every index is validated exactly once.
pub fn kfold(n: usize, k: usize, seed: u64) -> Result<Vec<Fold>> {
    if k < 2 {
        return Err(Error::Parameter(format!("fold count must be ≥ 2, got {k}")));
    }
    if n < k {
        return Err(Error::Parameter(format!(
            "{n} rows cannot be split into {k} folds"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut assignment = vec![0usize; n];
    for (pos, &i) in order.iter().enumerate() {
        assignment[i] = pos % k;
    }
    Ok((0..k)
        .map(|f| {
            let (validation, train): (Vec<usize>, Vec<usize>) =
                (0..n).partition(|&i| assignment[i] == f);
            Fold { train, validation }
        })
        .collect())
}

pub(crate) fn take_rows<T: Clone>(rows: &[T], idx: &[usize]) -> Vec<T> {
    idx.iter().map(|&i| rows[i].clone()).collect()
}

/// Picks the candidate with the lowest score; near-ties (relative 1e-12) go
/// to the larger candidate value.
pub(crate) fn argmin_prefer_larger(scored: &[(f64, f64)]) -> Option<f64> {
    let mut sorted: Vec<(f64, f64)> = scored.to_vec();
    sorted.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut best: Option<(f64, f64)> = None;
    for (value, score) in sorted {
        match best {
            None => best = Some((value, score)),
            Some((_, b)) => {
                let tol = 1e-12 * b.abs().max(1e-300);
                if score < b - tol {
                    best = Some((value, score));
                }
            }
        }
    }
    best.map(|(v, _)| v)
}
