//! General Regression Neural Network: a one-pass Gaussian-kernel regressor.
//!
//! The input layer standardizes a query with training statistics, the
//! pattern layer holds one node per training case with activation
//! `exp(-D² / (2σ²))`, the summation layer forms `S_N = Σ yᵢPᵢ` and
//! `S_D = Σ Pᵢ`, and the output layer returns `S_N / S_D`.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cv::{self, argmin_prefer_larger};
use crate::data_pipeline::FeatureTable;
use crate::error::{Error, Result};
use crate::variables;

/// Per-feature z-score parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub means: Vec<f64>,
    pub scales: Vec<f64>,
}

impl Standardizer {
    /// Fits means and population standard deviations. A single row has no
    /// spread to measure; it gets unit scales.
    pub fn fit(rows: &[Vec<f64>], names: &[String]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::Parameter("cannot standardize zero rows".into()));
        }
        let d = rows[0].len();
        let mut means = vec![0.0; d];
        for r in rows {
            for (m, v) in means.iter_mut().zip(r) {
                *m += v;
            }
        }
        for m in &mut means {
            *m /= n as f64;
        }
        if n == 1 {
            return Ok(Standardizer {
                means,
                scales: vec![1.0; d],
            });
        }
        let mut scales = vec![0.0; d];
        for r in rows {
            for ((s, v), m) in scales.iter_mut().zip(r).zip(&means) {
                *s += (v - m) * (v - m);
            }
        }
        for (j, s) in scales.iter_mut().enumerate() {
            *s = (*s / n as f64).sqrt();
            if !(*s > 0.0) {
                let name = names.get(j).cloned().unwrap_or_else(|| format!("column {j}"));
                return Err(Error::DegenerateFeature(name));
            }
        }
        Ok(Standardizer { means, scales })
    }

    pub fn transform(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(&self.means)
            .zip(&self.scales)
            .map(|((v, m), s)| (v - m) / s)
            .collect()
    }
}

/// Pattern- and summation-layer outputs for one query.
///
/// Activations are shifted by the smallest squared distance, so the nearest
/// pattern has `Pᵢ = 1` and `s_d ≥ 1`; the ratio `s_n / s_d` is unchanged.
/// Very distant patterns may underflow to zero.
#[derive(Debug, Clone, PartialEq)]
pub struct PatternResponse {
    pub p: Vec<f64>,
    pub s_n: f64,
    pub s_d: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrnnModel {
    pub predictors: Vec<String>,
    pub standardizer: Standardizer,
    pub patterns: Vec<Vec<f64>>,
    pub targets: Vec<f64>,
    pub sigma: f64,
    /// SHA-256 of the raw training inputs and targets.
    pub fingerprint: String,
}

fn check_sigma(sigma: f64) -> Result<()> {
    if sigma.is_finite() && sigma > 0.0 {
        Ok(())
    } else {
        Err(Error::Parameter(format!("σ must be a positive finite number, got {sigma}")))
    }
}

pub fn fingerprint(x: &[Vec<f64>], y: &[f64]) -> String {
    let mut h = Sha256::new();
    for (row, t) in x.iter().zip(y) {
        for v in row {
            h.update(v.to_le_bytes());
        }
        h.update(t.to_le_bytes());
    }
    hex::encode(h.finalize())
}

/// Fits on the twelve predictors with Life Ladder as the target.
pub fn fit(train: &FeatureTable, sigma: f64) -> Result<GrnnModel> {
    let (x, y) = train.predictors_and_target()?;
    GrnnModel::from_arrays(variables::predictor_names(), &x, &y, sigma)
}

impl GrnnModel {
    pub fn from_arrays(predictors: Vec<String>, x: &[Vec<f64>], y: &[f64], sigma: f64) -> Result<Self> {
        check_sigma(sigma)?;
        if x.is_empty() {
            return Err(Error::Parameter("GRNN needs at least one training row".into()));
        }
        if x.len() != y.len() {
            return Err(Error::Parameter(format!(
                "{} input rows but {} targets",
                x.len(),
                y.len()
            )));
        }
        if x.iter().any(|r| r.len() != predictors.len()) {
            return Err(Error::Parameter(format!(
                "every input row must have {} columns",
                predictors.len()
            )));
        }
        if x.iter().flatten().chain(y).any(|v| !v.is_finite()) {
            return Err(Error::Parameter("training data must be finite".into()));
        }
        let standardizer = Standardizer::fit(x, &predictors)?;
        let patterns = x.iter().map(|r| standardizer.transform(r)).collect();
        Ok(GrnnModel {
            predictors,
            standardizer,
            patterns,
            targets: y.to_vec(),
            sigma,
            fingerprint: fingerprint(x, y),
        })
    }

    /// Same patterns, different smoothing factor.
    pub fn with_sigma(&self, sigma: f64) -> Result<Self> {
        check_sigma(sigma)?;
        Ok(GrnnModel {
            sigma,
            ..self.clone()
        })
    }

    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.predictors.len() {
            return Err(Error::Parameter(format!(
                "expected {} inputs, got {}",
                self.predictors.len(),
                x.len()
            )));
        }
        if let Some(j) = x.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidValue {
                variable: self.predictors[j].clone(),
                value: x[j],
            });
        }
        Ok(())
    }

    fn squared_distances(&self, z: &[f64]) -> Vec<f64> {
        self.patterns
            .iter()
            .map(|p| p.iter().zip(z).map(|(a, b)| (a - b) * (a - b)).sum())
            .collect()
    }

    pub fn pattern_response(&self, x: &[f64]) -> Result<PatternResponse> {
        self.check_input(x)?;
        let d2 = self.squared_distances(&self.standardizer.transform(x));
        let d2_min = d2.iter().copied().fold(f64::INFINITY, f64::min);
        let denom = 2.0 * self.sigma * self.sigma;
        let p: Vec<f64> = d2.iter().map(|d| (-(d - d2_min) / denom).exp()).collect();
        let s_n = p.iter().zip(&self.targets).map(|(p, y)| p * y).sum();
        let s_d = p.iter().sum();
        Ok(PatternResponse { p, s_n, s_d })
    }

    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        let r = self.pattern_response(x)?;
        // Weighted offsets from the smallest target: a constant target comes
        // back exactly and rounding cannot leave [min, max].
        let (lo, hi) = self
            .targets
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &t| (a.min(t), b.max(t)));
        let offset: f64 = r.p.iter().zip(&self.targets).map(|(p, t)| p * (t - lo)).sum();
        let y = (lo + offset / r.s_d).clamp(lo, hi);
        if y.is_finite() && r.s_d > 0.0 {
            Ok(y)
        } else {
            Ok(self.nearest_target(x))
        }
    }

    fn nearest_target(&self, x: &[f64]) -> f64 {
        let d2 = self.squared_distances(&self.standardizer.transform(x));
        let (i, _) = d2
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .expect("model has at least one pattern");
        self.targets[i]
    }

    pub fn predict_rows(&self, rows: &[Vec<f64>]) -> Result<Vec<f64>> {
        rows.iter().map(|r| self.predict(r)).collect()
    }

    pub fn predict_table(&self, ft: &FeatureTable) -> Result<Vec<f64>> {
        self.predict_rows(&ft.matrix(&self.predictors)?)
    }

    pub fn save_json(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(|e| Error::Format(e.to_string()))?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load_json(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let model: GrnnModel = serde_json::from_str(&text).map_err(|e| Error::Format(e.to_string()))?;
        check_sigma(model.sigma)?;
        Ok(model)
    }
}

/// `n` log-spaced values from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// 30 log-spaced σ values on [0.01, 10] (standardized units).
pub fn default_sigma_grid() -> Vec<f64> {
    log_grid(1e-2, 1e1, 30)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SigmaSelection {
    pub sigma: f64,
    /// (σ, mean validation MSE) for every grid point, in grid order.
    pub cv_scores: Vec<(f64, f64)>,
}

pub fn select_sigma(train: &FeatureTable, grid: &[f64], folds: usize, seed: u64) -> Result<SigmaSelection> {
    let (x, y) = train.predictors_and_target()?;
    select_sigma_arrays(&variables::predictor_names(), &x, &y, grid, folds, seed)
}

/// k-fold cross-validated σ. Each fold standardizes on its own training
/// part. Folds run in parallel; scores are averaged in fold order.
pub fn select_sigma_arrays(
    predictors: &[String],
    x: &[Vec<f64>],
    y: &[f64],
    grid: &[f64],
    folds: usize,
    seed: u64,
) -> Result<SigmaSelection> {
    if grid.is_empty() {
        return Err(Error::Parameter("σ grid is empty".into()));
    }
    for &s in grid {
        check_sigma(s)?;
    }
    let splits = cv::kfold(x.len(), folds, seed)?;
    let per_fold: Vec<Vec<f64>> = splits
        .par_iter()
        .map(|fold| {
            let base = GrnnModel::from_arrays(
                predictors.to_vec(),
                &cv::take_rows(x, &fold.train),
                &cv::take_rows(y, &fold.train),
                grid[0],
            )?;
            grid.iter()
                .map(|&sigma| {
                    let m = base.with_sigma(sigma)?;
                    let mut sse = 0.0;
                    for &i in &fold.validation {
                        let e = m.predict(&x[i])? - y[i];
                        sse += e * e;
                    }
                    Ok(sse / fold.validation.len() as f64)
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let cv_scores: Vec<(f64, f64)> = grid
        .iter()
        .enumerate()
        .map(|(g, &s)| {
            let mean = per_fold.iter().map(|f| f[g]).sum::<f64>() / per_fold.len() as f64;
            (s, mean)
        })
        .collect();
    let sigma = argmin_prefer_larger(&cv_scores).expect("grid is nonempty");
    Ok(SigmaSelection { sigma, cv_scores })
}
