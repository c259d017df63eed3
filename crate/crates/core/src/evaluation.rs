//! Closed-form linear baselines (OLS and ridge) and the R² / MAE / MSE
//! metric suite.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::cv::{self, argmin_prefer_larger};
use crate::data_pipeline::{write_comments, FeatureTable};
use crate::error::{Error, Result};
use crate::variables;

/// `y ≈ intercept + weights · x`, weights in the original predictor units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub predictors: Vec<String>,
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub ridge_lambda: f64,
}

pub fn fit_linear(train: &FeatureTable, ridge_lambda: f64) -> Result<LinearModel> {
    let (x, y) = train.predictors_and_target()?;
    fit_linear_arrays(variables::predictor_names(), &x, &y, ridge_lambda)
}

/// Solves `(ZᵀZ + λI) w = Zᵀ(y − ȳ)` on z-scored predictors, leaving the
/// intercept unpenalized, then maps the weights back to original units.
pub fn fit_linear_arrays(
    predictors: Vec<String>,
    x: &[Vec<f64>],
    y: &[f64],
    ridge_lambda: f64,
) -> Result<LinearModel> {
    if !(ridge_lambda >= 0.0) || !ridge_lambda.is_finite() {
        return Err(Error::Parameter(format!(
            "ridge λ must be a finite nonnegative number, got {ridge_lambda}"
        )));
    }
    let n = x.len();
    let d = predictors.len();
    if n == 0 || n != y.len() || x.iter().any(|r| r.len() != d) {
        return Err(Error::Parameter("design matrix and target disagree in shape".into()));
    }

    let y_mean = y.iter().sum::<f64>() / n as f64;
    let mut means = vec![0.0; d];
    let mut scales = vec![0.0; d];
    for j in 0..d {
        means[j] = x.iter().map(|r| r[j]).sum::<f64>() / n as f64;
        scales[j] = (x.iter().map(|r| (r[j] - means[j]).powi(2)).sum::<f64>() / n as f64).sqrt();
        if scales[j] == 0.0 {
            if ridge_lambda == 0.0 {
                return Err(Error::SingularSystem);
            }
            // a constant column standardizes to zeros and gets weight 0
            scales[j] = 1.0;
        }
    }
    if ridge_lambda == 0.0 && n <= d {
        return Err(Error::SingularSystem);
    }

    let z = DMatrix::from_fn(n, d, |i, j| (x[i][j] - means[j]) / scales[j]);
    let yc = DVector::from_fn(n, |i, _| y[i] - y_mean);
    let mut gram = z.transpose() * &z;
    for j in 0..d {
        gram[(j, j)] += ridge_lambda;
    }
    if ridge_lambda == 0.0 {
        let eig = gram.clone().symmetric_eigen();
        let max = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
        let min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
        if !(min > 1e-12 * max) {
            return Err(Error::SingularSystem);
        }
    }
    let rhs = z.transpose() * yc;
    let w = gram.cholesky().ok_or(Error::SingularSystem)?.solve(&rhs);

    let weights: Vec<f64> = (0..d).map(|j| w[j] / scales[j]).collect();
    let intercept = y_mean - weights.iter().zip(&means).map(|(w, m)| w * m).sum::<f64>();
    Ok(LinearModel {
        predictors,
        weights,
        intercept,
        ridge_lambda,
    })
}

impl LinearModel {
    pub fn predict(&self, x: &[f64]) -> f64 {
        self.intercept + self.weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>()
    }

    pub fn predict_rows(&self, rows: &[Vec<f64>]) -> Vec<f64> {
        rows.iter().map(|r| self.predict(r)).collect()
    }

    pub fn predict_table(&self, ft: &FeatureTable) -> Result<Vec<f64>> {
        Ok(self.predict_rows(&ft.matrix(&self.predictors)?))
    }
}

/// λ ∈ {10⁻³, 10⁻², …, 10²}.
pub fn default_lambda_grid() -> Vec<f64> {
    (-3..=2).map(|e| 10f64.powi(e)).collect()
}

/// k-fold CV over `grid`; returns the λ with the lowest mean validation MSE
/// (ties toward larger λ) and the per-λ scores.
pub fn select_ridge_lambda(
    predictors: &[String],
    x: &[Vec<f64>],
    y: &[f64],
    grid: &[f64],
    folds: usize,
    seed: u64,
) -> Result<(f64, Vec<(f64, f64)>)> {
    if grid.is_empty() {
        return Err(Error::Parameter("λ grid is empty".into()));
    }
    let splits = cv::kfold(x.len(), folds, seed)?;
    let mut scores = Vec::with_capacity(grid.len());
    for &lambda in grid {
        let mut total = 0.0;
        for fold in &splits {
            let m = fit_linear_arrays(
                predictors.to_vec(),
                &cv::take_rows(x, &fold.train),
                &cv::take_rows(y, &fold.train),
                lambda,
            )?;
            let mse = fold
                .validation
                .iter()
                .map(|&i| (m.predict(&x[i]) - y[i]).powi(2))
                .sum::<f64>()
                / fold.validation.len() as f64;
            total += mse;
        }
        scores.push((lambda, total / splits.len() as f64));
    }
    let best = argmin_prefer_larger(&scores).expect("grid is nonempty");
    Ok((best, scores))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub model_name: String,
    pub r2: f64,
    pub mae: f64,
    pub mse: f64,
}

fn check_pair(predictions: &[f64], actuals: &[f64]) -> Result<()> {
    if predictions.is_empty() || predictions.len() != actuals.len() {
        return Err(Error::Parameter(format!(
            "need equal nonzero lengths, got {} predictions and {} actuals",
            predictions.len(),
            actuals.len()
        )));
    }
    Ok(())
}

pub fn mae(predictions: &[f64], actuals: &[f64]) -> Result<f64> {
    check_pair(predictions, actuals)?;
    Ok(predictions.iter().zip(actuals).map(|(p, a)| (a - p).abs()).sum::<f64>() / actuals.len() as f64)
}

pub fn mse(predictions: &[f64], actuals: &[f64]) -> Result<f64> {
    check_pair(predictions, actuals)?;
    Ok(predictions.iter().zip(actuals).map(|(p, a)| (a - p).powi(2)).sum::<f64>() / actuals.len() as f64)
}

pub fn score(predictions: &[f64], actuals: &[f64]) -> Result<MetricReport> {
    check_pair(predictions, actuals)?;
    let n = actuals.len() as f64;
    let mean = actuals.iter().sum::<f64>() / n;
    let sst: f64 = actuals.iter().map(|a| (a - mean).powi(2)).sum();
    if sst == 0.0 {
        return Err(Error::R2Undefined);
    }
    let sse: f64 = predictions.iter().zip(actuals).map(|(p, a)| (a - p).powi(2)).sum();
    Ok(MetricReport {
        model_name: String::new(),
        r2: 1.0 - sse / sst,
        mae: mae(predictions, actuals)?,
        mse: sse / n,
    })
}

impl MetricReport {
    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.model_name = name.into();
        self
    }
}

fn fmt_metric(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.6}")
    } else {
        "NA".to_string()
    }
}

/// Writes `model,r2,mae,mse` rows.
pub fn write_metrics_csv<W: Write>(writer: W, reports: &[MetricReport], provenance: &[String]) -> Result<()> {
    let mut writer = writer;
    write_comments(&mut writer, provenance)?;
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["model", "r2", "mae", "mse"])?;
    for r in reports {
        w.write_record([
            r.model_name.clone(),
            fmt_metric(r.r2),
            fmt_metric(r.mae),
            fmt_metric(r.mse),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn names(d: usize) -> Vec<String> {
        (0..d).map(|j| format!("x{j}")).collect()
    }

    fn problem(n: usize, d: usize, noise: f64, seed: u64) -> (Vec<Vec<f64>>, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..d).map(|j| rng.random_range(-1.0..1.0) * (j + 1) as f64 + j as f64).collect())
            .collect();
        let y = x
            .iter()
            .map(|r| 2.0 + r.iter().enumerate().map(|(j, v)| (j as f64 - 1.5) * v).sum::<f64>()
                + noise * rng.random_range(-1.0..1.0))
            .collect();
        (x, y)
    }

    #[test]
    fn exact_linear_data_fits_perfectly() {
        let (x, y) = problem(40, 4, 0.0, 1);
        let m = fit_linear_arrays(names(4), &x, &y, 0.0).unwrap();
        for (xi, yi) in x.iter().zip(&y) {
            assert!((m.predict(xi) - yi).abs() < 1e-9);
        }
        let r = score(&m.predict_rows(&x), &y).unwrap();
        assert!((r.r2 - 1.0).abs() < 1e-12);
        assert!((m.intercept - 2.0).abs() < 1e-9);
        assert!((m.weights[3] - 1.5).abs() < 1e-9);
    }

    #[test]
    fn huge_lambda_predicts_train_mean() {
        let (x, y) = problem(40, 4, 0.3, 2);
        let m = fit_linear_arrays(names(4), &x, &y, 1e12).unwrap();
        let mean = y.iter().sum::<f64>() / y.len() as f64;
        assert!(m.weights.iter().all(|w| w.abs() < 1e-8));
        assert!((m.predict(&x[0]) - mean).abs() < 1e-8);
    }

    #[test]
    fn ols_residuals_orthogonal_to_predictors() {
        let (x, y) = problem(60, 5, 0.5, 3);
        let m = fit_linear_arrays(names(5), &x, &y, 0.0).unwrap();
        let resid: Vec<f64> = x.iter().zip(&y).map(|(xi, yi)| yi - m.predict(xi)).collect();
        for j in 0..5 {
            let mean = x.iter().map(|r| r[j]).sum::<f64>() / 60.0;
            let sd = (x.iter().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / 60.0).sqrt();
            let dot: f64 = x.iter().zip(&resid).map(|(r, e)| (r[j] - mean) / sd * e).sum();
            assert!(dot.abs() < 1e-8, "column {j}: {dot}");
        }
        assert!(resid.iter().sum::<f64>().abs() < 1e-8);
    }

    #[test]
    fn collinear_design_is_singular_for_ols_only() {
        let (mut x, y) = problem(30, 3, 0.1, 4);
        for r in &mut x {
            r[2] = 2.0 * r[0] - r[1];
        }
        assert!(matches!(fit_linear_arrays(names(3), &x, &y, 0.0), Err(Error::SingularSystem)));
        assert!(fit_linear_arrays(names(3), &x, &y, 0.1).is_ok());
    }

    #[test]
    fn constant_column_and_tiny_samples() {
        let x = vec![vec![1.0, 3.0], vec![2.0, 3.0]];
        let y = vec![1.0, 2.0];
        assert!(matches!(fit_linear_arrays(names(2), &x, &y, 0.0), Err(Error::SingularSystem)));
        let m = fit_linear_arrays(names(2), &x, &y, 1.0).unwrap();
        assert_eq!(m.weights[1], 0.0);
        assert!(fit_linear_arrays(names(2), &x, &y, -1.0).is_err());
    }

    #[test]
    fn score_examples() {
        let a = [1.0, 2.0, 4.0, 7.0];
        let r = score(&a, &a).unwrap();
        assert_eq!((r.r2, r.mae, r.mse), (1.0, 0.0, 0.0));
        let mean = [3.5; 4];
        assert!(score(&mean, &a).unwrap().r2.abs() < 1e-15);
        assert!(matches!(score(&[1.0, 2.0], &[3.0, 3.0]), Err(Error::R2Undefined)));
        assert!(score(&[], &[]).is_err());
        assert!(score(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn ridge_cv_picks_from_grid() {
        let (x, y) = problem(50, 4, 0.4, 5);
        let grid = default_lambda_grid();
        assert_eq!(grid.len(), 6);
        let (best, scores) = select_ridge_lambda(&names(4), &x, &y, &grid, 5, 3).unwrap();
        assert!(grid.contains(&best));
        assert_eq!(scores.len(), 6);
    }

    #[test]
    fn metrics_csv_layout() {
        let r = vec![MetricReport { model_name: "OLS".into(), r2: 0.75, mae: 0.43, mse: f64::NAN }];
        let mut buf = Vec::new();
        write_metrics_csv(&mut buf, &r, &["config_hash=x".into()]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "# config_hash=x\nmodel,r2,mae,mse\nOLS,0.750000,0.430000,NA\n");
    }

    proptest! {
        #[test]
        fn metric_invariants(pairs in proptest::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 2..40)) {
            let (p, a): (Vec<f64>, Vec<f64>) = pairs.iter().copied().unzip();
            prop_assume!(a.iter().any(|v| (v - a[0]).abs() > 1e-6));
            let r = score(&p, &a).unwrap();
            prop_assert!(r.mse >= r.mae * r.mae - 1e-12);
            prop_assert!(r.r2 <= 1.0 && r.mae >= 0.0 && r.mse >= 0.0);
            let (mut pr, mut ar) = (p.clone(), a.clone());
            pr.reverse();
            ar.reverse();
            let s = score(&pr, &ar).unwrap();
            prop_assert!((s.r2 - r.r2).abs() < 1e-9 && (s.mse - r.mse).abs() < 1e-12);
        }
    }
}
