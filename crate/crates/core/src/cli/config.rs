use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::data_pipeline::SplitSpec;
use crate::error::{Error, Result};
use crate::evaluation::default_lambda_grid;
use crate::grnn::{default_sigma_grid, log_grid};

/// Everything a run depends on. Read from TOML; command-line flags override
/// individual fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub input: Option<PathBuf>,
    pub out: PathBuf,
    /// Extra accepted headers per column key (`country`, `year` or a
    /// canonical variable name).
    pub aliases: BTreeMap<String, Vec<String>>,
    pub split: SplitSpec,
    pub sigma_grid: Vec<f64>,
    /// Fixed σ; skips cross-validation when set.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    pub folds: usize,
    pub lambda_grid: Vec<f64>,
    pub replicates: usize,
    pub threshold: f64,
    pub alpha: f64,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            input: None,
            out: PathBuf::from("out"),
            aliases: BTreeMap::new(),
            split: SplitSpec::default(),
            sigma_grid: default_sigma_grid(),
            sigma: None,
            folds: 5,
            lambda_grid: default_lambda_grid(),
            replicates: 10_000,
            threshold: 0.5,
            alpha: 1.0,
            seed: 20_200_320,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<()> {
        self.split.validate()?;
        let param = |m: String| Err(Error::Parameter(m));
        if self.folds < 2 {
            return param(format!("folds must be ≥ 2, got {}", self.folds));
        }
        if self.sigma_grid.is_empty() || self.sigma_grid.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return param("σ grid must be nonempty with positive finite values".into());
        }
        if let Some(s) = self.sigma {
            if !(s.is_finite() && s > 0.0) {
                return param(format!("σ must be positive and finite, got {s}"));
            }
        }
        if self.lambda_grid.is_empty() || self.lambda_grid.iter().any(|l| !(l.is_finite() && *l >= 0.0)) {
            return param("λ grid must be nonempty with nonnegative finite values".into());
        }
        if self.replicates == 0 {
            return param("replicates must be ≥ 1".into());
        }
        if !(self.threshold > 0.0 && self.threshold <= 1.0) {
            return param(format!("threshold must lie in (0, 1], got {}", self.threshold));
        }
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return param(format!("alpha must be finite and ≥ 0, got {}", self.alpha));
        }
        Ok(())
    }

    /// SHA-256 over every setting except the input and output paths, so the
    /// same analysis run from different locations hashes identically.
    pub fn hash(&self) -> String {
        let mut view = self.clone();
        view.input = None;
        view.out = PathBuf::new();
        let json = serde_json::to_string(&view).expect("config serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }
}

/// Subordinate seed for one named stream of a run.
pub fn derive_seed(master: u64, stream: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(master.to_le_bytes());
    h.update(stream.as_bytes());
    let d = h.finalize();
    u64::from_le_bytes(d[..8].try_into().expect("digest is 32 bytes"))
}

/// `lo:hi:n` for `n` log-spaced values, or a comma-separated list.
pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let bad = || Error::Usage(format!("cannot parse grid `{text}`; use lo:hi:n or a,b,c"));
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() == 3 {
        let lo: f64 = parts[0].trim().parse().map_err(|_| bad())?;
        let hi: f64 = parts[1].trim().parse().map_err(|_| bad())?;
        let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
        if !(lo > 0.0 && hi >= lo && n >= 1) {
            return Err(bad());
        }
        return Ok(log_grid(lo, hi, n));
    }
    text.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| bad()))
        .collect()
}
