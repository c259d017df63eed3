//! The `whr` command line: `prepare`, `predict`, `learn` and `query`, each
//! reading the previous stage's files from the output directory.

mod config;

pub use config::{derive_seed, parse_grid, RunConfig};

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::bayesnet::text::{parse_net, write_dag, write_net};
use crate::bayesnet::{fit_cpts, DiscreteBayesNet};
use crate::data_pipeline::{filter_countries, impute_with_report, load_raw, split, ColumnMap, FeatureTable};
use crate::discretizer::{discretize, paper_scheme, DiscreteTable, Level};
use crate::error::{Error, Result};
use crate::evaluation::{fit_linear, mae, mse, score, select_ridge_lambda, write_metrics_csv, MetricReport};
use crate::grnn::{self, GrnnModel};
use crate::inference::{query, query_sweep, write_sweep_csv, Evidence};
use crate::structure_search::{bootstrap_learn, consensus, write_dot};
use crate::variables;

#[derive(Debug, Parser)]
#[command(name = "whr", version, about = "World Happiness panel: GRNN prediction and consensus Bayesian networks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// TOML run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory (also where later stages look for earlier outputs).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Master seed.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Filter and impute the raw panel, then discretize it.
    Prepare {
        #[command(flatten)]
        common: Common,
        /// Raw panel CSV.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Train GRNN, OLS, ridge and the mean baseline; score on the test year.
    Predict {
        #[command(flatten)]
        common: Common,
        /// Feature table (default: <out>/features.csv).
        #[arg(long)]
        input: Option<PathBuf>,
        /// Fixed σ instead of cross-validation.
        #[arg(long)]
        sigma: Option<f64>,
        /// σ candidates: `lo:hi:n` (log-spaced) or `a,b,c`.
        #[arg(long)]
        sigma_grid: Option<String>,
        #[arg(long)]
        folds: Option<usize>,
    },
    /// Bootstrap hill climbing, consensus graph and fitted CPTs.
    Learn {
        #[command(flatten)]
        common: Common,
        /// Discretized table (default: <out>/discrete.csv).
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        replicates: Option<usize>,
        #[arg(long)]
        threshold: Option<f64>,
        #[arg(long)]
        alpha: Option<f64>,
    },
    /// Posterior of one variable given evidence, e.g. `query HLE GDP=High`.
    Query {
        #[command(flatten)]
        common: Common,
        /// Query variable (name or short key).
        q: String,
        /// Evidence as VAR=LEVEL.
        evidence: Vec<String>,
        /// Print P(q | var = level) for every level of this variable.
        #[arg(long)]
        sweep: Option<String>,
        /// Network file (default: <out>/consensus_net.txt).
        #[arg(long)]
        net: Option<PathBuf>,
    },
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn base_config(common: &Common) -> Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(o) = &common.out {
        cfg.out = o.clone();
    }
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

pub fn execute(command: Command) -> Result<()> {
    match command {
        Command::Prepare { common, input } => {
            let mut cfg = base_config(&common)?;
            if input.is_some() {
                cfg.input = input;
            }
            cfg.validate()?;
            cmd_prepare(&cfg).map(|_| ())
        }
        Command::Predict { common, input, sigma, sigma_grid, folds } => {
            let mut cfg = base_config(&common)?;
            if let Some(g) = sigma_grid {
                cfg.sigma_grid = parse_grid(&g)?;
            }
            if sigma.is_some() {
                cfg.sigma = sigma;
            }
            if let Some(k) = folds {
                cfg.folds = k;
            }
            cfg.validate()?;
            let features = input.unwrap_or_else(|| cfg.out.join(FEATURES_FILE));
            cmd_predict(&cfg, &features).map(|_| ())
        }
        Command::Learn { common, input, replicates, threshold, alpha } => {
            let mut cfg = base_config(&common)?;
            if let Some(r) = replicates {
                cfg.replicates = r;
            }
            if let Some(t) = threshold {
                cfg.threshold = t;
            }
            if let Some(a) = alpha {
                cfg.alpha = a;
            }
            cfg.validate()?;
            let discrete = input.unwrap_or_else(|| cfg.out.join(DISCRETE_FILE));
            cmd_learn(&cfg, &discrete).map(|_| ())
        }
        Command::Query { common, q, evidence, sweep, net } => {
            let cfg = base_config(&common)?;
            let net_path = net.unwrap_or_else(|| cfg.out.join(NET_FILE));
            let write_to = common.out.as_deref();
            let text = cmd_query(&net_path, &q, &evidence, sweep.as_deref(), write_to)?;
            print!("{text}");
            Ok(())
        }
    }
}

pub const FEATURES_FILE: &str = "features.csv";
pub const DISCRETE_FILE: &str = "discrete.csv";
pub const PROVENANCE_FILE: &str = "provenance.json";
pub const PREDICTIONS_FILE: &str = "predictions.csv";
pub const METRICS_FILE: &str = "metrics.csv";
pub const SCATTER_FILE: &str = "grnn_vs_actual.csv";
pub const SIGMA_CV_FILE: &str = "sigma_cv.csv";
pub const MODEL_FILE: &str = "grnn_model.json";
pub const ARC_STRENGTH_FILE: &str = "arc_strength.csv";
pub const DAG_FILE: &str = "consensus_dag.txt";
pub const DOT_FILE: &str = "consensus.dot";
pub const NET_FILE: &str = "consensus_net.txt";

fn provenance(cfg: &RunConfig, stage: &str) -> Vec<String> {
    vec![format!("whr {} {stage}", env!("CARGO_PKG_VERSION")), format!("config_hash={}", cfg.hash())]
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut w = create(path)?;
    w.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

fn file_sha256(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::io(path, e))
}

/// Summary of a `prepare` run; also written as the provenance record.
#[derive(Debug, Clone, Serialize)]
pub struct PrepareSummary {
    pub raw_rows: usize,
    pub rows: usize,
    pub countries: usize,
    pub imputed_cells: usize,
}

pub fn cmd_prepare(cfg: &RunConfig) -> Result<PrepareSummary> {
    let input = cfg
        .input
        .as_deref()
        .ok_or_else(|| Error::Usage("no input panel given (use --input or `input` in the config)".into()))?;
    let columns = ColumnMap::default().with_aliases(&cfg.aliases)?;
    let raw = load_raw(input, &columns)?;
    let filtered = filter_countries(&raw);
    let (features, report) = impute_with_report(&filtered)?;
    let discrete = discretize(&features, &paper_scheme())?;

    let prov = provenance(cfg, "prepare");
    let out = &cfg.out;
    features.write_csv(create(&out.join(FEATURES_FILE))?, &prov)?;
    discrete.write_csv(create(&out.join(DISCRETE_FILE))?, &prov)?;

    let level_counts = discrete
        .variables
        .iter()
        .map(|v| Ok((v.clone(), discrete.level_counts(v)?)))
        .collect::<Result<std::collections::BTreeMap<_, _>>>()?;
    let summary = PrepareSummary {
        raw_rows: raw.rows.len(),
        rows: features.len(),
        countries: features.country_count(),
        imputed_cells: report.total(),
    };
    let record = json!({
        "config_hash": cfg.hash(),
        "input_sha256": file_sha256(input)?,
        "raw_rows": summary.raw_rows,
        "raw_countries": raw.countries().len(),
        "rows": summary.rows,
        "countries": summary.countries,
        "year_range": features.year_range(),
        "imputation": report,
        "level_counts": level_counts,
    });
    let text = serde_json::to_string_pretty(&record).map_err(|e| Error::Format(e.to_string()))?;
    write_text(&out.join(PROVENANCE_FILE), &(text + "\n"))?;

    println!(
        "prepared {} rows ({} countries) from {} raw rows; {} cells imputed",
        summary.rows, summary.countries, summary.raw_rows, summary.imputed_cells
    );
    Ok(summary)
}

/// Metrics that stay defined when the test targets have no variance: R² is
/// reported as NaN instead of failing the run.
fn metrics_or_nan(predictions: &[f64], actuals: &[f64]) -> Result<MetricReport> {
    match score(predictions, actuals) {
        Err(Error::R2Undefined) => {
            eprintln!("warning: test targets have zero variance; R² reported as NA");
            Ok(MetricReport {
                model_name: String::new(),
                r2: f64::NAN,
                mae: mae(predictions, actuals)?,
                mse: mse(predictions, actuals)?,
            })
        }
        other => other,
    }
}

#[derive(Serialize)]
struct ModelRecord<'a> {
    config_hash: String,
    model: &'a GrnnModel,
}

#[derive(Debug, Clone)]
pub struct PredictSummary {
    pub sigma: f64,
    pub metrics: Vec<MetricReport>,
}

pub fn cmd_predict(cfg: &RunConfig, features_path: &Path) -> Result<PredictSummary> {
    let features = FeatureTable::read_csv(open(features_path)?)?;
    let (train, test) = split(&features, &cfg.split)?;
    let (x_train, y_train) = train.predictors_and_target()?;
    let (x_test, y_test) = test.predictors_and_target()?;
    let predictors = variables::predictor_names();
    let cv_seed = derive_seed(cfg.seed, "cv");

    let (sigma, cv_scores) = match cfg.sigma {
        Some(s) => (s, Vec::new()),
        None => {
            let sel = grnn::select_sigma(&train, &cfg.sigma_grid, cfg.folds, cv_seed)?;
            (sel.sigma, sel.cv_scores)
        }
    };
    let model = grnn::fit(&train, sigma)?;

    let mut columns: Vec<(String, Vec<f64>)> = vec![("GRNN".into(), model.predict_rows(&x_test)?)];
    match fit_linear(&train, 0.0) {
        Ok(ols) => columns.push(("OLS".into(), ols.predict_rows(&x_test))),
        Err(Error::SingularSystem) => eprintln!("warning: OLS normal equations are singular on this training set; OLS omitted"),
        Err(e) => return Err(e),
    }
    let (lambda, _) = select_ridge_lambda(&predictors, &x_train, &y_train, &cfg.lambda_grid, cfg.folds, cv_seed)?;
    match fit_linear(&train, lambda) {
        Ok(ridge) => columns.push(("Ridge".into(), ridge.predict_rows(&x_test))),
        Err(Error::SingularSystem) => eprintln!("warning: ridge system is singular; Ridge omitted"),
        Err(e) => return Err(e),
    }
    let mean = y_train.iter().sum::<f64>() / y_train.len() as f64;
    columns.push(("TrainMean".into(), vec![mean; y_test.len()]));

    let metrics = columns
        .iter()
        .map(|(name, p)| Ok(metrics_or_nan(p, &y_test)?.named(name.clone())))
        .collect::<Result<Vec<_>>>()?;

    let mut prov = provenance(cfg, "predict");
    prov.push(format!("sigma={sigma}"));
    prov.push(format!("ridge_lambda={lambda}"));
    let out = &cfg.out;
    write_metrics_csv(create(&out.join(METRICS_FILE))?, &metrics, &prov)?;

    {
        let path = out.join(PREDICTIONS_FILE);
        let mut w = create(&path)?;
        crate::data_pipeline::write_comments(&mut w, &prov)?;
        let mut csv = csv::Writer::from_writer(w);
        let mut header = vec!["country".to_string(), "year".into(), "actual".into()];
        header.extend(columns.iter().map(|(n, _)| n.clone()));
        csv.write_record(&header)?;
        for (i, row) in test.rows.iter().enumerate() {
            let mut rec = vec![row.country.clone(), row.year.to_string(), format!("{:.6}", y_test[i])];
            rec.extend(columns.iter().map(|(_, p)| format!("{:.6}", p[i])));
            csv.write_record(&rec)?;
        }
        csv.flush().map_err(|e| Error::io(&path, e))?;
    }
    {
        let path = out.join(SCATTER_FILE);
        let mut w = create(&path)?;
        crate::data_pipeline::write_comments(&mut w, &prov)?;
        let mut csv = csv::Writer::from_writer(w);
        csv.write_record(["country", "actual", "predicted"])?;
        for (i, row) in test.rows.iter().enumerate() {
            csv.write_record([row.country.clone(), format!("{:.6}", y_test[i]), format!("{:.6}", columns[0].1[i])])?;
        }
        csv.flush().map_err(|e| Error::io(&path, e))?;
    }
    {
        let path = out.join(SIGMA_CV_FILE);
        let mut w = create(&path)?;
        crate::data_pipeline::write_comments(&mut w, &prov)?;
        let mut csv = csv::Writer::from_writer(w);
        csv.write_record(["sigma", "cv_mse", "selected"])?;
        if cv_scores.is_empty() {
            csv.write_record([format!("{sigma}"), "NA".into(), "true".into()])?;
        }
        for (s, m) in &cv_scores {
            csv.write_record([format!("{s}"), format!("{m:.6}"), (*s == sigma).to_string()])?;
        }
        csv.flush().map_err(|e| Error::io(&path, e))?;
    }
    let record = ModelRecord { config_hash: cfg.hash(), model: &model };
    let text = serde_json::to_string_pretty(&record).map_err(|e| Error::Format(e.to_string()))?;
    write_text(&out.join(MODEL_FILE), &(text + "\n"))?;

    println!("σ = {sigma} ({} training rows, {} test rows)", train.len(), test.len());
    println!("{:<10} {:>9} {:>9} {:>9}", "model", "R2", "MAE", "MSE");
    for m in &metrics {
        println!("{:<10} {:>9.4} {:>9.4} {:>9.4}", m.model_name, m.r2, m.mae, m.mse);
    }
    Ok(PredictSummary { sigma, metrics })
}

/// Reads the discretized table written by `prepare`.
pub fn read_discrete(path: &Path) -> Result<DiscreteTable> {
    DiscreteTable::read_csv(open(path)?)
}

pub fn cmd_learn(cfg: &RunConfig, discrete_path: &Path) -> Result<DiscreteBayesNet> {
    let table = read_discrete(discrete_path)?;
    let data = table.to_data();
    let ast = bootstrap_learn(&data, cfg.replicates, derive_seed(cfg.seed, "bootstrap"))?;
    let dag = consensus(&ast, cfg.threshold)?;
    let net = fit_cpts(&dag, &data, cfg.alpha)?;

    let mut prov = provenance(cfg, "learn");
    prov.push(format!("replicates={} threshold={} alpha={}", cfg.replicates, cfg.threshold, cfg.alpha));
    let out = &cfg.out;
    ast.write_csv(create(&out.join(ARC_STRENGTH_FILE))?, &prov)?;
    write_text(&out.join(DAG_FILE), &write_dag(&dag, &prov)?)?;
    write_text(&out.join(DOT_FILE), &write_dot(&dag, Some(&ast), &prov))?;
    write_text(&out.join(NET_FILE), &write_net(&net, &prov)?)?;

    println!("consensus graph: {} arcs over {} replicates", dag.edge_count(), cfg.replicates);
    for (p, c) in dag.edges() {
        println!("  {} -> {}  (support {:.3})", dag.name(p), dag.name(c), ast.support(p, c));
    }
    Ok(net)
}

/// Maps user input (node name or short key, any case) to a node of `net`.
fn resolve_node<'a>(net: &'a DiscreteBayesNet, input: &str) -> Result<&'a str> {
    let nodes = net.dag().nodes();
    let needle = input.trim();
    let canonical = variables::resolve(needle);
    nodes
        .iter()
        .find(|n| n.eq_ignore_ascii_case(needle) || Some(n.as_str()) == canonical)
        .map(|n| n.as_str())
        .ok_or_else(|| {
            let listed: Vec<String> = nodes
                .iter()
                .map(|n| match variables::spec(n) {
                    Some(s) => format!("{n} ({})", s.short),
                    None => n.clone(),
                })
                .collect();
            Error::Usage(format!("unknown variable `{input}`; valid names: {}", listed.join(", ")))
        })
}

fn parse_level(text: &str) -> Result<Level> {
    text.parse()
        .map_err(|_| Error::Usage(format!("unknown level `{text}`; valid levels: Low, Medium, High")))
}

fn short_key(name: &str) -> &str {
    variables::spec(name).map(|s| s.short).unwrap_or(name)
}

/// Runs a query against the network in `net_path` and returns the text to
/// print. With `sweep`, the table is also written under `write_to` if given.
pub fn cmd_query(
    net_path: &Path,
    q: &str,
    evidence: &[String],
    sweep: Option<&str>,
    write_to: Option<&Path>,
) -> Result<String> {
    let text = std::fs::read_to_string(net_path).map_err(|e| Error::io(net_path, e))?;
    let net = parse_net(&text)?;
    let qn = resolve_node(&net, q)?;
    let mut ev = Evidence::new();
    for item in evidence {
        let (var, level) = item
            .split_once('=')
            .ok_or_else(|| Error::Usage(format!("evidence `{item}` is not VAR=LEVEL")))?;
        ev.insert(resolve_node(&net, var)?, parse_level(level)?)?;
    }

    if let Some(sv) = sweep {
        if !ev.is_empty() {
            return Err(Error::Usage("--sweep uses the swept variable as the only evidence".into()));
        }
        let sn = resolve_node(&net, sv)?;
        let rows = query_sweep(&net, qn, sn)?;
        let prov = vec![
            format!("whr {} query", env!("CARGO_PKG_VERSION")),
            format!("net_sha256={}", hex::encode(Sha256::digest(text.as_bytes()))),
            format!("P({qn} | {sn})"),
        ];
        let mut buf = Vec::new();
        write_sweep_csv(&mut buf, &rows, &prov)?;
        if let Some(dir) = write_to {
            let path = dir.join(format!("sweep_{}_by_{}.csv", short_key(qn), short_key(sn)));
            write_text(&path, std::str::from_utf8(&buf).expect("csv is utf-8"))?;
        }
        return Ok(String::from_utf8(buf).expect("csv is utf-8"));
    }

    let post = query(&net, qn, &ev)?;
    let given: Vec<String> = ev.iter().map(|(v, l)| format!("{v}={l}")).collect();
    let mut out = if given.is_empty() {
        format!("P({qn})\n")
    } else {
        format!("P({qn} | {})\n", given.join(", "))
    };
    for l in Level::ALL {
        out.push_str(&format!("{:<7}{:.6}\n", l.name(), post.p(l)));
    }
    Ok(out)
}
