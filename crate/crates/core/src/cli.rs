//! Command-line front end.
//!
//! Exit codes: 0 success, 1 admissibility check failed, 2 invalid input or
//! configuration, 3 numerical failure, 4 I/O failure.

use crate::booster::{train, ParamTrainConfig, TrainConfig, TrainOutcome};
use crate::dataset::{
    generate_synthetic, load_csv, load_feature_rows, split_holdout, write_csv, CsvColumns,
    Distribution, ParamMap, SyntheticSpec,
};
use crate::error::{Error, Result};
use crate::eval::nll_score_as;
use crate::loss::{check_admissibility, loss_by_name, Loss, ParameterDomain};
use crate::model_io;
use crate::predict;
use crate::tree::TreeParams;
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

/// Exit code of a completed admissibility scan that found a violation.
pub const EXIT_CHECK_FAILED: i32 = 1;

#[derive(Debug, Parser)]
#[command(name = "gxboost", version, about = "Gradient tree boosting for non-convex and multi-parameter likelihoods")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train a model from a CSV file and a JSON run configuration.
    Train(TrainArgs),
    /// Write per-row parameter estimates of a saved model.
    Predict(PredictArgs),
    /// Score a saved model by total negative log-likelihood.
    Eval(EvalArgs),
    /// Scan a loss for the single-minimum / monotone slice conditions.
    CheckLoss(CheckLossArgs),
    /// Generate a synthetic dataset.
    Gen(GenArgs),
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Training data (CSV with header).
    #[arg(long)]
    pub data: PathBuf,
    /// Run configuration (JSON).
    #[arg(long)]
    pub config: PathBuf,
    /// Output model file.
    #[arg(long)]
    pub out: PathBuf,
    /// Per-round training loss CSV; overrides the config's `trace`.
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// CSV containing the model's feature columns; other columns are ignored.
    #[arg(long)]
    pub data: PathBuf,
    /// Output CSV with one column per parameter.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    /// Response column.
    #[arg(long, default_value = "y")]
    pub response: String,
    #[arg(long)]
    pub exposure: Option<String>,
    #[arg(long)]
    pub adjustment: Option<String>,
    /// Also write the report as JSON.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CheckLossArgs {
    /// squared_error, gamma, zip, negbin or double_well.
    #[arg(long)]
    pub loss: String,
    /// Nuisance constants as `name=value`, comma separated or repeated.
    #[arg(long, value_delimiter = ',')]
    pub nuisance: Vec<String>,
    /// Response values to scan, comma separated.
    #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
    pub y_samples: Vec<f64>,
    /// Grid points per slice (≥ 100).
    #[arg(long, default_value_t = 1000)]
    pub grid: usize,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// gamma, zip or negbin.
    #[arg(long)]
    pub dist: String,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub seed: u64,
    /// `name=v` for a constant or `name=v00|v01|v10|v11` for quadrant values
    /// indexed by `(x1 ≥ 0.5, x2 ≥ 0.5)`, comma separated, one per parameter.
    #[arg(long)]
    pub params: String,
    /// Exposure levels drawn uniformly per row, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub exposure_levels: Option<Vec<f64>>,
    /// Adjustment levels drawn uniformly per row, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub adjustment_levels: Option<Vec<f64>>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LossConfig {
    pub name: String,
    #[serde(default)]
    pub nuisance: BTreeMap<String, f64>,
}

fn default_response() -> String {
    "y".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ColumnConfig {
    #[serde(default = "default_response")]
    pub response: String,
    #[serde(default)]
    pub exposure: Option<String>,
    #[serde(default)]
    pub adjustment: Option<String>,
}

impl Default for ColumnConfig {
    fn default() -> Self {
        ColumnConfig {
            response: default_response(),
            exposure: None,
            adjustment: None,
        }
    }
}

/// Hyperparameters of one loss parameter. Omitted fields take the defaults
/// of [`ParamTrainConfig`] and [`TreeParams`]; `rounds` defaults to
/// `total_rounds`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamBlock {
    pub eta: f64,
    #[serde(default)]
    pub rounds: Option<usize>,
    #[serde(default)]
    pub interval: Option<usize>,
    #[serde(default)]
    pub offset: Option<usize>,
    #[serde(default)]
    pub clip_m: Option<f64>,
    #[serde(default)]
    pub a: Option<f64>,
    #[serde(default)]
    pub gamma_reg: Option<f64>,
    #[serde(default)]
    pub lambda_reg: Option<f64>,
    #[serde(default)]
    pub max_depth: Option<usize>,
    #[serde(default)]
    pub min_leaf_samples: Option<usize>,
    #[serde(default)]
    pub domain: Option<ParameterDomain>,
    #[serde(default)]
    pub init: Option<f64>,
}

impl ParamBlock {
    fn to_train_config(&self, total_rounds: usize) -> ParamTrainConfig {
        let d = TreeParams::default();
        let mut p = ParamTrainConfig::new(self.eta, self.rounds.unwrap_or(total_rounds))
            .with_tree(TreeParams {
                gamma_reg: self.gamma_reg.unwrap_or(d.gamma_reg),
                lambda_reg: self.lambda_reg.unwrap_or(d.lambda_reg),
                a: self.a.unwrap_or(d.a),
                max_depth: self.max_depth.unwrap_or(d.max_depth),
                min_leaf_samples: self.min_leaf_samples.unwrap_or(d.min_leaf_samples),
            })
            .with_schedule(self.interval.unwrap_or(1), self.offset.unwrap_or(0));
        if let Some(m) = self.clip_m {
            p = p.with_clip_m(m);
        }
        p.domain = self.domain;
        p.init = self.init;
        p
    }
}

fn default_true() -> bool {
    true
}

/// Contents of a `--config` file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Free text, ignored.
    #[serde(default)]
    pub description: Option<String>,
    pub loss: LossConfig,
    #[serde(default)]
    pub columns: ColumnConfig,
    /// Keyed by parameter name; every parameter of the loss must appear.
    pub params: BTreeMap<String, ParamBlock>,
    pub total_rounds: usize,
    /// Seed of the holdout split.
    #[serde(default)]
    pub seed: u64,
    /// Fraction of rows held out and scored after training.
    #[serde(default)]
    pub holdout_fraction: Option<f64>,
    #[serde(default)]
    pub trace: Option<PathBuf>,
    #[serde(default = "default_true")]
    pub record_trace: bool,
}

/// A configuration checked against its loss.
#[derive(Debug)]
pub struct ValidatedRun {
    pub loss: Box<dyn Loss>,
    pub train: TrainConfig,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<ValidatedRun> {
        let loss = loss_by_name(&self.loss.name, &self.loss.nuisance)?;
        let names = loss.param_names();
        if let Some(extra) = self.params.keys().find(|k| !names.contains(&k.as_str())) {
            return Err(Error::Config(format!(
                "loss `{}` has no parameter `{extra}` (parameters: {})",
                loss.name(),
                names.join(", ")
            )));
        }
        let mut params = Vec::with_capacity(names.len());
        for name in names {
            let block = self.params.get(*name).ok_or_else(|| {
                Error::Config(format!("missing block for parameter `{name}` in `params`"))
            })?;
            params.push(block.to_train_config(self.total_rounds));
        }
        if let Some(f) = self.holdout_fraction {
            if !(f > 0.0 && f < 1.0) {
                return Err(Error::Config(format!("holdout_fraction must lie in (0, 1), got {f}")));
            }
        }
        let mut train = TrainConfig::new(params, self.total_rounds);
        train.record_trace = self.record_trace || self.trace.is_some();
        train.validate(loss.as_ref())?;
        Ok(ValidatedRun { loss, train })
    }

    pub fn columns(&self) -> CsvColumns<'_> {
        CsvColumns {
            response: &self.columns.response,
            exposure: self.columns.exposure.as_deref(),
            adjustment: self.columns.adjustment.as_deref(),
        }
    }
}

/// Parses arguments and runs the command, writing to stdout and stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with(args, &mut std::io::stdout(), &mut std::io::stderr())
}

/// [`run`] with explicit output streams.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    let result = match &cli.command {
        Command::Train(a) => cmd_train(a),
        Command::Predict(a) => cmd_predict(a),
        Command::Eval(a) => cmd_eval(a),
        Command::CheckLoss(a) => cmd_check_loss(a),
        Command::Gen(a) => cmd_gen(a),
    };
    match result {
        Ok((text, code)) => {
            let _ = out.write_all(text.as_bytes());
            code
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

type CmdResult = Result<(String, i32)>;

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// `round,active_<param>…,train_nll` with one line per round.
pub fn trace_csv(outcome: &TrainOutcome) -> String {
    let mut s = String::from("round");
    for p in &outcome.model.params {
        let _ = write!(s, ",active_{}", p.name);
    }
    s.push_str(",train_nll\n");
    for r in &outcome.trace {
        let _ = write!(s, "{}", r.round);
        for &a in &r.active {
            let _ = write!(s, ",{}", u8::from(a));
        }
        let _ = writeln!(s, ",{}", r.train_nll);
    }
    s
}

fn cmd_train(a: &TrainArgs) -> CmdResult {
    let mut cfg = RunConfig::load(&a.config)?;
    if a.trace.is_some() {
        cfg.trace = a.trace.clone();
    }
    let run = cfg.validate()?;
    let ds = load_csv(&a.data, &cfg.columns())?;
    let (train_ds, holdout) = match cfg.holdout_fraction {
        Some(f) => {
            let (t, h) = split_holdout(&ds, f, cfg.seed)?;
            (t, Some(h))
        }
        None => (ds, None),
    };
    let outcome = train(&train_ds, run.loss.as_ref(), &run.train)?;
    model_io::save(&outcome.model, &a.out)?;
    if let Some(path) = &cfg.trace {
        write_file(path, &trace_csv(&outcome))?;
    }

    let mut text = String::new();
    let _ = writeln!(
        text,
        "trained {} ({} rows, {} rounds, {} trees) -> {}",
        outcome.model.loss_name,
        train_ds.n_rows(),
        cfg.total_rounds,
        outcome.model.n_trees(),
        a.out.display()
    );
    let final_nll = outcome.trace.last().map_or(outcome.initial_nll, |r| r.train_nll);
    let _ = writeln!(text, "final train NLL: {final_nll}");
    if let Some(h) = holdout {
        let r = nll_score_as(&outcome.model, run.loss.as_ref(), &h, "model")?;
        let _ = writeln!(text, "holdout NLL: {} ({} rows)", r.total_nll, r.n);
    }
    Ok((text, 0))
}

fn cmd_predict(a: &PredictArgs) -> CmdResult {
    let model = model_io::load(&a.model)?;
    let rows = load_feature_rows(&a.data, &model.feature_names)?;
    let mut s = model.param_names().join(",");
    s.push('\n');
    for x in &rows {
        let theta = predict(&model, x)?;
        let cells: Vec<String> = theta.iter().map(|v| v.to_string()).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    write_file(&a.out, &s)?;
    Ok((format!("wrote {} rows to {}\n", rows.len(), a.out.display()), 0))
}

fn cmd_eval(a: &EvalArgs) -> CmdResult {
    let model = model_io::load(&a.model)?;
    let loss = model.loss()?;
    let cols = CsvColumns {
        response: &a.response,
        exposure: a.exposure.as_deref(),
        adjustment: a.adjustment.as_deref(),
    };
    let ds = load_csv(&a.data, &cols)?;
    let id = a.model.display().to_string();
    let report = nll_score_as(&model, loss.as_ref(), &ds, &id)?;
    if let Some(path) = &a.json {
        write_file(path, &report.to_json())?;
    }
    Ok((report.to_text(), 0))
}

/// Parses `name=value` pairs.
pub fn parse_nuisance(items: &[String]) -> Result<BTreeMap<String, f64>> {
    let mut map = BTreeMap::new();
    for item in items.iter().filter(|s| !s.trim().is_empty()) {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("nuisance `{item}` is not name=value")))?;
        let v: f64 = v
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("nuisance `{item}` has a non-numeric value")))?;
        if map.insert(k.trim().to_string(), v).is_some() {
            return Err(Error::Config(format!("nuisance `{}` given twice", k.trim())));
        }
    }
    Ok(map)
}

fn cmd_check_loss(a: &CheckLossArgs) -> CmdResult {
    let loss = loss_by_name(&a.loss, &parse_nuisance(&a.nuisance)?)?;
    let report = check_admissibility(loss.as_ref(), &a.y_samples, a.grid)?;
    let mut text = String::new();
    for s in &report.slices {
        let _ = writeln!(text, "y={} {} on {}: {}", s.y, s.param, s.domain, s.shape);
    }
    let passed = report.passed();
    let _ = writeln!(text, "{}: {}", report.loss, if passed { "PASS" } else { "FAIL" });
    Ok((text, if passed { 0 } else { EXIT_CHECK_FAILED }))
}

/// Parses `name=v` or `name=v00|v01|v10|v11` for each parameter of `dist`.
pub fn parse_param_map(dist: Distribution, text: &str) -> Result<ParamMap> {
    let names = dist.param_names();
    let mut values: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for item in text.split(',').filter(|s| !s.trim().is_empty()) {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("parameter `{item}` is not name=value")))?;
        let k = k.trim();
        let name = names
            .iter()
            .find(|n| **n == k)
            .ok_or_else(|| Error::Config(format!("{dist} has no parameter `{k}` (parameters: {})", names.join(", "))))?;
        let vals = v
            .split('|')
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| Error::Config(format!("parameter `{item}` has a non-numeric value")))?;
        if vals.len() != 1 && vals.len() != 4 {
            return Err(Error::Config(format!("parameter `{k}` needs 1 or 4 values, got {}", vals.len())));
        }
        values.insert(name, vals);
    }
    let cols: Vec<&Vec<f64>> = names
        .iter()
        .map(|n| values.get(n).ok_or_else(|| Error::Config(format!("missing parameter `{n}`"))))
        .collect::<Result<_>>()?;
    if cols.iter().all(|v| v.len() == 1) {
        return Ok(ParamMap::Constant(cols.iter().map(|v| v[0]).collect()));
    }
    let cell = |c: usize| cols.iter().map(|v| if v.len() == 1 { v[0] } else { v[c] }).collect();
    Ok(ParamMap::Quadrants {
        split: (0.5, 0.5),
        cells: [cell(0), cell(1), cell(2), cell(3)],
    })
}

fn cmd_gen(a: &GenArgs) -> CmdResult {
    let dist: Distribution = a.dist.parse()?;
    let mut spec = SyntheticSpec::new(dist, a.n, a.seed, parse_param_map(dist, &a.params)?);
    if let Some(l) = &a.exposure_levels {
        spec = spec.exposure_levels(l.clone());
    }
    if let Some(l) = &a.adjustment_levels {
        spec = spec.adjustment_levels(l.clone());
    }
    let ds = generate_synthetic(&spec)?;
    write_csv(&ds, &a.out)?;
    Ok((format!("wrote {} rows to {}\n", ds.n_rows(), a.out.display()), 0))
}
