//! Boosting loop for one or several loss parameters.
//!
//! Each parameter `θ_j` gets its own additive ensemble. In every round the
//! gradient statistics of all parameters scheduled for that round are taken
//! at the same point `θ̂⁽ᵗ⁻¹⁾`; the parameters are then updated one after the
//! other in index order:
//!
//! ```text
//! g̃ = clip(∂_j l, M_j)     h̃ = max(0, ∂²_j l)
//! θ̂_j ← clamp(θ̂_j + η_j · f_t(x), domain_j)
//! ```

use crate::dataset::{Dataset, Observation};
use crate::error::{Error, Result};
use crate::loss::{loss_by_name, validate_dataset, Loss, ParameterDomain};
use crate::tree::{build_tree_sorted, FeatureOrder, GradPair, RegressionTree, TreeParams};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// `g` restricted to `[−m, m]`. Non-finite `g` maps to `±m` by sign, and NaN
/// maps to `+m`.
pub fn clip_gradient(g: f64, m: f64) -> f64 {
    if g.is_nan() {
        m
    } else {
        g.clamp(-m, m)
    }
}

/// `max(0, h)`; non-finite `h` maps to 0.
pub fn effective_hessian(h: f64) -> f64 {
    if h.is_finite() {
        h.max(0.0)
    } else {
        0.0
    }
}

/// `min(hi, max(lo, theta))`.
pub fn clamp_to_domain(theta: f64, domain: &ParameterDomain) -> f64 {
    domain.clamp(theta)
}

fn default_clip_m() -> f64 {
    1e4
}

fn default_interval() -> usize {
    1
}

/// Training settings for one parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamTrainConfig {
    /// Learning rate η in (0, 1].
    pub eta: f64,
    /// Maximum number of trees for this parameter.
    pub rounds: usize,
    /// Gradient clipping threshold M.
    #[serde(default = "default_clip_m")]
    pub clip_m: f64,
    #[serde(default)]
    pub tree: TreeParams,
    /// The parameter is trained on rounds `t` (0-based) with
    /// `t % interval == offset`.
    #[serde(default = "default_interval")]
    pub interval: usize,
    #[serde(default)]
    pub offset: usize,
    /// Replaces the loss's default domain.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<ParameterDomain>,
    /// Replaces the loss's `mle_init` value.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub init: Option<f64>,
}

impl ParamTrainConfig {
    pub fn new(eta: f64, rounds: usize) -> Self {
        ParamTrainConfig {
            eta,
            rounds,
            clip_m: default_clip_m(),
            tree: TreeParams::default(),
            interval: 1,
            offset: 0,
            domain: None,
            init: None,
        }
    }

    pub fn with_tree(mut self, tree: TreeParams) -> Self {
        self.tree = tree;
        self
    }

    pub fn with_clip_m(mut self, m: f64) -> Self {
        self.clip_m = m;
        self
    }

    pub fn with_schedule(mut self, interval: usize, offset: usize) -> Self {
        self.interval = interval;
        self.offset = offset;
        self
    }

    pub fn with_domain(mut self, domain: ParameterDomain) -> Self {
        self.domain = Some(domain);
        self
    }

    pub fn with_init(mut self, init: f64) -> Self {
        self.init = Some(init);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::InvalidParameter(m));
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return fail(format!("eta must lie in (0, 1], got {}", self.eta));
        }
        if !(self.clip_m > 0.0) {
            return fail(format!("clip_m must be positive, got {}", self.clip_m));
        }
        if self.interval == 0 {
            return fail("interval must be ≥ 1".into());
        }
        if self.offset >= self.interval {
            return fail(format!(
                "offset {} must be below interval {}",
                self.offset, self.interval
            ));
        }
        if let Some(d) = &self.domain {
            d.validate()?;
        }
        if let Some(v) = self.init {
            if !v.is_finite() {
                return fail(format!("init must be finite, got {v}"));
            }
        }
        self.tree.validate()
    }

    fn active(&self, round: usize, fitted: usize) -> bool {
        fitted < self.rounds && round % self.interval == self.offset
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    /// One entry per loss parameter, in parameter order.
    pub params: Vec<ParamTrainConfig>,
    pub total_rounds: usize,
    /// Compute the training loss after every round. Also enables the
    /// non-finite loss abort.
    #[serde(default = "default_true")]
    pub record_trace: bool,
}

fn default_true() -> bool {
    true
}

impl TrainConfig {
    pub fn new(params: Vec<ParamTrainConfig>, total_rounds: usize) -> Self {
        TrainConfig {
            params,
            total_rounds,
            record_trace: true,
        }
    }

    pub fn validate(&self, loss: &dyn Loss) -> Result<()> {
        if self.params.len() != loss.n_params() {
            return Err(Error::Config(format!(
                "loss `{}` has {} parameters ({}), config has {} parameter blocks",
                loss.name(),
                loss.n_params(),
                loss.param_names().join(", "),
                self.params.len()
            )));
        }
        for (p, name) in self.params.iter().zip(loss.param_names()) {
            p.validate()
                .map_err(|e| Error::Config(format!("parameter `{name}`: {e}")))?;
        }
        Ok(())
    }
}

/// The ensemble of one parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamEnsemble {
    pub name: String,
    pub base: f64,
    pub domain: ParameterDomain,
    /// Trees with the learning rate they were fitted with.
    pub trees: Vec<(RegressionTree, f64)>,
}

impl ParamEnsemble {
    /// Replays the ensemble on `x`, clamping after every tree exactly as the
    /// training path did.
    pub fn predict(&self, x: &[f64]) -> f64 {
        self.trees.iter().fold(self.base, |theta, (tree, eta)| {
            self.domain.clamp(theta + eta * tree.predict(x))
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoostedModel {
    pub loss_name: String,
    pub nuisance: BTreeMap<String, f64>,
    pub feature_names: Vec<String>,
    pub params: Vec<ParamEnsemble>,
}

impl BoostedModel {
    /// Model with no trees: every prediction equals `base`.
    pub fn constant(
        loss: &dyn Loss,
        feature_names: Vec<String>,
        base: Vec<f64>,
        domains: Vec<ParameterDomain>,
    ) -> Self {
        BoostedModel {
            loss_name: loss.name().to_string(),
            nuisance: loss.nuisance(),
            feature_names,
            params: loss
                .param_names()
                .iter()
                .zip(base.into_iter().zip(domains))
                .map(|(name, (b, d))| ParamEnsemble {
                    name: name.to_string(),
                    base: d.clamp(b),
                    domain: d,
                    trees: Vec::new(),
                })
                .collect(),
        }
    }

    pub fn n_params(&self) -> usize {
        self.params.len()
    }

    pub fn param_names(&self) -> Vec<&str> {
        self.params.iter().map(|p| p.name.as_str()).collect()
    }

    pub fn n_trees(&self) -> usize {
        self.params.iter().map(|p| p.trees.len()).sum()
    }

    /// Rebuilds the loss this model was trained with.
    pub fn loss(&self) -> Result<Box<dyn Loss>> {
        loss_by_name(&self.loss_name, &self.nuisance)
    }

    /// Short identifier: loss name plus a hash of the serialized model.
    pub fn identity(&self) -> String {
        use sha2::{Digest, Sha256};
        let text = crate::model_io::to_string(self);
        let digest = Sha256::digest(text.as_bytes());
        let hex: String = digest.iter().take(8).map(|b| format!("{b:02x}")).collect();
        format!("{}:{hex}", self.loss_name)
    }

    fn arity_error(&self, got: usize) -> Error {
        Error::Arity {
            expected: self.feature_names.len(),
            got,
            names: self.feature_names.join(", "),
        }
    }

    /// Checks that `ds` carries the model's feature columns in order.
    pub fn check_features(&self, ds: &Dataset) -> Result<()> {
        if ds.n_features() != self.feature_names.len() {
            return Err(self.arity_error(ds.n_features()));
        }
        if ds.feature_names() != self.feature_names.as_slice() {
            return Err(Error::Dataset(format!(
                "feature columns [{}] do not match model features [{}]",
                ds.feature_names().join(", "),
                self.feature_names.join(", ")
            )));
        }
        Ok(())
    }

    /// Parameter estimates for every row of `ds`, row-major.
    pub fn predict_dataset(&self, ds: &Dataset) -> Result<Vec<Vec<f64>>> {
        self.check_features(ds)?;
        Ok((0..ds.n_rows())
            .into_par_iter()
            .map(|i| {
                let x = ds.row(i);
                self.params.iter().map(|p| p.predict(&x)).collect()
            })
            .collect())
    }
}

/// Parameter estimates for one feature vector.
pub fn predict(model: &BoostedModel, x: &[f64]) -> Result<Vec<f64>> {
    if x.len() != model.feature_names.len() {
        return Err(model.arity_error(x.len()));
    }
    Ok(model.params.iter().map(|p| p.predict(x)).collect())
}

/// One line of the training trace.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundRecord {
    /// 1-based round number.
    pub round: usize,
    /// Whether each parameter was fitted this round.
    pub active: Vec<bool>,
    /// `Σ_i l(θ̂_i, y_i)` after the round; NaN when tracing is off.
    pub train_nll: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: BoostedModel,
    /// Training loss at the initial constant values (NaN when tracing is off).
    pub initial_nll: f64,
    pub trace: Vec<RoundRecord>,
    /// Final training path `θ̂_j,i`, indexed `[j][i]`.
    pub fitted: Vec<Vec<f64>>,
}

/// What an observer sees after each parameter update.
#[derive(Debug)]
pub struct UpdateEvent<'a> {
    /// 1-based round number.
    pub round: usize,
    pub param: usize,
    /// The clipped statistics the tree was grown on.
    pub grads: &'a [GradPair],
    pub tree: &'a RegressionTree,
    /// `θ̂_j` for every row after the update.
    pub theta: &'a [f64],
}

/// Fits one ensemble per loss parameter.
pub fn train(ds: &Dataset, loss: &dyn Loss, config: &TrainConfig) -> Result<TrainOutcome> {
    train_with_observer(ds, loss, config, |_| {})
}

/// [`train`], calling `observe` after every tree is fitted and applied.
pub fn train_with_observer(
    ds: &Dataset,
    loss: &dyn Loss,
    config: &TrainConfig,
    mut observe: impl FnMut(&UpdateEvent<'_>),
) -> Result<TrainOutcome> {
    config.validate(loss)?;
    validate_dataset(loss, ds)?;
    let l = loss.n_params();
    let n = ds.n_rows();

    let domains: Vec<ParameterDomain> = loss
        .default_domains(ds)
        .into_iter()
        .zip(&config.params)
        .map(|(d, p)| p.domain.unwrap_or(d))
        .collect();
    let init = loss.mle_init(ds);
    let mut base = Vec::with_capacity(l);
    for (j, p) in config.params.iter().enumerate() {
        let b = match p.init {
            Some(v) if !domains[j].contains(v) => {
                return Err(Error::Config(format!(
                    "init {v} for `{}` lies outside its domain {}",
                    loss.param_names()[j],
                    domains[j]
                )))
            }
            Some(v) => v,
            None => domains[j].clamp(init[j]),
        };
        base.push(b);
    }

    let mut model = BoostedModel::constant(loss, ds.feature_names().to_vec(), base.clone(), domains.clone());
    let mut theta: Vec<Vec<f64>> = base.iter().map(|&b| vec![b; n]).collect();
    let observations: Vec<Observation> = (0..n).map(|i| ds.observation(i)).collect();
    let order = FeatureOrder::new(ds);
    let rows: Vec<usize> = (0..n).collect();

    let initial_nll = if config.record_trace {
        let v = total_loss(loss, &theta, &observations);
        if !v.is_finite() {
            return Err(Error::NonFiniteLoss { round: 0 });
        }
        v
    } else {
        f64::NAN
    };

    let mut trace = Vec::with_capacity(config.total_rounds);
    for t in 0..config.total_rounds {
        let active: Vec<bool> = config
            .params
            .iter()
            .zip(&model.params)
            .map(|(p, e)| p.active(t, e.trees.len()))
            .collect();
        let grads = gradient_statistics(loss, &theta, &observations, &active, &config.params);

        for j in 0..l {
            let Some(g) = &grads[j] else {
                continue;
            };
            let p = &config.params[j];
            let fit = build_tree_sorted(g, ds, &order, &rows, &p.tree)?;
            let dom = domains[j];
            for (th, w) in theta[j].iter_mut().zip(&fit.row_values) {
                *th = dom.clamp(*th + p.eta * w);
                assert!(dom.contains(*th), "training path left its domain");
            }
            observe(&UpdateEvent {
                round: t + 1,
                param: j,
                grads: g,
                tree: &fit.tree,
                theta: &theta[j],
            });
            model.params[j].trees.push((fit.tree, p.eta));
        }

        let train_nll = if config.record_trace {
            let v = total_loss(loss, &theta, &observations);
            if !v.is_finite() {
                return Err(Error::NonFiniteLoss { round: t + 1 });
            }
            v
        } else {
            f64::NAN
        };
        trace.push(RoundRecord {
            round: t + 1,
            active,
            train_nll,
        });
    }

    Ok(TrainOutcome {
        model,
        initial_nll,
        trace,
        fitted: theta,
    })
}

// All active parameters are differentiated at the same θ̂⁽ᵗ⁻¹⁾.
fn gradient_statistics(
    loss: &dyn Loss,
    theta: &[Vec<f64>],
    obs: &[Observation],
    active: &[bool],
    params: &[ParamTrainConfig],
) -> Vec<Option<Vec<GradPair>>> {
    let l = theta.len();
    let per_row: Vec<Vec<GradPair>> = (0..obs.len())
        .into_par_iter()
        .map_init(
            || vec![0.0; l],
            |buf, i| {
                for j in 0..l {
                    buf[j] = theta[j][i];
                }
                (0..l)
                    .filter(|&j| active[j])
                    .map(|j| {
                        GradPair::new(
                            clip_gradient(loss.grad(j, buf, &obs[i]), params[j].clip_m),
                            effective_hessian(loss.hess(j, buf, &obs[i])),
                        )
                    })
                    .collect()
            },
        )
        .collect();
    let mut out = Vec::with_capacity(l);
    let mut k = 0;
    for &is_active in active {
        if is_active {
            out.push(Some(per_row.iter().map(|r| r[k]).collect()));
            k += 1;
        } else {
            out.push(None);
        }
    }
    out
}

fn total_loss(loss: &dyn Loss, theta: &[Vec<f64>], obs: &[Observation]) -> f64 {
    let l = theta.len();
    let values: Vec<f64> = (0..obs.len())
        .into_par_iter()
        .map_init(
            || vec![0.0; l],
            |buf, i| {
                for j in 0..l {
                    buf[j] = theta[j][i];
                }
                loss.value(buf, &obs[i])
            },
        )
        .collect();
    values.iter().sum()
}
