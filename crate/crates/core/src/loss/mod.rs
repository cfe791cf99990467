//! Multi-parameter loss functions.
//!
//! A [`Loss`] maps a parameter vector `θ = (θ_1, …, θ_l)` and one observation
//! to a real value, and exposes the first and *pure* second partial
//! derivative in each coordinate. The boosting loop never needs cross
//! partials, so none are provided.
//!
//! All built-in losses are negative log-likelihoods except `squared_error`
//! (½(θ − y)²) and the shipped `double_well` counterexample.

mod admissibility;
mod double_well;
mod gamma;
mod negbin;
mod squared;
mod zip;

pub use admissibility::{check_admissibility, AdmissibilityReport, SliceReport, SliceShape};
pub use double_well::DoubleWell;
pub use gamma::GammaNll;
pub use negbin::NegBinNll;
pub use squared::SquaredError;
pub use zip::ZipNll;

use crate::dataset::{Dataset, Observation};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

/// Closed interval `[lo, hi]` a parameter is confined to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParameterDomain {
    pub lo: f64,
    pub hi: f64,
}

impl ParameterDomain {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        let d = ParameterDomain { lo, hi };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if self.lo.is_finite() && self.hi.is_finite() && self.lo < self.hi {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "domain needs finite lo < hi, got [{}, {}]",
                self.lo, self.hi
            )))
        }
    }

    pub fn contains(&self, theta: f64) -> bool {
        self.lo <= theta && theta <= self.hi
    }

    /// `min(hi, max(lo, theta))`.
    pub fn clamp(&self, theta: f64) -> f64 {
        self.hi.min(self.lo.max(theta))
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

impl fmt::Display for ParameterDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// An `l`-parameter per-observation loss.
pub trait Loss: Send + Sync + fmt::Debug {
    /// Registry name, as used in configs and model files.
    fn name(&self) -> &'static str;

    fn param_names(&self) -> &'static [&'static str];

    fn n_params(&self) -> usize {
        self.param_names().len()
    }

    /// Constants fixed for the lifetime of the loss (e.g. a gamma shape).
    fn nuisance(&self) -> BTreeMap<String, f64> {
        BTreeMap::new()
    }

    /// Rejects observations outside the loss's support.
    fn validate_observation(&self, obs: &Observation) -> Result<()>;

    /// Default parameter domains for data like `ds`.
    fn default_domains(&self, ds: &Dataset) -> Vec<ParameterDomain>;

    fn value(&self, theta: &[f64], obs: &Observation) -> f64;

    /// `∂l/∂θ_j`.
    fn grad(&self, j: usize, theta: &[f64], obs: &Observation) -> f64;

    /// `∂²l/∂θ_j²`.
    fn hess(&self, j: usize, theta: &[f64], obs: &Observation) -> f64;

    /// Constant-parameter estimate used to start boosting. Always inside
    /// `default_domains(ds)`.
    fn mle_init(&self, ds: &Dataset) -> Vec<f64>;
}

/// Checks every row of `ds` against the loss's support.
pub fn validate_dataset(loss: &dyn Loss, ds: &Dataset) -> Result<()> {
    for i in 0..ds.n_rows() {
        loss.validate_observation(&ds.observation(i))
            .map_err(|e| Error::Cell {
                row: i + 1,
                column: ds.response_name().to_string(),
                message: e.to_string(),
            })?;
    }
    Ok(())
}

/// Loss value with the support and domain checks applied.
pub fn checked_value(
    loss: &dyn Loss,
    theta: &[f64],
    obs: &Observation,
    domains: &[ParameterDomain],
) -> Result<f64> {
    if theta.len() != loss.n_params() || domains.len() != loss.n_params() {
        return Err(Error::InvalidParameter(format!(
            "{} expects {} parameters",
            loss.name(),
            loss.n_params()
        )));
    }
    loss.validate_observation(obs)?;
    for ((t, d), name) in theta.iter().zip(domains).zip(loss.param_names()) {
        if !d.contains(*t) {
            return Err(Error::InvalidParameter(format!(
                "{name} = {t} outside domain {d}"
            )));
        }
    }
    Ok(loss.value(theta, obs))
}

/// Names accepted by [`loss_by_name`].
pub const LOSS_NAMES: [&str; 5] = ["squared_error", "gamma", "zip", "negbin", "double_well"];

/// Builds a loss from its registry name and nuisance constants.
pub fn loss_by_name(name: &str, nuisance: &BTreeMap<String, f64>) -> Result<Box<dyn Loss>> {
    let allow = |keys: &[&str]| -> Result<()> {
        match nuisance.keys().find(|k| !keys.contains(&k.as_str())) {
            Some(k) => Err(Error::Config(format!(
                "loss `{name}` has no nuisance constant `{k}`"
            ))),
            None => Ok(()),
        }
    };
    let required = |key: &str| -> Result<f64> {
        nuisance
            .get(key)
            .copied()
            .ok_or_else(|| Error::Config(format!("loss `{name}` needs nuisance `{key}`")))
    };
    Ok(match name {
        "squared_error" => {
            allow(&[])?;
            Box::new(SquaredError)
        }
        "gamma" => {
            allow(&["alpha"])?;
            Box::new(GammaNll::new(required("alpha")?)?)
        }
        "zip" => {
            allow(&["alpha"])?;
            Box::new(ZipNll::new(required("alpha")?)?)
        }
        "negbin" => {
            allow(&[])?;
            Box::new(NegBinNll)
        }
        "double_well" => {
            allow(&[])?;
            Box::new(DoubleWell)
        }
        other => return Err(Error::UnknownLoss(other.to_string())),
    })
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn require_count(y: f64) -> Result<()> {
    if y >= 0.0 && y.fract() == 0.0 && y.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "response must be a non-negative integer, got {y}"
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn domain_clamp() {
        let d = ParameterDomain::new(0.01, 1000.0).unwrap();
        assert_eq!(d.clamp(1200.0), 1000.0);
        assert_eq!(d.clamp(5.0), 5.0);
        assert_eq!(d.clamp(-3.0), 0.01);
        assert!(ParameterDomain::new(1.0, 1.0).is_err());
        assert!(ParameterDomain::new(f64::NEG_INFINITY, 1.0).is_err());
    }

    #[test]
    fn registry() {
        let mut nuis = BTreeMap::new();
        assert!(loss_by_name("gamma", &nuis).is_err());
        nuis.insert("alpha".to_string(), 5.0);
        let g = loss_by_name("gamma", &nuis).unwrap();
        assert_eq!(g.name(), "gamma");
        assert_eq!(g.nuisance(), nuis);
        assert!(loss_by_name("negbin", &nuis).is_err());
        assert!(matches!(
            loss_by_name("tweedie", &BTreeMap::new()),
            Err(Error::UnknownLoss(_))
        ));
        for name in LOSS_NAMES {
            let n = match name {
                "gamma" => nuis.clone(),
                "zip" => BTreeMap::from([("alpha".to_string(), 0.5)]),
                _ => BTreeMap::new(),
            };
            assert_eq!(loss_by_name(name, &n).unwrap().name(), name);
        }
    }

    #[test]
    fn checked_value_guards() {
        let g = GammaNll::new(5.0).unwrap();
        let dom = [ParameterDomain::new(0.1, 100.0).unwrap()];
        assert!(checked_value(&g, &[4.0], &Observation::new(4.0), &dom).is_ok());
        assert!(checked_value(&g, &[400.0], &Observation::new(4.0), &dom).is_err());
        assert!(checked_value(&g, &[4.0], &Observation::new(0.0), &dom).is_err());
    }
}
