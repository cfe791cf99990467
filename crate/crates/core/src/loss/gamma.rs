use super::{mean, Loss, ParameterDomain};
use crate::dataset::{Dataset, Observation};
use crate::error::{Error, Result};
use crate::special::ln_gamma;
use std::collections::BTreeMap;

/// Gamma negative log-likelihood in the mean parameterisation, shape `α`
/// fixed:
///
/// `l(μ; y) = −[α ln α − α ln μ − ln Γ(α) + (α − 1) ln y − α y / μ]`.
///
/// Not convex in `μ` (concave beyond `μ = 2y`) but has a single minimum at
/// `μ = y`.
#[derive(Debug, Clone, Copy)]
pub struct GammaNll {
    alpha: f64,
    // α ln α − ln Γ(α)
    shape_const: f64,
}

impl GammaNll {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "gamma shape alpha must be positive, got {alpha}"
            )));
        }
        Ok(GammaNll {
            alpha,
            shape_const: alpha * alpha.ln() - ln_gamma(alpha),
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

impl Loss for GammaNll {
    fn name(&self) -> &'static str {
        "gamma"
    }

    fn param_names(&self) -> &'static [&'static str] {
        &["mu"]
    }

    fn nuisance(&self) -> BTreeMap<String, f64> {
        BTreeMap::from([("alpha".to_string(), self.alpha)])
    }

    fn validate_observation(&self, obs: &Observation) -> Result<()> {
        if obs.y > 0.0 && obs.y.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "gamma response must be positive, got {}",
                obs.y
            )))
        }
    }

    fn default_domains(&self, ds: &Dataset) -> Vec<ParameterDomain> {
        let m = mean(ds.response());
        let m = if m > 0.0 { m } else { 1.0 };
        vec![ParameterDomain {
            lo: 1e-6 * m,
            hi: 1e6 * m,
        }]
    }

    fn value(&self, theta: &[f64], obs: &Observation) -> f64 {
        let (a, mu, y) = (self.alpha, theta[0], obs.y);
        -(self.shape_const - a * mu.ln() + (a - 1.0) * y.ln() - a * y / mu)
    }

    fn grad(&self, _j: usize, theta: &[f64], obs: &Observation) -> f64 {
        let (a, mu, y) = (self.alpha, theta[0], obs.y);
        a / mu - a * y / (mu * mu)
    }

    fn hess(&self, _j: usize, theta: &[f64], obs: &Observation) -> f64 {
        let (a, mu, y) = (self.alpha, theta[0], obs.y);
        let mu2 = mu * mu;
        -a / mu2 + 2.0 * a * y / (mu2 * mu)
    }

    fn mle_init(&self, ds: &Dataset) -> Vec<f64> {
        vec![self.default_domains(ds)[0].clamp(mean(ds.response()))]
    }
}
