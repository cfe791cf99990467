use super::{mean, Loss, ParameterDomain};
use crate::dataset::{Dataset, Observation};
use crate::error::{Error, Result};

/// `½(θ − y)²`.
#[derive(Debug, Clone, Copy, Default)]
pub struct SquaredError;

impl Loss for SquaredError {
    fn name(&self) -> &'static str {
        "squared_error"
    }

    fn param_names(&self) -> &'static [&'static str] {
        &["theta"]
    }

    fn validate_observation(&self, obs: &Observation) -> Result<()> {
        if obs.y.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("non-finite response {}", obs.y)))
        }
    }

    fn default_domains(&self, _ds: &Dataset) -> Vec<ParameterDomain> {
        vec![ParameterDomain { lo: -1e9, hi: 1e9 }]
    }

    fn value(&self, theta: &[f64], obs: &Observation) -> f64 {
        let r = theta[0] - obs.y;
        0.5 * r * r
    }

    fn grad(&self, _j: usize, theta: &[f64], obs: &Observation) -> f64 {
        theta[0] - obs.y
    }

    fn hess(&self, _j: usize, _theta: &[f64], _obs: &Observation) -> f64 {
        1.0
    }

    fn mle_init(&self, ds: &Dataset) -> Vec<f64> {
        vec![self.default_domains(ds)[0].clamp(mean(ds.response()))]
    }
}
