use super::{mean, Loss, ParameterDomain};
use crate::dataset::{Dataset, Observation};
use crate::error::{Error, Result};

/// `((θ − y)² − 1)²`: two minima at `y ± 1`. Ships as a known-inadmissible
/// loss for exercising the admissibility scan; do not train with it.
#[derive(Debug, Clone, Copy, Default)]
pub struct DoubleWell;

impl Loss for DoubleWell {
    fn name(&self) -> &'static str {
        "double_well"
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

    fn default_domains(&self, ds: &Dataset) -> Vec<ParameterDomain> {
        let (lo, hi) = ds
            .response()
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &y| (l.min(y), h.max(y)));
        vec![ParameterDomain {
            lo: lo - 3.0,
            hi: hi + 3.0,
        }]
    }

    fn value(&self, theta: &[f64], obs: &Observation) -> f64 {
        let d = theta[0] - obs.y;
        let w = d * d - 1.0;
        w * w
    }

    fn grad(&self, _j: usize, theta: &[f64], obs: &Observation) -> f64 {
        let d = theta[0] - obs.y;
        4.0 * d * (d * d - 1.0)
    }

    fn hess(&self, _j: usize, theta: &[f64], obs: &Observation) -> f64 {
        let d = theta[0] - obs.y;
        12.0 * d * d - 4.0
    }

    fn mle_init(&self, ds: &Dataset) -> Vec<f64> {
        vec![mean(ds.response())]
    }
}
