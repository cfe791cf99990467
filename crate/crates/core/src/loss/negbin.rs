use super::{require_count, Loss, ParameterDomain};
use crate::dataset::{Dataset, Observation};
use crate::error::Result;
use crate::special::{digamma_shift_diff, ln_gamma, trigamma_shift_diff};

const BETA_DOMAIN: ParameterDomain = ParameterDomain { lo: 1e-4, hi: 1e4 };
const GAMMA_DOMAIN: ParameterDomain = ParameterDomain { lo: 1e-4, hi: 1e4 };

/// Negative binomial negative log-likelihood in `(β, γ)` with exposure and
/// deductible adjustment. With `r = exposure·γ` and `b = adjustment·β`:
///
/// `l = −[ln Γ(y + r) − ln Γ(r) − ln Γ(y + 1) − r ln(1 + b) + y ln(b / (1 + b))]`
///
/// Mean `r·b`, variance `r·b·(1 + b)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct NegBinNll;

#[inline]
fn shape_and_scale(theta: &[f64], obs: &Observation) -> (f64, f64) {
    (obs.exposure * theta[1], obs.adjustment * theta[0])
}

impl Loss for NegBinNll {
    fn name(&self) -> &'static str {
        "negbin"
    }

    fn param_names(&self) -> &'static [&'static str] {
        &["beta", "gamma"]
    }

    fn validate_observation(&self, obs: &Observation) -> Result<()> {
        require_count(obs.y)
    }

    fn default_domains(&self, _ds: &Dataset) -> Vec<ParameterDomain> {
        vec![BETA_DOMAIN, GAMMA_DOMAIN]
    }

    fn value(&self, theta: &[f64], obs: &Observation) -> f64 {
        let (r, b) = shape_and_scale(theta, obs);
        let y = obs.y;
        let ln_coef = ln_gamma(y + r) - ln_gamma(r) - ln_gamma(y + 1.0);
        let y_term = if y == 0.0 { 0.0 } else { y * b.ln() };
        -ln_coef + (r + y) * b.ln_1p() - y_term
    }

    fn grad(&self, j: usize, theta: &[f64], obs: &Observation) -> f64 {
        let (r, b) = shape_and_scale(theta, obs);
        let y = obs.y;
        match j {
            0 => obs.adjustment * ((r + y) / (1.0 + b) - y / b),
            _ => obs.exposure * (b.ln_1p() - digamma_shift_diff(r, y)),
        }
    }

    fn hess(&self, j: usize, theta: &[f64], obs: &Observation) -> f64 {
        let (r, b) = shape_and_scale(theta, obs);
        let y = obs.y;
        match j {
            0 => {
                let a = obs.adjustment;
                let ob = 1.0 + b;
                a * a * (y / (b * b) - (r + y) / (ob * ob))
            }
            _ => obs.exposure * obs.exposure * trigamma_shift_diff(r, y),
        }
    }

    /// Method of moments with exposure/adjustment weighting:
    /// `m = Σy / Σ(e·a)` estimates `γβ`,
    /// `β₀ = [Σ(y − e·a·m)² − m·Σ(e·a)] / (m·Σ(e·a²))`, `γ₀ = m / β₀`,
    /// each clamped into its domain.
    fn mle_init(&self, ds: &Dataset) -> Vec<f64> {
        let (y, e, a) = (ds.response(), ds.exposure(), ds.adjustment());
        let sum_ea: f64 = e.iter().zip(a).map(|(e, a)| e * a).sum();
        let sum_eaa: f64 = e.iter().zip(a).map(|(e, a)| e * a * a).sum();
        let m = y.iter().sum::<f64>() / sum_ea;
        if !(m > 0.0) {
            return vec![BETA_DOMAIN.lo, GAMMA_DOMAIN.lo];
        }
        let ss: f64 = y
            .iter()
            .zip(e.iter().zip(a))
            .map(|(y, (e, a))| (y - e * a * m).powi(2))
            .sum();
        let beta = BETA_DOMAIN.clamp((ss - m * sum_ea) / (m * sum_eaa));
        let gamma = GAMMA_DOMAIN.clamp(m / beta);
        vec![beta, gamma]
    }
}
