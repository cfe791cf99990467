use super::{mean, require_count, Loss, ParameterDomain};
use crate::dataset::{Dataset, Observation};
use crate::error::{Error, Result};
use crate::special::ln_gamma;
use std::collections::BTreeMap;

/// Zero-inflated Poisson negative log-likelihood in the mean
/// parameterisation `μ = αλ`, with the Poisson weight `α ∈ (0, 1]` fixed:
///
/// * `y = 0`: `−ln[(1 − α) + α e^{−μ/α}]`
/// * `y > 0`: `−ln[α (μ/α)^y e^{−μ/α} / y!]`
///
/// For `y = 0` the loss increases strictly in `μ` with no interior minimum.
#[derive(Debug, Clone, Copy)]
pub struct ZipNll {
    alpha: f64,
    ln_alpha: f64,
    ln_one_minus_alpha: f64,
}

impl ZipNll {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "zip mixing weight alpha must lie in (0, 1], got {alpha}"
            )));
        }
        Ok(ZipNll {
            alpha,
            ln_alpha: alpha.ln(),
            ln_one_minus_alpha: (1.0 - alpha).ln(),
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    // −ln[(1 − α) + α e^{−μ/α}], evaluated without under/overflow.
    fn zero_value(&self, mu: f64) -> f64 {
        let a = self.ln_one_minus_alpha;
        let b = self.ln_alpha - mu / self.alpha;
        let (hi, lo) = if a > b { (a, b) } else { (b, a) };
        -(hi + (lo - hi).exp().ln_1p())
    }

    // Posterior weight of the Poisson component given y = 0:
    // α e^{−μ/α} / [(1 − α) + α e^{−μ/α}].
    fn zero_weight(&self, mu: f64) -> f64 {
        if self.alpha == 1.0 {
            return 1.0;
        }
        1.0 / (1.0 + (1.0 - self.alpha) / self.alpha * (mu / self.alpha).exp())
    }

    fn constant_nll(&self, n_zero: f64, n_pos: f64, sum_pos: f64, mu: f64) -> f64 {
        n_zero * self.zero_value(mu) + n_pos * mu / self.alpha - sum_pos * mu.ln()
    }
}

impl Loss for ZipNll {
    fn name(&self) -> &'static str {
        "zip"
    }

    fn param_names(&self) -> &'static [&'static str] {
        &["mu"]
    }

    fn nuisance(&self) -> BTreeMap<String, f64> {
        BTreeMap::from([("alpha".to_string(), self.alpha)])
    }

    fn validate_observation(&self, obs: &Observation) -> Result<()> {
        require_count(obs.y)
    }

    fn default_domains(&self, ds: &Dataset) -> Vec<ParameterDomain> {
        vec![ParameterDomain {
            lo: 1e-6,
            hi: 1e6 * mean(ds.response()).max(1.0),
        }]
    }

    fn value(&self, theta: &[f64], obs: &Observation) -> f64 {
        let (mu, y) = (theta[0], obs.y);
        if y == 0.0 {
            self.zero_value(mu)
        } else {
            -(self.ln_alpha + y * (mu / self.alpha).ln() - mu / self.alpha - ln_gamma(y + 1.0))
        }
    }

    fn grad(&self, _j: usize, theta: &[f64], obs: &Observation) -> f64 {
        let (mu, y) = (theta[0], obs.y);
        if y == 0.0 {
            self.zero_weight(mu) / self.alpha
        } else {
            1.0 / self.alpha - y / mu
        }
    }

    fn hess(&self, _j: usize, theta: &[f64], obs: &Observation) -> f64 {
        let (mu, y) = (theta[0], obs.y);
        if y == 0.0 {
            let p = self.zero_weight(mu);
            -p * (1.0 - p) / (self.alpha * self.alpha)
        } else {
            y / (mu * mu)
        }
    }

    /// Golden-section minimisation of the constant-μ training NLL over
    /// `ln μ` across the default domain, to `1e−8` of the log-width.
    fn mle_init(&self, ds: &Dataset) -> Vec<f64> {
        let domain = self.default_domains(ds)[0];
        let (mut n_zero, mut n_pos, mut sum_pos) = (0.0, 0.0, 0.0);
        for &y in ds.response() {
            if y == 0.0 {
                n_zero += 1.0;
            } else {
                n_pos += 1.0;
                sum_pos += y;
            }
        }
        let f = |u: f64| self.constant_nll(n_zero, n_pos, sum_pos, u.exp());
        let (lo, hi) = (domain.lo.ln(), domain.hi.ln());
        let u = golden_section(f, lo, hi, 1e-8 * (hi - lo));
        vec![domain.clamp(u.exp())]
    }
}

pub(crate) fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    // keep the endpoints reachable when the minimum sits on the boundary
    let mid = 0.5 * (a + b);
    [a, mid, b]
        .into_iter()
        .min_by(|x, y| f(*x).total_cmp(&f(*y)))
        .unwrap_or(mid)
}
