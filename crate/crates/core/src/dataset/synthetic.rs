//! Seeded synthetic data for the three insurance distributions.
//!
//! Randomness comes from ChaCha20 (`rand_chacha::ChaCha20Rng`), a
//! counter-based stream cipher generator whose output is specified bit for bit
//! and therefore identical across platforms for a given seed.

use super::Dataset;
use crate::error::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution as _, Gamma, Poisson};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Distribution {
    /// Gamma severity, parameters `[mu, alpha]` with mean `mu` and shape `alpha`.
    Gamma,
    /// Zero-inflated Poisson, parameters `[mu, alpha]` with mean `mu` and
    /// Poisson mixing weight `alpha`.
    Zip,
    /// Negative binomial, parameters `[beta, gamma]`; the shape is scaled by
    /// exposure and `beta` by the adjustment coefficient.
    NegBin,
}

impl Distribution {
    pub fn param_names(self) -> [&'static str; 2] {
        match self {
            Distribution::Gamma | Distribution::Zip => ["mu", "alpha"],
            Distribution::NegBin => ["beta", "gamma"],
        }
    }

    fn check(self, p: &[f64]) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if p.len() != 2 || p.iter().any(|v| !v.is_finite()) {
            return bad(format!("{self} needs two finite parameters, got {p:?}"));
        }
        let [a, b] = [p[0], p[1]];
        let [na, nb] = self.param_names();
        match self {
            Distribution::Zip if !(b > 0.0 && b <= 1.0) => {
                bad(format!("zip {nb} must lie in (0, 1], got {b}"))
            }
            _ if a <= 0.0 => bad(format!("{self} {na} must be positive, got {a}")),
            _ if b <= 0.0 => bad(format!("{self} {nb} must be positive, got {b}")),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Distribution::Gamma => "gamma",
            Distribution::Zip => "zip",
            Distribution::NegBin => "negbin",
        })
    }
}

impl FromStr for Distribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gamma" => Ok(Distribution::Gamma),
            "zip" => Ok(Distribution::Zip),
            "negbin" => Ok(Distribution::NegBin),
            other => Err(Error::InvalidParameter(format!(
                "unknown distribution `{other}` (expected gamma, zip or negbin)"
            ))),
        }
    }
}

/// Piecewise-constant map from the two features `(x1, x2) ∈ [0,1]²` to the
/// distribution's parameter vector.
#[derive(Debug, Clone, PartialEq)]
pub enum ParamMap {
    Constant(Vec<f64>),
    /// Cells are indexed `2·[x1 ≥ split.0] + [x2 ≥ split.1]`.
    Quadrants {
        split: (f64, f64),
        cells: [Vec<f64>; 4],
    },
}

impl ParamMap {
    pub fn eval(&self, x1: f64, x2: f64) -> &[f64] {
        match self {
            ParamMap::Constant(p) => p,
            ParamMap::Quadrants { split, cells } => {
                let idx = 2 * usize::from(x1 >= split.0) + usize::from(x2 >= split.1);
                &cells[idx]
            }
        }
    }

    /// Quadrant map where the first parameter depends on `x1` only and the
    /// second on `x2` only, splitting at 0.5.
    pub fn separable(first: (f64, f64), second: (f64, f64)) -> Self {
        ParamMap::Quadrants {
            split: (0.5, 0.5),
            cells: [
                vec![first.0, second.0],
                vec![first.0, second.1],
                vec![first.1, second.0],
                vec![first.1, second.1],
            ],
        }
    }

    fn all(&self) -> Vec<&[f64]> {
        match self {
            ParamMap::Constant(p) => vec![p.as_slice()],
            ParamMap::Quadrants { cells, .. } => cells.iter().map(Vec::as_slice).collect(),
        }
    }
}

/// Full recipe for [`generate_synthetic`].
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub dist: Distribution,
    pub n: usize,
    pub seed: u64,
    pub params: ParamMap,
    /// When set, each row draws its exposure uniformly from these levels.
    pub exposure_levels: Option<Vec<f64>>,
    /// When set, each row draws its adjustment coefficient uniformly from these levels.
    pub adjustment_levels: Option<Vec<f64>>,
}

impl SyntheticSpec {
    pub fn new(dist: Distribution, n: usize, seed: u64, params: ParamMap) -> Self {
        SyntheticSpec {
            dist,
            n,
            seed,
            params,
            exposure_levels: None,
            adjustment_levels: None,
        }
    }

    pub fn exposure_levels(mut self, levels: Vec<f64>) -> Self {
        self.exposure_levels = Some(levels);
        self
    }

    pub fn adjustment_levels(mut self, levels: Vec<f64>) -> Self {
        self.adjustment_levels = Some(levels);
        self
    }
}

/// Draws `n` rows with features uniform on `[0,1]²` and the response sampled
/// from `dist` with parameters `params(x)`. Deterministic in `spec`.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<Dataset> {
    if spec.n == 0 {
        return Err(Error::InvalidParameter("synthetic n must be ≥ 1".into()));
    }
    for p in spec.params.all() {
        spec.dist.check(p)?;
    }
    for levels in [&spec.exposure_levels, &spec.adjustment_levels]
        .into_iter()
        .flatten()
    {
        if levels.is_empty() || levels.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::InvalidParameter(format!(
                "scale levels must be non-empty and positive, got {levels:?}"
            )));
        }
    }

    let mut rng = ChaCha20Rng::seed_from_u64(spec.seed);
    let n = spec.n;
    let (mut x1, mut x2, mut y) = (
        Vec::with_capacity(n),
        Vec::with_capacity(n),
        Vec::with_capacity(n),
    );
    let mut exposure = spec.exposure_levels.as_ref().map(|_| Vec::with_capacity(n));
    let mut adjustment = spec.adjustment_levels.as_ref().map(|_| Vec::with_capacity(n));

    for _ in 0..n {
        let a: f64 = rng.random();
        let b: f64 = rng.random();
        let e = pick_level(&mut rng, spec.exposure_levels.as_deref());
        let adj = pick_level(&mut rng, spec.adjustment_levels.as_deref());
        let p = spec.params.eval(a, b);
        let value = match spec.dist {
            Distribution::Gamma => gamma(p[1], p[0] / p[1])?.sample(&mut rng),
            Distribution::Zip => {
                let (mu, alpha) = (p[0], p[1]);
                if rng.random::<f64>() < alpha {
                    poisson(&mut rng, mu / alpha)?
                } else {
                    0.0
                }
            }
            Distribution::NegBin => {
                let rate = gamma(e * p[1], adj * p[0])?.sample(&mut rng);
                poisson(&mut rng, rate)?
            }
        };
        x1.push(a);
        x2.push(b);
        y.push(value);
        if let Some(v) = exposure.as_mut() {
            v.push(e);
        }
        if let Some(v) = adjustment.as_mut() {
            v.push(adj);
        }
    }

    let has_e = exposure.is_some();
    let has_a = adjustment.is_some();
    let ds = Dataset::from_columns(
        vec!["x1".into(), "x2".into()],
        vec![x1, x2],
        y,
        exposure,
        adjustment,
    )?
    .with_column_names(
        "y",
        has_e.then_some("exposure"),
        has_a.then_some("adjustment"),
    )
    .with_label(format!("synthetic:{}:{}:{}", spec.dist, spec.n, spec.seed));
    Ok(ds)
}

fn pick_level(rng: &mut ChaCha20Rng, levels: Option<&[f64]>) -> f64 {
    match levels {
        Some(l) => l[rng.random_range(0..l.len())],
        None => 1.0,
    }
}

fn gamma(shape: f64, scale: f64) -> Result<Gamma<f64>> {
    Gamma::new(shape, scale)
        .map_err(|e| Error::InvalidParameter(format!("gamma({shape}, {scale}): {e}")))
}

fn poisson(rng: &mut ChaCha20Rng, rate: f64) -> Result<f64> {
    if rate <= 0.0 {
        return Ok(0.0);
    }
    let d = Poisson::new(rate)
        .map_err(|e| Error::InvalidParameter(format!("poisson({rate}): {e}")))?;
    Ok(d.sample(rng))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mean(v: &[f64]) -> f64 {
        v.iter().sum::<f64>() / v.len() as f64
    }

    #[test]
    fn gamma_sample_mean() {
        let spec = SyntheticSpec::new(Distribution::Gamma, 100_000, 3, ParamMap::Constant(vec![4.0, 5.0]));
        let ds = generate_synthetic(&spec).unwrap();
        let m = mean(ds.response());
        assert!((m - 4.0).abs() / 4.0 < 0.02, "mean {m}");
        assert!(ds.response().iter().all(|&y| y > 0.0));
    }

    #[test]
    fn zip_with_unit_mixing_is_poisson() {
        let spec = SyntheticSpec::new(Distribution::Zip, 50_000, 11, ParamMap::Constant(vec![1.5, 1.0]));
        let ds = generate_synthetic(&spec).unwrap();
        let zeros = ds.response().iter().filter(|&&y| y == 0.0).count() as f64 / 50_000.0;
        assert!((zeros - (-1.5f64).exp()).abs() < 0.01, "zero fraction {zeros}");
    }

    #[test]
    fn negbin_sample_mean() {
        let spec = SyntheticSpec::new(Distribution::NegBin, 100_000, 5, ParamMap::Constant(vec![1.5, 2.0]));
        let ds = generate_synthetic(&spec).unwrap();
        let m = mean(ds.response());
        assert!((m - 3.0).abs() / 3.0 < 0.02, "mean {m}");
        assert!(ds.response().iter().all(|&y| y >= 0.0 && y.fract() == 0.0));
    }

    #[test]
    fn same_seed_same_data() {
        let spec = SyntheticSpec::new(Distribution::NegBin, 500, 9, ParamMap::separable((1.0, 2.0), (1.0, 3.0)))
            .exposure_levels(vec![0.5, 1.0, 2.0]);
        assert_eq!(generate_synthetic(&spec).unwrap(), generate_synthetic(&spec).unwrap());
        let other = SyntheticSpec { seed: 10, ..spec.clone() };
        assert_ne!(generate_synthetic(&spec).unwrap(), generate_synthetic(&other).unwrap());
    }

    #[test]
    fn rejects_invalid_parameters() {
        assert!("weibull".parse::<Distribution>().is_err());
        let bad = [
            (Distribution::Zip, vec![1.0, 0.0]),
            (Distribution::Zip, vec![1.0, 1.5]),
            (Distribution::Gamma, vec![-1.0, 2.0]),
            (Distribution::NegBin, vec![1.0, f64::NAN]),
        ];
        for (dist, p) in bad {
            assert!(generate_synthetic(&SyntheticSpec::new(dist, 10, 0, ParamMap::Constant(p))).is_err());
        }
        assert!(generate_synthetic(&SyntheticSpec::new(Distribution::Gamma, 0, 0, ParamMap::Constant(vec![1.0, 1.0]))).is_err());
    }

    #[test]
    fn quadrant_lookup() {
        let map = ParamMap::separable((1.0, 2.0), (1.0, 3.0));
        assert_eq!(map.eval(0.1, 0.9), &[1.0, 3.0]);
        assert_eq!(map.eval(0.6, 0.2), &[2.0, 1.0]);
    }
}
