//! Plugging in a user-defined loss: a Poisson log-likelihood on the mean,
//! trained through the same booster as the built-ins.

use gxboost::dataset::{generate_synthetic, Distribution, ParamMap, SyntheticSpec};
use gxboost::loss::{check_admissibility, Loss};
use gxboost::{train, Dataset, Error, Observation, ParamTrainConfig, ParameterDomain, TrainConfig};

#[derive(Debug)]
struct Poisson;

impl Loss for Poisson {
    fn name(&self) -> &'static str {
        "poisson"
    }

    fn param_names(&self) -> &'static [&'static str] {
        &["mu"]
    }

    fn validate_observation(&self, obs: &Observation) -> gxboost::Result<()> {
        if obs.y >= 0.0 && obs.y.fract() == 0.0 {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("not a count: {}", obs.y)))
        }
    }

    fn default_domains(&self, _ds: &Dataset) -> Vec<ParameterDomain> {
        vec![ParameterDomain { lo: 1e-6, hi: 1e6 }]
    }

    // additive constant ln y! dropped
    fn value(&self, theta: &[f64], obs: &Observation) -> f64 {
        theta[0] - obs.y * theta[0].ln()
    }

    fn grad(&self, _j: usize, theta: &[f64], obs: &Observation) -> f64 {
        1.0 - obs.y / theta[0]
    }

    fn hess(&self, _j: usize, theta: &[f64], obs: &Observation) -> f64 {
        obs.y / (theta[0] * theta[0])
    }

    fn mle_init(&self, ds: &Dataset) -> Vec<f64> {
        let m = ds.response().iter().sum::<f64>() / ds.n_rows() as f64;
        vec![m.max(1e-6)]
    }
}

fn main() -> gxboost::Result<()> {
    let report = check_admissibility(&Poisson, &[0.0, 1.0, 10.0], 500)?;
    println!("admissible: {}", report.passed());

    // ZIP data with no zero inflation is plain Poisson
    let params = ParamMap::separable((1.0, 5.0), (1.0, 1.0));
    let ds = generate_synthetic(&SyntheticSpec::new(Distribution::Zip, 5_000, 6, params))?;
    let out = train(&ds, &Poisson, &TrainConfig::new(vec![ParamTrainConfig::new(0.2, 50)], 50))?;
    println!("NLL {:.1} -> {:.1}", out.initial_nll, out.trace.last().unwrap().train_nll);
    for x in [[0.25, 0.5], [0.75, 0.5]] {
        println!("x = {x:?}: mu = {:.3}", gxboost::predict(&out.model, &x)?[0]);
    }
    Ok(())
}
