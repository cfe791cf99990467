//! Claim counts with excess zeros: zero-inflated Poisson frequency model with
//! a fixed inflation constant and a bounded mean.

use gxboost::dataset::{generate_synthetic, split_holdout, Distribution, ParamMap, SyntheticSpec};
use gxboost::eval::nll_score_as;
use gxboost::loss::{Loss, ZipNll};
use gxboost::{train, BoostedModel, ParamTrainConfig, ParameterDomain, TrainConfig, TreeParams};

fn main() -> gxboost::Result<()> {
    let params = ParamMap::Quadrants {
        split: (0.5, 0.5),
        cells: [vec![0.5, 0.5], vec![1.0, 0.5], vec![2.0, 0.5], vec![4.0, 0.5]],
    };
    let ds = generate_synthetic(&SyntheticSpec::new(Distribution::Zip, 20_000, 2, params))?;
    let zeros = ds.response().iter().filter(|&&y| y == 0.0).count();
    println!("{} rows, {:.1}% zeros", ds.n_rows(), 100.0 * zeros as f64 / ds.n_rows() as f64);
    let (train_ds, hold) = split_holdout(&ds, 0.2, 2)?;

    let loss = ZipNll::new(0.5)?;
    let p = ParamTrainConfig::new(0.1, 100)
        .with_tree(TreeParams { max_depth: 2, ..TreeParams::default() })
        .with_domain(ParameterDomain::new(0.01, 100.0)?);
    let out = train(&train_ds, &loss, &TrainConfig::new(vec![p], 100))?;

    let constant = BoostedModel::constant(
        &loss,
        train_ds.feature_names().to_vec(),
        loss.mle_init(&train_ds),
        loss.default_domains(&train_ds),
    );
    let a = nll_score_as(&out.model, &loss, &hold, "boosted")?;
    let b = nll_score_as(&constant, &loss, &hold, "constant")?;
    println!("holdout NLL boosted {:.1}, constant {:.1}", a.total_nll, b.total_nll);
    for x in [[0.25, 0.25], [0.25, 0.75], [0.75, 0.25], [0.75, 0.75]] {
        println!("x = {x:?}: mu = {:.3}", gxboost::predict(&out.model, &x)?[0]);
    }
    Ok(())
}
