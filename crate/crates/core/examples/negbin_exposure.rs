//! Two-parameter negative binomial counts with per-row exposure and a
//! deductible-style adjustment. Both parameters get their own ensemble; the
//! dispersion is refit every other round.

use gxboost::dataset::{generate_synthetic, split_holdout, Distribution, ParamMap, SyntheticSpec};
use gxboost::eval::nll_score_as;
use gxboost::loss::NegBinNll;
use gxboost::{train, ParamTrainConfig, TrainConfig, TreeParams};

fn main() -> gxboost::Result<()> {
    let spec = SyntheticSpec::new(Distribution::NegBin, 20_000, 3, ParamMap::separable((1.0, 2.0), (1.0, 3.0)))
        .exposure_levels(vec![0.5, 1.0, 2.0])
        .adjustment_levels(vec![0.8, 1.0]);
    let ds = generate_synthetic(&spec)?;
    let (train_ds, hold) = split_holdout(&ds, 0.2, 3)?;

    let tree = TreeParams { max_depth: 2, min_leaf_samples: 200, ..TreeParams::default() };
    let beta = ParamTrainConfig::new(0.1, 200).with_tree(tree);
    let gamma = ParamTrainConfig::new(0.1, 100).with_tree(tree).with_schedule(2, 1);
    let out = train(&train_ds, &NegBinNll, &TrainConfig::new(vec![beta, gamma], 200))?;
    println!("trees: beta {}, gamma {}", out.model.params[0].trees.len(), out.model.params[1].trees.len());

    let r = nll_score_as(&out.model, &NegBinNll, &hold, "negbin")?;
    print!("{}", r.to_text());
    for x in [[0.25, 0.25], [0.25, 0.75], [0.75, 0.25], [0.75, 0.75]] {
        let theta = gxboost::predict(&out.model, &x)?;
        println!("x = {x:?}: beta = {:.3}, gamma = {:.3}", theta[0], theta[1]);
    }
    Ok(())
}
