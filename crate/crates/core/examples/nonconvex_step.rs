//! A single gamma observation started where the loss is concave. The classic
//! Newton leaf step walks away from the optimum; clipping the curvature at
//! zero keeps every step downhill.

use gxboost::loss::{GammaNll, Loss};
use gxboost::{train, Dataset, Observation, ParamTrainConfig, TrainConfig, TreeParams};

fn main() -> gxboost::Result<()> {
    let loss = GammaNll::new(5.0)?;
    let obs = Observation::new(4.0);
    let (g, h) = (loss.grad(0, &[10.0], &obs), loss.hess(0, &[10.0], &obs));
    let lambda = 0.005;
    println!("at mu = 10, y = 4: g = {g}, h = {h}");
    println!("classic step -g/(h + lambda) = {:+.1} (moves away from 4)", -g / (h + lambda));

    let ds = Dataset::from_rows(&[vec![0.0]], vec![4.0])?;
    let tree = TreeParams { lambda_reg: lambda, max_depth: 1, ..TreeParams::default() };
    let p = ParamTrainConfig::new(0.1, 500).with_tree(tree).with_clip_m(1e6).with_init(10.0);
    let out = train(&ds, &loss, &TrainConfig::new(vec![p], 500))?;
    println!("round   0: loss {:.6}", out.initial_nll);
    for r in out.trace.iter().filter(|r| [1, 10, 50, 100, 500].contains(&r.round)) {
        println!("round {:3}: loss {:.6}", r.round, r.train_nll);
    }
    println!("final mu = {:.6}", gxboost::predict(&out.model, &[0.0])?[0]);
    Ok(())
}
