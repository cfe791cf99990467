//! Saves a trained model to JSON, reloads it and checks the predictions and
//! bytes survive unchanged.

use gxboost::dataset::{generate_synthetic, Distribution, ParamMap, SyntheticSpec};
use gxboost::loss::NegBinNll;
use gxboost::{model_io, predict, train, ParamTrainConfig, TrainConfig};

fn main() -> gxboost::Result<()> {
    let spec = SyntheticSpec::new(Distribution::NegBin, 2_000, 4, ParamMap::separable((1.0, 2.0), (1.0, 3.0)));
    let ds = generate_synthetic(&spec)?;
    let cfg = TrainConfig::new(vec![ParamTrainConfig::new(0.2, 20); 2], 20);
    let model = train(&ds, &NegBinNll, &cfg)?.model;

    let path = std::env::temp_dir().join("gxboost_round_trip.json");
    model_io::save(&model, &path)?;
    let back = model_io::load(&path)?;
    let text = std::fs::read_to_string(&path).expect("model file readable");
    println!("{} bytes, {} trees, id {}", text.len(), back.n_trees(), back.identity());
    assert_eq!(model_io::to_string(&back), text);
    assert_eq!(back.identity(), model.identity());

    for i in 0..5 {
        let x = ds.row(i);
        let (a, b) = (predict(&model, &x)?, predict(&back, &x)?);
        assert_eq!(a, b);
        println!("row {i}: beta = {:.4}, gamma = {:.4}", b[0], b[1]);
    }
    let _ = std::fs::remove_file(&path);
    Ok(())
}
