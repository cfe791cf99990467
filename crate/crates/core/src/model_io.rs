//! JSON model files.
//!
//! ```text
//! {
//!   "feature_names": ["x1", "x2"],
//!   "format_version": 1,
//!   "loss": {"name": "zip", "nuisance": {"alpha": 0.5}},
//!   "parameters": [
//!     {"base_value": 1.2, "domain": {"hi": 1e6, "lo": 1e-6}, "name": "mu",
//!      "trees": [{"eta": 0.1, "nodes": [
//!        {"feature": 0, "kind": "split", "left": 1, "right": 2, "threshold": 0.5},
//!        {"kind": "leaf", "weight": -0.3},
//!        {"kind": "leaf", "weight": 0.4}]}]}
//!   ]
//! }
//! ```
//!
//! Keys are sorted and reals use the shortest decimal that parses back to the
//! same `f64`, so saving is deterministic and loading is bit-exact.

use crate::booster::{BoostedModel, ParamEnsemble};
use crate::error::{Error, Result};
use crate::loss::{loss_by_name, ParameterDomain};
use crate::tree::{Node, RegressionTree};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;

pub const FORMAT_VERSION: i64 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    format_version: i64,
    loss: LossBlock,
    feature_names: Vec<String>,
    parameters: Vec<ParamBlock>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LossBlock {
    name: String,
    nuisance: BTreeMap<String, f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ParamBlock {
    name: String,
    base_value: f64,
    domain: ParameterDomain,
    trees: Vec<TreeBlock>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TreeBlock {
    eta: f64,
    nodes: Vec<Node>,
}

/// Serializes `model` as a pretty-printed JSON document ending in a newline.
pub fn to_string(model: &BoostedModel) -> String {
    let file = ModelFile {
        format_version: FORMAT_VERSION,
        loss: LossBlock {
            name: model.loss_name.clone(),
            nuisance: model.nuisance.clone(),
        },
        feature_names: model.feature_names.clone(),
        parameters: model
            .params
            .iter()
            .map(|p| ParamBlock {
                name: p.name.clone(),
                base_value: p.base,
                domain: p.domain,
                trees: p
                    .trees
                    .iter()
                    .map(|(t, eta)| TreeBlock {
                        eta: *eta,
                        nodes: t.nodes().to_vec(),
                    })
                    .collect(),
            })
            .collect(),
    };
    // `Value` objects are ordered maps, which sorts every key.
    let value = serde_json::to_value(&file).expect("model is representable as JSON");
    let mut text = serde_json::to_string_pretty(&value).expect("JSON value serializes");
    text.push('\n');
    text
}

/// Parses and validates a model document.
pub fn from_str(text: &str) -> Result<BoostedModel> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| Error::ModelFormat(e.to_string()))?;
    let version = value
        .get("format_version")
        .ok_or_else(|| Error::ModelFormat("missing format_version".into()))?;
    let version = version
        .as_i64()
        .ok_or_else(|| Error::ModelFormat(format!("format_version must be an integer, got {version}")))?;
    if version != FORMAT_VERSION {
        return Err(Error::Version {
            found: version,
            supported: FORMAT_VERSION,
        });
    }
    let file: ModelFile =
        serde_json::from_value(value).map_err(|e| Error::ModelFormat(e.to_string()))?;

    let loss = loss_by_name(&file.loss.name, &file.loss.nuisance)?;
    if file.parameters.len() != loss.n_params() {
        return Err(Error::ModelFormat(format!(
            "loss `{}` has {} parameters, file has {}",
            loss.name(),
            loss.n_params(),
            file.parameters.len()
        )));
    }
    let n_features = file.feature_names.len();
    let mut params = Vec::with_capacity(file.parameters.len());
    for (block, expected) in file.parameters.into_iter().zip(loss.param_names()) {
        if block.name != *expected {
            return Err(Error::ModelFormat(format!(
                "parameter block `{}` where `{expected}` was expected",
                block.name
            )));
        }
        block.domain.validate()?;
        if !block.domain.contains(block.base_value) {
            return Err(Error::ModelFormat(format!(
                "base value {} of `{}` lies outside {}",
                block.base_value, block.name, block.domain
            )));
        }
        let mut trees = Vec::with_capacity(block.trees.len());
        for (k, t) in block.trees.into_iter().enumerate() {
            if !(t.eta > 0.0 && t.eta <= 1.0) {
                return Err(Error::ModelFormat(format!(
                    "tree {k} of `{}` has eta {} outside (0, 1]",
                    block.name, t.eta
                )));
            }
            trees.push((RegressionTree::from_nodes(t.nodes, n_features)?, t.eta));
        }
        params.push(ParamEnsemble {
            name: block.name,
            base: block.base_value,
            domain: block.domain,
            trees,
        });
    }
    Ok(BoostedModel {
        loss_name: file.loss.name,
        nuisance: file.loss.nuisance,
        feature_names: file.feature_names,
        params,
    })
}

pub fn save(model: &BoostedModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, to_string(model)).map_err(|e| Error::io(path, e))
}

pub fn load(path: impl AsRef<Path>) -> Result<BoostedModel> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    from_str(&text)
}
