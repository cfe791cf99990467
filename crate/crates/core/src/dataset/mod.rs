//! Training and evaluation data.
//!
//! Features are stored dense and column-major so that the split search can
//! scan one feature at a time over contiguous memory.

mod csv;
mod synthetic;

pub use self::csv::{
    load_csv, load_feature_rows, parse_csv, parse_feature_rows, to_csv_string, write_csv, CsvColumns,
};
pub use self::synthetic::{generate_synthetic, Distribution, ParamMap, SyntheticSpec};

use crate::error::{Error, Result};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

/// One response observation together with its per-row scale factors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    pub y: f64,
    pub exposure: f64,
    pub adjustment: f64,
}

impl Observation {
    pub fn new(y: f64) -> Self {
        Observation {
            y,
            exposure: 1.0,
            adjustment: 1.0,
        }
    }
}

/// Immutable feature matrix with response and optional exposure / adjustment.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    n: usize,
    feature_names: Vec<String>,
    // column-major, `n` values per feature
    features: Vec<f64>,
    response: Vec<f64>,
    exposure: Vec<f64>,
    adjustment: Vec<f64>,
    response_name: String,
    exposure_name: Option<String>,
    adjustment_name: Option<String>,
    label: String,
}

impl Dataset {
    /// Builds a dataset from feature columns. Missing exposure or adjustment
    /// vectors default to all ones.
    pub fn from_columns(
        feature_names: Vec<String>,
        columns: Vec<Vec<f64>>,
        response: Vec<f64>,
        exposure: Option<Vec<f64>>,
        adjustment: Option<Vec<f64>>,
    ) -> Result<Self> {
        let n = response.len();
        if n == 0 {
            return Err(Error::Dataset("dataset has no rows".into()));
        }
        if columns.is_empty() {
            return Err(Error::Dataset("dataset has no feature columns".into()));
        }
        if feature_names.len() != columns.len() {
            return Err(Error::Dataset(format!(
                "{} feature names for {} columns",
                feature_names.len(),
                columns.len()
            )));
        }
        let mut features = Vec::with_capacity(n * columns.len());
        for (name, col) in feature_names.iter().zip(&columns) {
            if col.len() != n {
                return Err(Error::Dataset(format!(
                    "feature `{name}` has {} values, expected {n}",
                    col.len()
                )));
            }
            if let Some(i) = col.iter().position(|v| !v.is_finite()) {
                return Err(Error::Cell {
                    row: i + 1,
                    column: name.clone(),
                    message: format!("non-finite value {}", col[i]),
                });
            }
            features.extend_from_slice(col);
        }
        if let Some(i) = response.iter().position(|v| !v.is_finite()) {
            return Err(Error::Cell {
                row: i + 1,
                column: "response".into(),
                message: format!("non-finite value {}", response[i]),
            });
        }
        let exposure = positive_or_ones(exposure, n, "exposure")?;
        let adjustment = positive_or_ones(adjustment, n, "adjustment")?;
        Ok(Dataset {
            n,
            feature_names,
            features,
            response,
            exposure,
            adjustment,
            response_name: "y".into(),
            exposure_name: None,
            adjustment_name: None,
            label: String::from("memory"),
        })
    }

    /// Convenience constructor from row-major feature vectors.
    pub fn from_rows(rows: &[Vec<f64>], response: Vec<f64>) -> Result<Self> {
        let m = rows.first().map_or(0, Vec::len);
        if let Some(i) = rows.iter().position(|r| r.len() != m) {
            return Err(Error::Dataset(format!(
                "row {} has {} features, expected {m}",
                i + 1,
                rows[i].len()
            )));
        }
        let columns = (0..m)
            .map(|j| rows.iter().map(|r| r[j]).collect())
            .collect();
        let names = (1..=m).map(|j| format!("x{j}")).collect();
        Dataset::from_columns(names, columns, response, None, None)
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub(crate) fn with_column_names(
        mut self,
        response: &str,
        exposure: Option<&str>,
        adjustment: Option<&str>,
    ) -> Self {
        self.response_name = response.to_string();
        self.exposure_name = exposure.map(str::to_string);
        self.adjustment_name = adjustment.map(str::to_string);
        self
    }

    pub fn n_rows(&self) -> usize {
        self.n
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.features[j * self.n..(j + 1) * self.n]
    }

    pub fn value(&self, row: usize, feature: usize) -> f64 {
        self.features[feature * self.n + row]
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        (0..self.n_features()).map(|j| self.value(i, j)).collect()
    }

    pub fn response(&self) -> &[f64] {
        &self.response
    }

    pub fn exposure(&self) -> &[f64] {
        &self.exposure
    }

    pub fn adjustment(&self) -> &[f64] {
        &self.adjustment
    }

    pub fn observation(&self, i: usize) -> Observation {
        Observation {
            y: self.response[i],
            exposure: self.exposure[i],
            adjustment: self.adjustment[i],
        }
    }

    pub fn response_name(&self) -> &str {
        &self.response_name
    }

    pub fn exposure_name(&self) -> Option<&str> {
        self.exposure_name.as_deref()
    }

    pub fn adjustment_name(&self) -> Option<&str> {
        self.adjustment_name.as_deref()
    }

    /// Where the data came from (a path, or a synthetic recipe).
    pub fn label(&self) -> &str {
        &self.label
    }

    /// SHA-256 over the bit patterns of every stored value.
    pub fn content_hash(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update((self.n as u64).to_le_bytes());
        hasher.update((self.n_features() as u64).to_le_bytes());
        for v in self
            .features
            .iter()
            .chain(&self.response)
            .chain(&self.exposure)
            .chain(&self.adjustment)
        {
            hasher.update(v.to_bits().to_le_bytes());
        }
        hasher
            .finalize()
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    /// Identity used to check that evaluation reports refer to the same rows.
    pub fn identity(&self) -> String {
        format!("{}:{}:{}", self.label, self.n, &self.content_hash()[..16])
    }

    /// Copies the given rows (in the given order) into a new dataset.
    pub fn subset(&self, rows: &[usize]) -> Result<Dataset> {
        if rows.is_empty() {
            return Err(Error::Dataset("empty row subset".into()));
        }
        let pick = |v: &[f64]| rows.iter().map(|&i| v[i]).collect::<Vec<_>>();
        let columns = (0..self.n_features()).map(|j| pick(self.column(j))).collect();
        let ds = Dataset::from_columns(
            self.feature_names.clone(),
            columns,
            pick(&self.response),
            Some(pick(&self.exposure)),
            Some(pick(&self.adjustment)),
        )?;
        Ok(Dataset {
            response_name: self.response_name.clone(),
            exposure_name: self.exposure_name.clone(),
            adjustment_name: self.adjustment_name.clone(),
            label: self.label.clone(),
            ..ds
        })
    }
}

fn positive_or_ones(v: Option<Vec<f64>>, n: usize, what: &str) -> Result<Vec<f64>> {
    match v {
        None => Ok(vec![1.0; n]),
        Some(v) => {
            if v.len() != n {
                return Err(Error::Dataset(format!(
                    "{what} has {} values, expected {n}",
                    v.len()
                )));
            }
            if let Some(i) = v.iter().position(|x| !(x.is_finite() && *x > 0.0)) {
                return Err(Error::Cell {
                    row: i + 1,
                    column: what.to_string(),
                    message: format!("{what} must be positive and finite, got {}", v[i]),
                });
            }
            Ok(v)
        }
    }
}

/// Splits rows into `(train, holdout)` with `floor(n · fraction)` holdout rows,
/// kept within `[1, n − 1]`. Both parts preserve the original row order.
pub fn split_holdout(ds: &Dataset, fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "holdout fraction must lie in (0, 1), got {fraction}"
        )));
    }
    let n = ds.n_rows();
    if n < 2 {
        return Err(Error::InvalidParameter(
            "holdout split needs at least 2 rows".into(),
        ));
    }
    let k = ((n as f64 * fraction).floor() as usize).clamp(1, n - 1);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha20Rng::seed_from_u64(seed));
    let mut holdout = order[..k].to_vec();
    let mut train = order[k..].to_vec();
    holdout.sort_unstable();
    train.sort_unstable();
    Ok((ds.subset(&train)?, ds.subset(&holdout)?))
}
