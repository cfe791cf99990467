//! Holdout scoring by total negative log-likelihood, and ranking of
//! candidate models scored on the same data.

use crate::booster::BoostedModel;
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::loss::Loss;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalReport {
    pub model_id: String,
    pub dataset_id: String,
    pub total_nll: f64,
    pub mean_nll: f64,
    pub n: usize,
}

impl EvalReport {
    /// `key=value` lines.
    pub fn to_text(&self) -> String {
        format!(
            "model_id={}\ndataset_id={}\nn={}\ntotal_nll={}\nmean_nll={}\n",
            self.model_id, self.dataset_id, self.n, self.total_nll, self.mean_nll
        )
    }

    pub fn to_json(&self) -> String {
        let v = serde_json::to_value(self).expect("report is representable as JSON");
        let mut s = serde_json::to_string_pretty(&v).expect("JSON value serializes");
        s.push('\n');
        s
    }
}

/// `Σ_i l(predict(model, x_i), y_i)` over `ds`, reported under the model's
/// own identity.
pub fn nll_score(model: &BoostedModel, loss: &dyn Loss, ds: &Dataset) -> Result<EvalReport> {
    nll_score_as(model, loss, ds, &model.identity())
}

/// [`nll_score`] with a caller-chosen model identifier.
pub fn nll_score_as(
    model: &BoostedModel,
    loss: &dyn Loss,
    ds: &Dataset,
    model_id: &str,
) -> Result<EvalReport> {
    if loss.name() != model.loss_name || loss.nuisance() != model.nuisance {
        return Err(Error::Eval(format!(
            "model was trained with `{}` {:?}, scoring loss is `{}` {:?}",
            model.loss_name,
            model.nuisance,
            loss.name(),
            loss.nuisance()
        )));
    }
    crate::loss::validate_dataset(loss, ds)?;
    let theta = model.predict_dataset(ds)?;
    let values: Vec<f64> = theta
        .par_iter()
        .enumerate()
        .map(|(i, t)| loss.value(t, &ds.observation(i)))
        .collect();
    if let Some(row) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFiniteRow { row: row + 1 });
    }
    let total: f64 = values.iter().sum();
    let n = ds.n_rows();
    Ok(EvalReport {
        model_id: model_id.to_string(),
        dataset_id: ds.identity(),
        total_nll: total,
        mean_nll: total / n as f64,
        n,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankedEntry {
    pub rank: usize,
    pub report: EvalReport,
    /// Shares its total with another entry.
    pub tied: bool,
}

/// Sorts reports by ascending total NLL, ties broken by model identifier.
/// All reports must come from the same dataset.
pub fn compare(reports: &[EvalReport]) -> Result<Vec<RankedEntry>> {
    if let Some(first) = reports.first() {
        if let Some(bad) = reports
            .iter()
            .find(|r| r.dataset_id != first.dataset_id || r.n != first.n)
        {
            return Err(Error::Eval(format!(
                "reports scored on different data: `{}` (n={}) vs `{}` (n={})",
                first.dataset_id, first.n, bad.dataset_id, bad.n
            )));
        }
    }
    let mut sorted = reports.to_vec();
    sorted.sort_by(|a, b| {
        a.total_nll
            .total_cmp(&b.total_nll)
            .then_with(|| a.model_id.cmp(&b.model_id))
    });
    let totals: Vec<f64> = sorted.iter().map(|r| r.total_nll).collect();
    Ok(sorted
        .into_iter()
        .enumerate()
        .map(|(i, report)| {
            let tied = (i > 0 && totals[i - 1] == report.total_nll)
                || (i + 1 < totals.len() && totals[i + 1] == report.total_nll);
            RankedEntry {
                rank: i + 1,
                report,
                tied,
            }
        })
        .collect())
}

/// Fixed-width table of a ranking.
pub fn format_ranking(entries: &[RankedEntry]) -> String {
    let width = entries
        .iter()
        .map(|e| e.report.model_id.len())
        .max()
        .unwrap_or(5)
        .max(5);
    let mut out = format!("{:>4}  {:<width$}  {:>20}  {:>14}\n", "rank", "model", "total_nll", "mean_nll");
    for e in entries {
        out += &format!(
            "{:>4}  {:<width$}  {:>20.6}  {:>14.6}{}\n",
            e.rank,
            e.report.model_id,
            e.report.total_nll,
            e.report.mean_nll,
            if e.tied { "  (tied)" } else { "" }
        );
    }
    out
}
