//! Minimal CSV reader/writer: comma separated, header row, numeric cells,
//! no quoting or escaping.

use super::Dataset;
use crate::error::{Error, Result};
use std::fmt::Write as _;
use std::path::Path;

/// Column bindings used when reading a CSV file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsvColumns<'a> {
    pub response: &'a str,
    pub exposure: Option<&'a str>,
    pub adjustment: Option<&'a str>,
}

impl<'a> CsvColumns<'a> {
    pub fn response(name: &'a str) -> Self {
        CsvColumns {
            response: name,
            exposure: None,
            adjustment: None,
        }
    }
}

pub fn load_csv(path: impl AsRef<Path>, columns: &CsvColumns<'_>) -> Result<Dataset> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(parse_csv(&text, columns)?.with_label(path.display().to_string()))
}

struct Table {
    header: Vec<String>,
    /// Column-major cells.
    cells: Vec<Vec<f64>>,
}

fn read_table(text: &str) -> Result<Table> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header: Vec<String> = lines
        .next()
        .ok_or_else(|| Error::Dataset("missing header row".into()))?
        .split(',')
        .map(|s| s.trim().to_string())
        .collect();
    for (i, name) in header.iter().enumerate() {
        if name.is_empty() {
            return Err(Error::Dataset(format!("empty column name at position {}", i + 1)));
        }
        if header[..i].contains(name) {
            return Err(Error::Dataset(format!("duplicate column `{name}`")));
        }
    }
    let mut cells: Vec<Vec<f64>> = vec![Vec::new(); header.len()];
    for (r, line) in lines.enumerate() {
        let row = r + 1;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != header.len() {
            return Err(Error::Dataset(format!(
                "row {row} has {} cells, header has {}",
                fields.len(),
                header.len()
            )));
        }
        for (c, field) in fields.iter().enumerate() {
            let field = field.trim();
            let v: f64 = field.parse().map_err(|_| Error::Cell {
                row,
                column: header[c].clone(),
                message: format!("`{field}` is not a decimal number"),
            })?;
            if !v.is_finite() {
                return Err(Error::Cell {
                    row,
                    column: header[c].clone(),
                    message: format!("non-finite value `{field}`"),
                });
            }
            cells[c].push(v);
        }
    }

    Ok(Table { header, cells })
}

/// Parses CSV text. Data rows in error messages are numbered from 1
/// (the header is row 0).
pub fn parse_csv(text: &str, columns: &CsvColumns<'_>) -> Result<Dataset> {
    let Table { header, mut cells } = read_table(text)?;
    let find = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Dataset(format!("missing column `{name}`")))
    };
    let response_idx = find(columns.response)?;
    let exposure_idx = columns.exposure.map(find).transpose()?;
    let adjustment_idx = columns.adjustment.map(find).transpose()?;
    let mut bound = vec![response_idx];
    for idx in [exposure_idx, adjustment_idx].into_iter().flatten() {
        if bound.contains(&idx) {
            return Err(Error::Dataset(format!(
                "column `{}` bound to more than one role",
                header[idx]
            )));
        }
        bound.push(idx);
    }

    let feature_idx: Vec<usize> = (0..header.len()).filter(|i| !bound.contains(i)).collect();
    let names = feature_idx.iter().map(|&i| header[i].clone()).collect();
    let take = |i: usize, cells: &mut Vec<Vec<f64>>| std::mem::take(&mut cells[i]);
    let response = take(response_idx, &mut cells);
    let exposure = exposure_idx.map(|i| take(i, &mut cells));
    let adjustment = adjustment_idx.map(|i| take(i, &mut cells));
    let feature_cols = feature_idx.iter().map(|&i| take(i, &mut cells)).collect();

    let ds = Dataset::from_columns(names, feature_cols, response, exposure, adjustment).map_err(
        |e| match e {
            Error::Cell {
                row,
                column,
                message,
            } => Error::Cell {
                row,
                column: rename_role(&column, columns),
                message,
            },
            other => other,
        },
    )?;
    Ok(ds.with_column_names(columns.response, columns.exposure, columns.adjustment))
}

/// Reads the columns named in `features`, in that order, as row-major
/// feature vectors. Other columns are ignored.
pub fn parse_feature_rows(text: &str, features: &[String]) -> Result<Vec<Vec<f64>>> {
    let Table { header, cells } = read_table(text)?;
    let mut idx = Vec::with_capacity(features.len());
    for name in features {
        match header.iter().position(|h| h == name) {
            Some(i) => idx.push(i),
            None => {
                return Err(Error::Arity {
                    expected: features.len(),
                    got: header.iter().filter(|h| features.contains(h)).count(),
                    names: features.join(", "),
                })
            }
        }
    }
    let n = cells.first().map_or(0, Vec::len);
    Ok((0..n).map(|r| idx.iter().map(|&c| cells[c][r]).collect()).collect())
}

pub fn load_feature_rows(path: impl AsRef<Path>, features: &[String]) -> Result<Vec<Vec<f64>>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_feature_rows(&text, features)
}

fn rename_role(column: &str, columns: &CsvColumns<'_>) -> String {
    match column {
        "response" => columns.response.to_string(),
        "exposure" => columns.exposure.unwrap_or(column).to_string(),
        "adjustment" => columns.adjustment.unwrap_or(column).to_string(),
        _ => column.to_string(),
    }
}

/// Renders the dataset as CSV: features, then response, then exposure and
/// adjustment when they carry a column name. Floats use the shortest
/// representation that parses back to the same bits.
pub fn to_csv_string(ds: &Dataset) -> String {
    let mut header: Vec<&str> = ds.feature_names().iter().map(String::as_str).collect();
    header.push(ds.response_name());
    header.extend(ds.exposure_name());
    header.extend(ds.adjustment_name());
    let mut out = header.join(",");
    out.push('\n');
    for i in 0..ds.n_rows() {
        let mut first = true;
        let mut cell = |out: &mut String, v: f64| {
            if !first {
                out.push(',');
            }
            first = false;
            let _ = write!(out, "{v}");
        };
        for j in 0..ds.n_features() {
            cell(&mut out, ds.value(i, j));
        }
        cell(&mut out, ds.response()[i]);
        if ds.exposure_name().is_some() {
            cell(&mut out, ds.exposure()[i]);
        }
        if ds.adjustment_name().is_some() {
            cell(&mut out, ds.adjustment()[i]);
        }
        out.push('\n');
    }
    out
}

pub fn write_csv(ds: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, to_csv_string(ds)).map_err(|e| Error::io(path, e))
}
