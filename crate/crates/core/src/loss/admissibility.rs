//! Numerical check of the per-coordinate loss conditions: along every
//! one-dimensional slice the loss has at most one local minimum, and either
//! decreases then increases around it or is strictly monotonic.

use super::{Loss, ParameterDomain};
use crate::dataset::{Dataset, Observation};
use crate::error::{Error, Result};
use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum SliceShape {
    /// Decreasing then increasing; `at` is the grid point closest to the minimum.
    SingleMinimum { at: f64 },
    /// Monotone over the whole domain; the infimum sits at an edge.
    StrictlyMonotonic { increasing: bool },
    /// More than one local minimum, or a sign pattern that cannot be reconciled.
    Fail { minima: Vec<f64>, reason: String },
}

impl SliceShape {
    pub fn passed(&self) -> bool {
        !matches!(self, SliceShape::Fail { .. })
    }
}

impl fmt::Display for SliceShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SliceShape::SingleMinimum { at } => write!(f, "single-minimum at {at:.6}"),
            SliceShape::StrictlyMonotonic { increasing: true } => {
                write!(f, "strictly-monotonic (increasing)")
            }
            SliceShape::StrictlyMonotonic { increasing: false } => {
                write!(f, "strictly-monotonic (decreasing)")
            }
            SliceShape::Fail { minima, reason } => {
                let locs: Vec<String> = minima.iter().map(|m| format!("{m:.6}")).collect();
                write!(f, "FAIL ({reason}; local minima at [{}])", locs.join(", "))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SliceReport {
    pub y: f64,
    pub param: &'static str,
    pub domain: ParameterDomain,
    pub shape: SliceShape,
    /// Local minima of the sampled loss values, edges included.
    pub local_minima: usize,
    /// Sign changes of the analytic derivative sampled on the same grid.
    pub derivative_sign_changes: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdmissibilityReport {
    pub loss: &'static str,
    pub slices: Vec<SliceReport>,
}

impl AdmissibilityReport {
    pub fn passed(&self) -> bool {
        self.slices.iter().all(|s| s.shape.passed())
    }
}

/// Scans every `(y, coordinate)` slice of `loss` over `grid_points` grid
/// points spanning the coordinate's default domain (log-spaced for positive
/// domains, linear otherwise). Coordinates not being scanned are held at
/// `mle_init` of the sample.
pub fn check_admissibility(
    loss: &dyn Loss,
    y_samples: &[f64],
    grid_points: usize,
) -> Result<AdmissibilityReport> {
    if grid_points < 100 {
        return Err(Error::InvalidParameter(format!(
            "admissibility grid needs at least 100 points, got {grid_points}"
        )));
    }
    if y_samples.is_empty() {
        return Err(Error::InvalidParameter("no response samples given".into()));
    }
    let rows = vec![vec![0.0]; y_samples.len()];
    let ds = Dataset::from_rows(&rows, y_samples.to_vec())?;
    let domains = loss.default_domains(&ds);
    let base = loss.mle_init(&ds);

    let mut slices = Vec::new();
    for &y in y_samples {
        let obs = Observation::new(y);
        loss.validate_observation(&obs)?;
        for (j, (&param, domain)) in loss.param_names().iter().zip(&domains).enumerate() {
            let grid = slice_grid(domain, grid_points);
            let mut theta = base.clone();
            let mut values = Vec::with_capacity(grid.len());
            let mut grads = Vec::with_capacity(grid.len());
            for &t in &grid {
                theta[j] = t;
                values.push(loss.value(&theta, &obs));
                grads.push(loss.grad(j, &theta, &obs));
            }
            let (shape, local_minima) = classify(&grid, &values);
            let derivative_sign_changes = sign_changes(&grads);
            let shape = match shape {
                ok if ok.passed() && derivative_sign_changes > 1 => SliceShape::Fail {
                    minima: Vec::new(),
                    reason: format!("derivative changes sign {derivative_sign_changes} times"),
                },
                other => other,
            };
            slices.push(SliceReport {
                y,
                param,
                domain: *domain,
                shape,
                local_minima,
                derivative_sign_changes,
            });
        }
    }
    Ok(AdmissibilityReport {
        loss: loss.name(),
        slices,
    })
}

fn slice_grid(d: &ParameterDomain, k: usize) -> Vec<f64> {
    let step = |i: usize| i as f64 / (k - 1) as f64;
    if d.lo > 0.0 {
        let (a, b) = (d.lo.ln(), d.hi.ln());
        (0..k).map(|i| (a + (b - a) * step(i)).exp().clamp(d.lo, d.hi)).collect()
    } else {
        (0..k).map(|i| d.lo + d.width() * step(i)).collect()
    }
}

/// Differences below a few ulps of the values are treated as flat and
/// skipped: far tails of a likelihood can saturate in floating point.
fn classify(grid: &[f64], values: &[f64]) -> (SliceShape, usize) {
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return (
            SliceShape::Fail {
                minima: Vec::new(),
                reason: format!("non-finite loss at {}", grid[i]),
            },
            0,
        );
    }
    // (sign, index of left grid point)
    let steps: Vec<(i8, usize)> = values
        .windows(2)
        .enumerate()
        .filter_map(|(k, w)| {
            let d = w[1] - w[0];
            let noise = 4.0 * f64::EPSILON * w[0].abs().max(w[1].abs());
            if d.abs() <= noise {
                None
            } else {
                Some((if d > 0.0 { 1 } else { -1 }, k))
            }
        })
        .collect();
    let Some(&(first, _)) = steps.first() else {
        return (
            SliceShape::Fail {
                minima: Vec::new(),
                reason: "loss is flat on the whole slice".into(),
            },
            0,
        );
    };
    let last = steps[steps.len() - 1].0;

    let mut minima = Vec::new();
    if first > 0 {
        minima.push(grid[0]);
    }
    let mut turns_up = 0;
    let mut turns_down = 0;
    for w in steps.windows(2) {
        let ((s0, _), (s1, k1)) = (w[0], w[1]);
        if s0 < 0 && s1 > 0 {
            turns_up += 1;
            minima.push(grid[k1]);
        } else if s0 > 0 && s1 < 0 {
            turns_down += 1;
        }
    }
    if last < 0 {
        minima.push(grid[grid.len() - 1]);
    }
    let count = minima.len();
    let shape = match (turns_up, turns_down) {
        (0, 0) => SliceShape::StrictlyMonotonic {
            increasing: first > 0,
        },
        (1, 0) => SliceShape::SingleMinimum { at: minima[0] },
        _ => SliceShape::Fail {
            minima,
            reason: format!("{turns_up} interior minima and {turns_down} interior maxima"),
        },
    };
    (shape, count)
}

fn sign_changes(grads: &[f64]) -> usize {
    let signs: Vec<bool> = grads
        .iter()
        .filter(|g| **g != 0.0 && g.is_finite())
        .map(|g| *g > 0.0)
        .collect();
    signs.windows(2).filter(|w| w[0] != w[1]).count()
}
