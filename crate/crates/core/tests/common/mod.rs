//! Independent reference implementations shared by the integration tests.
//! Nothing here calls into the library's tree or booster code.
#![allow(dead_code)]

use gxboost::dataset::Observation;
use gxboost::tree::Node;
use gxboost::{Loss, RegressionTree};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

pub fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// Reference tree with boxed children.
#[derive(Debug, Clone, PartialEq)]
pub enum RefTree {
    Leaf(f64),
    Split {
        feature: usize,
        threshold: f64,
        left: Box<RefTree>,
        right: Box<RefTree>,
    },
}

impl RefTree {
    pub fn predict(&self, x: &[f64]) -> f64 {
        match self {
            RefTree::Leaf(w) => *w,
            RefTree::Split {
                feature,
                threshold,
                left,
                right,
            } => {
                if x[*feature] < *threshold {
                    left.predict(x)
                } else {
                    right.predict(x)
                }
            }
        }
    }
}

/// Straight-line second-order tree growth: `w = −G/(H+λ)`,
/// `gain = ½[G_L²/(H_L+λ) + G_R²/(H_R+λ) − G²/(H+λ)] − γ`, depth first.
pub struct ClassicParams {
    pub lambda: f64,
    pub gamma: f64,
    pub max_depth: usize,
}

pub fn classic_tree(x: &[Vec<f64>], g: &[f64], h: &[f64], p: &ClassicParams) -> RefTree {
    let rows: Vec<usize> = (0..x.len()).collect();
    classic_node(x, g, h, p, rows, 0)
}

fn classic_node(
    x: &[Vec<f64>],
    g: &[f64],
    h: &[f64],
    p: &ClassicParams,
    rows: Vec<usize>,
    depth: usize,
) -> RefTree {
    let gs: f64 = rows.iter().map(|&r| g[r]).sum();
    let hs: f64 = rows.iter().map(|&r| h[r]).sum();
    if depth < p.max_depth {
        let mut best: Option<(f64, usize, f64)> = None;
        for f in 0..x[0].len() {
            let mut feature_best: Option<(f64, usize, f64)> = None;
            let mut sorted = rows.clone();
            sorted.sort_by(|&a, &b| x[a][f].partial_cmp(&x[b][f]).unwrap().then(a.cmp(&b)));
            let (mut gl, mut hl) = (0.0, 0.0);
            for k in 0..sorted.len() - 1 {
                gl += g[sorted[k]];
                hl += h[sorted[k]];
                let (lo, hi) = (x[sorted[k]][f], x[sorted[k + 1]][f]);
                if lo < hi {
                    let gain = 0.5
                        * (gl * gl / (hl + p.lambda) + (gs - gl) * (gs - gl) / (hs - hl + p.lambda)
                            - gs * gs / (hs + p.lambda))
                        - p.gamma;
                    if gain > 0.0 && feature_best.is_none_or(|b| gain > b.0) {
                        feature_best = Some((gain, f, 0.5 * (lo + hi)));
                    }
                }
            }
            // across features, gains within 1e-12 relative tie and the lower index keeps the split
            if let Some(c) = feature_best {
                if best.is_none_or(|b| c.0 > b.0 * (1.0 + 1e-12)) {
                    best = Some(c);
                }
            }
        }
        if let Some((_, feature, threshold)) = best {
            let (l, r): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&i| x[i][feature] < threshold);
            return RefTree::Split {
                feature,
                threshold,
                left: Box::new(classic_node(x, g, h, p, l, depth + 1)),
                right: Box::new(classic_node(x, g, h, p, r, depth + 1)),
            };
        }
    }
    RefTree::Leaf(-gs / (hs + p.lambda))
}

/// Squared-error boosting from the mean with the classic updates.
pub fn classic_boost(x: &[Vec<f64>], y: &[f64], eta: f64, rounds: usize, p: &ClassicParams) -> (f64, Vec<RefTree>) {
    let base = y.iter().sum::<f64>() / y.len() as f64;
    let mut pred = vec![base; y.len()];
    let h = vec![1.0; y.len()];
    let mut trees = Vec::new();
    for _ in 0..rounds {
        let g: Vec<f64> = pred.iter().zip(y).map(|(p, y)| p - y).collect();
        let t = classic_tree(x, &g, &h, p);
        for (i, xi) in x.iter().enumerate() {
            pred[i] += eta * t.predict(xi);
        }
        trees.push(t);
    }
    (base, trees)
}

/// Structural comparison: identical topology, features and thresholds, leaf
/// weights within `tol`.
pub fn same_structure(lib: &RegressionTree, reference: &RefTree, tol: f64) -> Result<(), String> {
    fn go(nodes: &[Node], i: usize, r: &RefTree, tol: f64, path: &str) -> Result<(), String> {
        match (&nodes[i], r) {
            (Node::Leaf { weight }, RefTree::Leaf(w)) => {
                if (weight - w).abs() <= tol {
                    Ok(())
                } else {
                    Err(format!("{path}: leaf {weight} vs {w}"))
                }
            }
            (
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                },
                RefTree::Split {
                    feature: f,
                    threshold: t,
                    left: rl,
                    right: rr,
                },
            ) => {
                if feature != f || threshold != t {
                    return Err(format!("{path}: split ({feature}, {threshold}) vs ({f}, {t})"));
                }
                go(nodes, *left, rl, tol, &format!("{path}L"))?;
                go(nodes, *right, rr, tol, &format!("{path}R"))
            }
            (a, b) => Err(format!("{path}: {a:?} vs {b:?}")),
        }
    }
    go(lib.nodes(), 0, reference, tol, "root")
}

/// Generalized objective pieces for the micro-instance oracles.
#[derive(Clone, Copy)]
pub struct MicroParams {
    pub a: f64,
    pub lambda: f64,
    pub gamma: f64,
}

fn leaf_objective(rows: &[usize], g: &[f64], h: &[f64], p: MicroParams) -> f64 {
    let gs: f64 = rows.iter().map(|&r| g[r]).sum();
    let hs: f64 = rows.iter().map(|&r| h[r]).sum();
    -0.5 * gs * gs / (2.0 * p.a * hs + p.lambda) + p.gamma
}

fn thresholds(x: &[Vec<f64>], rows: &[usize], f: usize) -> Vec<f64> {
    let mut v: Vec<f64> = rows.iter().map(|&r| x[r][f]).collect();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v.dedup();
    v.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
}

/// Minimum of `Σ_leaves [−½ G²/(2aH+λ) + γ]` over every axis-aligned tree of
/// depth ≤ `depth` built from the node-local midpoint thresholds.
pub fn exhaustive_min(x: &[Vec<f64>], g: &[f64], h: &[f64], p: MicroParams, depth: usize) -> f64 {
    let rows: Vec<usize> = (0..x.len()).collect();
    exhaustive_rows(x, g, h, p, &rows, depth)
}

fn exhaustive_rows(x: &[Vec<f64>], g: &[f64], h: &[f64], p: MicroParams, rows: &[usize], depth: usize) -> f64 {
    let mut best = leaf_objective(rows, g, h, p);
    if depth == 0 {
        return best;
    }
    for f in 0..x[0].len() {
        for t in thresholds(x, rows, f) {
            let (l, r): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&i| x[i][f] < t);
            let v = exhaustive_rows(x, g, h, p, &l, depth - 1) + exhaustive_rows(x, g, h, p, &r, depth - 1);
            best = best.min(v);
        }
    }
    best
}

/// Greedy growth recomputing every sum from scratch at every candidate.
/// Ties keep the first candidate found (lower feature, then smaller threshold).
pub fn greedy_oracle(x: &[Vec<f64>], g: &[f64], h: &[f64], p: MicroParams, depth: usize) -> RefTree {
    let rows: Vec<usize> = (0..x.len()).collect();
    greedy_rows(x, g, h, p, &rows, depth)
}

fn greedy_rows(x: &[Vec<f64>], g: &[f64], h: &[f64], p: MicroParams, rows: &[usize], depth: usize) -> RefTree {
    let score = |rs: &[usize]| {
        let gs: f64 = rs.iter().map(|&r| g[r]).sum();
        let hs: f64 = rs.iter().map(|&r| h[r]).sum();
        gs * gs / (2.0 * p.a * hs + p.lambda)
    };
    if depth > 0 {
        let mut best: Option<(f64, usize, f64)> = None;
        for f in 0..x[0].len() {
            for t in thresholds(x, rows, f) {
                let (l, r): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&i| x[i][f] < t);
                let gain = 0.5 * (score(&l) + score(&r) - score(rows)) - p.gamma;
                if gain > 1e-12 && best.is_none_or(|b| gain > b.0 + 1e-12) {
                    best = Some((gain, f, t));
                }
            }
        }
        if let Some((_, f, t)) = best {
            let (l, r): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&i| x[i][f] < t);
            return RefTree::Split {
                feature: f,
                threshold: t,
                left: Box::new(greedy_rows(x, g, h, p, &l, depth - 1)),
                right: Box::new(greedy_rows(x, g, h, p, &r, depth - 1)),
            };
        }
    }
    let gs: f64 = rows.iter().map(|&r| g[r]).sum();
    let hs: f64 = rows.iter().map(|&r| h[r]).sum();
    RefTree::Leaf(-gs / (2.0 * p.a * hs + p.lambda))
}

/// Objective of a fitted library tree on the rows it was grown on.
pub fn tree_objective(tree: &RegressionTree, x: &[Vec<f64>], g: &[f64], h: &[f64], p: MicroParams) -> f64 {
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for (i, xi) in x.iter().enumerate() {
        groups.entry(tree.leaf_index(xi)).or_default().push(i);
    }
    groups.values().map(|rows| leaf_objective(rows, g, h, p)).sum()
}

/// Checks grad against a central difference of value and hess against a
/// central difference of grad, with step `1e−5·max(1, |θ_j|)` and tolerance
/// `1e−5·(1 + |analytic|)`.
pub fn finite_difference_check(loss: &dyn Loss, theta: &[f64], obs: &Observation) -> Result<(), String> {
    for j in 0..theta.len() {
        let step = 1e-5 * theta[j].abs().max(1.0);
        let mut up = theta.to_vec();
        let mut dn = theta.to_vec();
        up[j] += step;
        dn[j] -= step;
        let fd_grad = (loss.value(&up, obs) - loss.value(&dn, obs)) / (2.0 * step);
        let fd_hess = (loss.grad(j, &up, obs) - loss.grad(j, &dn, obs)) / (2.0 * step);
        let g = loss.grad(j, theta, obs);
        let h = loss.hess(j, theta, obs);
        if (g - fd_grad).abs() > 1e-5 * (1.0 + g.abs()) {
            return Err(format!("{} grad[{j}] at {theta:?}, {obs:?}: {g} vs {fd_grad}", loss.name()));
        }
        if (h - fd_hess).abs() > 1e-5 * (1.0 + h.abs()) {
            return Err(format!("{} hess[{j}] at {theta:?}, {obs:?}: {h} vs {fd_hess}", loss.name()));
        }
    }
    Ok(())
}

/// Log-uniform draw on `[lo, hi]`.
pub fn log_uniform(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    (lo.ln() + (hi.ln() - lo.ln()) * rng.random::<f64>()).exp()
}

/// Random point for the derivative checks of the named loss: θ drawn
/// log-uniformly from `[0.1, 50]` (squared error: uniform on `[−20, 20]`).
pub fn random_point(name: &str, rng: &mut impl Rng) -> (Vec<f64>, Observation) {
    match name {
        "squared_error" => {
            let y = rng.random_range(-20.0..20.0);
            (vec![rng.random_range(-20.0..20.0)], Observation::new(y))
        }
        "gamma" => {
            let y = log_uniform(rng, 0.1, 50.0);
            (vec![log_uniform(rng, 0.1, 50.0)], Observation::new(y))
        }
        "zip" => {
            let y = rng.random_range(0..15u32) as f64;
            (vec![log_uniform(rng, 0.1, 50.0)], Observation::new(y))
        }
        "negbin" => {
            let y = rng.random_range(0..30u32) as f64;
            let obs = Observation {
                y,
                exposure: log_uniform(rng, 0.5, 2.0),
                adjustment: log_uniform(rng, 0.5, 2.0),
            };
            (vec![log_uniform(rng, 0.1, 50.0), log_uniform(rng, 0.1, 50.0)], obs)
        }
        other => panic!("no sampler for {other}"),
    }
}
