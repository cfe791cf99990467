//! Regression trees grown by exact greedy split search.
//!
//! For a node with gradient sum `G` and clipped-curvature sum `H`, the
//! optimal leaf weight and its score are
//!
//! ```text
//! ω* = −G / (2a·H + λ)        score = G² / (2a·H + λ)
//! ```
//!
//! and a split is worth `½[score(L) + score(R) − score(L ∪ R)] − γ`.
//! Candidate thresholds are midpoints between consecutive distinct feature
//! values; a row goes left iff `x[feature] < threshold`.

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Per-sample first-order statistic and clipped second-order statistic.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GradPair {
    pub g: f64,
    /// `max(0, h)`, never negative.
    pub h_eff: f64,
}

impl GradPair {
    pub fn new(g: f64, h_eff: f64) -> Self {
        GradPair { g, h_eff }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeParams {
    /// Per-leaf penalty γ; also the minimum gain a split must exceed.
    pub gamma_reg: f64,
    /// L2 penalty λ on leaf weights.
    pub lambda_reg: f64,
    /// Curvature weight `a ∈ [0, ½]`.
    pub a: f64,
    pub max_depth: usize,
    pub min_leaf_samples: usize,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            gamma_reg: 0.0,
            lambda_reg: 1.0,
            a: 0.5,
            max_depth: 3,
            min_leaf_samples: 1,
        }
    }
}

impl TreeParams {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::InvalidParameter(m));
        if !(self.gamma_reg >= 0.0 && self.gamma_reg.is_finite()) {
            return fail(format!("gamma_reg must be ≥ 0, got {}", self.gamma_reg));
        }
        if !(self.lambda_reg >= 0.0 && self.lambda_reg.is_finite()) {
            return fail(format!("lambda_reg must be ≥ 0, got {}", self.lambda_reg));
        }
        if !(0.0..=0.5).contains(&self.a) {
            return fail(format!("a must lie in [0, 0.5], got {}", self.a));
        }
        if self.a == 0.0 && self.lambda_reg == 0.0 {
            return fail("lambda_reg must be positive when a = 0".into());
        }
        if self.max_depth == 0 {
            return fail("max_depth must be ≥ 1".into());
        }
        if self.min_leaf_samples == 0 {
            return fail("min_leaf_samples must be ≥ 1".into());
        }
        Ok(())
    }
}

#[inline]
fn denom(sum_h_eff: f64, a: f64, lambda_reg: f64) -> f64 {
    2.0 * a * sum_h_eff + lambda_reg
}

fn check_denom(d: f64) -> Result<()> {
    if d > 0.0 && d.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "leaf denominator 2a·Σmax(0,h) + λ = {d} is not positive; use lambda_reg > 0"
        )))
    }
}

/// `−sum_g / (2a·sum_h_eff + λ)`.
pub fn leaf_weight(sum_g: f64, sum_h_eff: f64, a: f64, lambda_reg: f64) -> Result<f64> {
    let d = denom(sum_h_eff, a, lambda_reg);
    check_denom(d)?;
    Ok(-sum_g / d)
}

/// `sum_g² / (2a·sum_h_eff + λ)`.
pub fn leaf_score(sum_g: f64, sum_h_eff: f64, a: f64, lambda_reg: f64) -> Result<f64> {
    let d = denom(sum_h_eff, a, lambda_reg);
    check_denom(d)?;
    Ok(sum_g * sum_g / d)
}

/// Loss reduction of splitting a node into `left` and `right`, each given as
/// `(sum_g, sum_h_eff)`.
pub fn split_gain(left: (f64, f64), right: (f64, f64), params: &TreeParams) -> Result<f64> {
    let (a, l) = (params.a, params.lambda_reg);
    let parent = (left.0 + right.0, left.1 + right.1);
    let s = leaf_score(left.0, left.1, a, l)? + leaf_score(right.0, right.1, a, l)?
        - leaf_score(parent.0, parent.1, a, l)?;
    Ok(0.5 * s - params.gamma_reg)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        weight: f64,
    },
}

/// Binary regression tree; node 0 is the root.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionTree {
    nodes: Vec<Node>,
}

impl RegressionTree {
    pub fn leaf(weight: f64) -> Self {
        RegressionTree {
            nodes: vec![Node::Leaf { weight }],
        }
    }

    /// Validates that `nodes` form a proper binary tree rooted at 0: every
    /// node is reached exactly once, features are below `n_features`, and
    /// all numbers are finite.
    pub fn from_nodes(nodes: Vec<Node>, n_features: usize) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::Structure("tree has no nodes".into()));
        }
        let mut seen = vec![false; nodes.len()];
        let mut stack = vec![0usize];
        while let Some(i) = stack.pop() {
            if seen[i] {
                return Err(Error::Structure(format!("node {i} reached twice (cycle or shared child)")));
            }
            seen[i] = true;
            match nodes[i] {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    if feature >= n_features {
                        return Err(Error::Structure(format!(
                            "node {i} splits on feature {feature}, model has {n_features}"
                        )));
                    }
                    if !threshold.is_finite() {
                        return Err(Error::Structure(format!("node {i} has a non-finite threshold")));
                    }
                    for c in [left, right] {
                        if c >= nodes.len() {
                            return Err(Error::Structure(format!("node {i} points to missing node {c}")));
                        }
                        stack.push(c);
                    }
                }
                Node::Leaf { weight } => {
                    if !weight.is_finite() {
                        return Err(Error::Structure(format!("leaf {i} has a non-finite weight")));
                    }
                }
            }
        }
        if let Some(i) = seen.iter().position(|s| !s) {
            return Err(Error::Structure(format!("node {i} is unreachable from the root")));
        }
        Ok(RegressionTree { nodes })
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }

    pub fn depth(&self) -> usize {
        fn go(nodes: &[Node], i: usize) -> usize {
            match nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + go(nodes, left).max(go(nodes, right)),
            }
        }
        go(&self.nodes, 0)
    }

    /// Index of the leaf node `x` is routed to.
    pub fn leaf_index(&self, x: &[f64]) -> usize {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf { .. } => return i,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if x[feature] < threshold { left } else { right },
            }
        }
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        match self.nodes[self.leaf_index(x)] {
            Node::Leaf { weight } => weight,
            Node::Split { .. } => unreachable!("leaf_index returns leaves"),
        }
    }

    fn predict_row(&self, ds: &Dataset, row: usize) -> f64 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf { weight } => return weight,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if ds.value(row, feature) < threshold { left } else { right },
            }
        }
    }
}

/// Routes `x` through `tree` and returns the reached leaf weight.
pub fn predict_tree(tree: &RegressionTree, x: &[f64]) -> Result<f64> {
    let m = tree
        .nodes
        .iter()
        .filter_map(|n| match n {
            Node::Split { feature, .. } => Some(feature + 1),
            Node::Leaf { .. } => None,
        })
        .max()
        .unwrap_or(0);
    if x.len() < m {
        return Err(Error::Arity {
            expected: m,
            got: x.len(),
            names: "tree features".into(),
        });
    }
    Ok(tree.predict(x))
}

/// Row indices of every feature, sorted by feature value (ties by row).
/// Computed once per dataset and reused across boosting rounds.
#[derive(Debug, Clone)]
pub struct FeatureOrder {
    order: Vec<Vec<u32>>,
}

impl FeatureOrder {
    pub fn new(ds: &Dataset) -> Self {
        let order = (0..ds.n_features())
            .into_par_iter()
            .map(|j| {
                let col = ds.column(j);
                let mut idx: Vec<u32> = (0..ds.n_rows() as u32).collect();
                idx.sort_by(|&a, &b| col[a as usize].total_cmp(&col[b as usize]).then(a.cmp(&b)));
                idx
            })
            .collect();
        FeatureOrder { order }
    }
}

/// A fitted tree together with the leaf weight assigned to every row of the
/// subset it was grown on (`NaN` for rows outside the subset).
#[derive(Debug, Clone)]
pub struct FittedTree {
    pub tree: RegressionTree,
    pub row_values: Vec<f64>,
}

/// Grows one tree on `rows` of `ds`. `grads` is indexed by dataset row.
pub fn build_tree(
    grads: &[GradPair],
    ds: &Dataset,
    rows: &[usize],
    params: &TreeParams,
) -> Result<RegressionTree> {
    Ok(build_tree_sorted(grads, ds, &FeatureOrder::new(ds), rows, params)?.tree)
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    gain: f64,
    feature: usize,
    threshold: f64,
}

#[derive(Debug, Clone, Copy)]
struct Pending {
    node: usize,
    sum_g: f64,
    sum_h: f64,
    count: usize,
}

const NONE: u32 = u32::MAX;

/// [`build_tree`] with a precomputed [`FeatureOrder`]. Grows level by level:
/// one pass per feature per level evaluates the candidates of every open
/// node at once.
pub fn build_tree_sorted(
    grads: &[GradPair],
    ds: &Dataset,
    order: &FeatureOrder,
    rows: &[usize],
    params: &TreeParams,
) -> Result<FittedTree> {
    params.validate()?;
    if rows.is_empty() {
        return Err(Error::InvalidParameter("cannot grow a tree on an empty row set".into()));
    }
    if grads.len() != ds.n_rows() {
        return Err(Error::InvalidParameter(format!(
            "{} gradient pairs for {} rows",
            grads.len(),
            ds.n_rows()
        )));
    }

    let n = ds.n_rows();
    // slot of the open node each row currently sits in
    let mut slot_of = vec![NONE; n];
    // final leaf node id of each row
    let mut node_of = vec![usize::MAX; n];
    let mut in_subset: Vec<usize> = rows.to_vec();
    in_subset.sort_unstable();
    in_subset.dedup();
    for &r in &in_subset {
        slot_of[r] = 0;
        node_of[r] = 0;
    }

    let mut nodes = vec![Node::Leaf { weight: 0.0 }];
    let mut open = vec![Pending {
        node: 0,
        sum_g: 0.0,
        sum_h: 0.0,
        count: 0,
    }];
    accumulate(&mut open, &in_subset, &slot_of, grads);

    let mut depth = 0;
    while !open.is_empty() && depth < params.max_depth {
        let best = best_splits(grads, ds, order, &slot_of, &open, params);
        let mut next = Vec::new();
        // open slot → (left slot, right slot) in `next`
        let mut child_slots = vec![None; open.len()];
        for (k, cand) in best.iter().enumerate() {
            let Some(c) = cand else {
                continue;
            };
            let left = nodes.len();
            nodes.push(Node::Leaf { weight: 0.0 });
            nodes.push(Node::Leaf { weight: 0.0 });
            nodes[open[k].node] = Node::Split {
                feature: c.feature,
                threshold: c.threshold,
                left,
                right: left + 1,
            };
            child_slots[k] = Some((next.len() as u32, c.feature, c.threshold));
            for node in [left, left + 1] {
                next.push(Pending {
                    node,
                    sum_g: 0.0,
                    sum_h: 0.0,
                    count: 0,
                });
            }
        }
        for &r in &in_subset {
            let s = slot_of[r];
            if s == NONE {
                continue;
            }
            match child_slots[s as usize] {
                Some((base, feature, threshold)) => {
                    let child = if ds.value(r, feature) < threshold { base } else { base + 1 };
                    slot_of[r] = child;
                    node_of[r] = next[child as usize].node;
                }
                None => slot_of[r] = NONE,
            }
        }
        // nodes that did not split are final
        for (k, p) in open.iter().enumerate() {
            if child_slots[k].is_none() {
                set_leaf(&mut nodes, p, params)?;
            }
        }
        accumulate(&mut next, &in_subset, &slot_of, grads);
        open = next;
        depth += 1;
    }
    for p in &open {
        set_leaf(&mut nodes, p, params)?;
    }

    let mut row_values = vec![f64::NAN; n];
    for &r in &in_subset {
        if let Node::Leaf { weight } = nodes[node_of[r]] {
            row_values[r] = weight;
        }
    }
    Ok(FittedTree {
        tree: RegressionTree { nodes },
        row_values,
    })
}

fn accumulate(open: &mut [Pending], rows: &[usize], slot_of: &[u32], grads: &[GradPair]) {
    for &r in rows {
        let s = slot_of[r];
        if s != NONE {
            let p = &mut open[s as usize];
            p.sum_g += grads[r].g;
            p.sum_h += grads[r].h_eff;
            p.count += 1;
        }
    }
}

fn set_leaf(nodes: &mut [Node], p: &Pending, params: &TreeParams) -> Result<()> {
    let weight = leaf_weight(p.sum_g, p.sum_h, params.a, params.lambda_reg)?;
    nodes[p.node] = Node::Leaf { weight };
    Ok(())
}

fn best_splits(
    grads: &[GradPair],
    ds: &Dataset,
    order: &FeatureOrder,
    slot_of: &[u32],
    open: &[Pending],
    params: &TreeParams,
) -> Vec<Option<Candidate>> {
    let (a, lambda) = (params.a, params.lambda_reg);
    let score = |g: f64, h: f64| {
        let d = denom(h, a, lambda);
        if d > 0.0 {
            Some(g * g / d)
        } else {
            None
        }
    };
    let parent_scores: Vec<Option<f64>> = open.iter().map(|p| score(p.sum_g, p.sum_h)).collect();
    let min_leaf = params.min_leaf_samples;

    let per_feature: Vec<Vec<Option<Candidate>>> = (0..ds.n_features())
        .into_par_iter()
        .map(|f| {
            let col = ds.column(f);
            // running left statistics per open node: (G, H, count, last value)
            let mut run = vec![(0.0f64, 0.0f64, 0usize, f64::NAN); open.len()];
            let mut best: Vec<Option<Candidate>> = vec![None; open.len()];
            for &r in &order.order[f] {
                let r = r as usize;
                let s = slot_of[r];
                if s == NONE {
                    continue;
                }
                let s = s as usize;
                let x = col[r];
                let (gl, hl, nl, last) = run[s];
                if nl > 0 && x > last {
                    let p = &open[s];
                    let nr = p.count - nl;
                    if nl >= min_leaf && nr >= min_leaf {
                        let (gr, hr) = (p.sum_g - gl, (p.sum_h - hl).max(0.0));
                        if let (Some(sl), Some(sr), Some(sp)) =
                            (score(gl, hl), score(gr, hr), parent_scores[s])
                        {
                            let gain = 0.5 * (sl + sr - sp) - params.gamma_reg;
                            if gain > 0.0 && best[s].is_none_or(|b| gain > b.gain) {
                                best[s] = Some(Candidate {
                                    gain,
                                    feature: f,
                                    threshold: midpoint(last, x),
                                });
                            }
                        }
                    }
                }
                let gp = grads[r];
                run[s] = (gl + gp.g, hl + gp.h_eff, nl + 1, x);
            }
            best
        })
        .collect();

    // lowest feature index wins ties; gains within TIE_RTOL are ties, since the
    // same partition reached through two features sums in different orders
    (0..open.len())
        .map(|s| {
            per_feature
                .iter()
                .filter_map(|cands| cands[s])
                .fold(None, |acc: Option<Candidate>, c| match acc {
                    Some(b) if c.gain <= b.gain * (1.0 + TIE_RTOL) => Some(b),
                    _ => Some(c),
                })
        })
        .collect()
}

const TIE_RTOL: f64 = 1e-12;

/// Threshold strictly above `lo` and at most `hi`, so `lo` routes left and
/// `hi` routes right.
fn midpoint(lo: f64, hi: f64) -> f64 {
    let mid = 0.5 * (lo + hi);
    if mid > lo {
        mid
    } else {
        hi
    }
}

/// Predictions of `tree` for every row of `ds`.
pub fn predict_rows(tree: &RegressionTree, ds: &Dataset) -> Vec<f64> {
    (0..ds.n_rows()).map(|i| tree.predict_row(ds, i)).collect()
}
