//! Regression tree used purely to partition rows into strata.
//!
//! The tree is fit on every feature except the one of interest; its leaves
//! group rows whose remaining features are similar. Nothing here predicts.

use rand::seq::index;

use crate::error::{Error, Result};
use crate::rng::{self, StreamRng};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StratifyParams {
    pub min_samples_leaf: usize,
    /// Fraction of columns considered at each split, in `(0, 1]`.
    pub max_features: f64,
    pub rng_seed: u64,
}

impl Default for StratifyParams {
    fn default() -> Self {
        StratifyParams {
            min_samples_leaf: 10,
            max_features: 1.0,
            rng_seed: 0,
        }
    }
}

impl StratifyParams {
    pub fn validate(&self) -> Result<()> {
        if self.min_samples_leaf < 2 {
            return Err(Error::InvalidParams(format!(
                "min_samples_leaf must be at least 2, got {}",
                self.min_samples_leaf
            )));
        }
        if !(self.max_features > 0.0 && self.max_features <= 1.0) {
            return Err(Error::InvalidParams(format!(
                "max_features must be in (0, 1], got {}",
                self.max_features
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    /// Rows with `x[feature] <= threshold` go to `left`.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    /// Row indices in ascending order.
    Leaf { rows: Vec<usize> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct StratTree {
    nodes: Vec<Node>,
    n_rows: usize,
}

impl StratTree {
    /// Node arena; index 0 is the root.
    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    /// Leaf row sets in left-to-right order.
    pub fn leaves(&self) -> Vec<&[usize]> {
        let mut out = Vec::new();
        let mut stack = vec![0usize];
        while let Some(id) = stack.pop() {
            match &self.nodes[id] {
                Node::Leaf { rows } => out.push(rows.as_slice()),
                Node::Split { left, right, .. } => {
                    stack.push(*right);
                    stack.push(*left);
                }
            }
        }
        out
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, Node::Leaf { .. }))
            .count()
    }
}

/// Greedy CART regression tree over `columns` (column-major) and `y`.
///
/// Splits minimise the summed squared error of the two children, are only
/// taken when both children keep `min_samples_leaf` rows and the error
/// strictly drops, and tie-break on lowest column then lowest threshold.
pub fn fit_stratification<C: AsRef<[f64]>>(
    columns: &[C],
    y: &[f64],
    params: &StratifyParams,
) -> Result<StratTree> {
    params.validate()?;
    if columns.is_empty() || y.is_empty() {
        return Err(Error::EmptyMatrix);
    }
    let n = y.len();
    let columns: Vec<&[f64]> = columns.iter().map(AsRef::as_ref).collect();
    for col in &columns {
        if col.len() != n {
            return Err(Error::LengthMismatch {
                what: "feature column",
                got: col.len(),
                expected: n,
            });
        }
    }

    let mut splitter = Splitter::new(&columns, y, params);
    let mut nodes = vec![Node::Leaf {
        rows: (0..n).collect(),
    }];
    let mut stack = vec![0usize];
    while let Some(id) = stack.pop() {
        let rows = match &mut nodes[id] {
            Node::Leaf { rows } => std::mem::take(rows),
            Node::Split { .. } => unreachable!("split nodes are never re-queued"),
        };
        match splitter.best_split(&rows) {
            None => nodes[id] = Node::Leaf { rows },
            Some((feature, threshold)) => {
                let col = columns[feature];
                let (left_rows, right_rows): (Vec<usize>, Vec<usize>) =
                    rows.into_iter().partition(|&r| col[r] <= threshold);
                let left = nodes.len();
                nodes.push(Node::Leaf { rows: left_rows });
                let right = nodes.len();
                nodes.push(Node::Leaf { rows: right_rows });
                nodes[id] = Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                };
                stack.push(right);
                stack.push(left);
            }
        }
    }
    Ok(StratTree { nodes, n_rows: n })
}

/// Relative error reduction below which a split is treated as no gain.
const MIN_RELATIVE_GAIN: f64 = 1e-12;

struct Splitter<'a> {
    columns: &'a [&'a [f64]],
    y: &'a [f64],
    min_leaf: usize,
    n_candidates: usize,
    rng: StreamRng,
    pairs: Vec<(f64, f64)>,
    suffix: Vec<(f64, f64)>,
    ys: Vec<f64>,
}

impl<'a> Splitter<'a> {
    fn new(columns: &'a [&'a [f64]], y: &'a [f64], params: &StratifyParams) -> Self {
        let p = columns.len();
        let n_candidates = ((params.max_features * p as f64).ceil() as usize).clamp(1, p);
        Splitter {
            columns,
            y,
            min_leaf: params.min_samples_leaf,
            n_candidates,
            rng: rng::stream(params.rng_seed, rng::TREE_STREAM),
            pairs: Vec::new(),
            suffix: Vec::new(),
            ys: Vec::new(),
        }
    }

    fn candidate_columns(&mut self) -> Vec<usize> {
        let p = self.columns.len();
        if self.n_candidates >= p {
            return (0..p).collect();
        }
        let mut cols = index::sample(&mut self.rng, p, self.n_candidates).into_vec();
        cols.sort_unstable();
        cols
    }

    fn best_split(&mut self, rows: &[usize]) -> Option<(usize, f64)> {
        let m = rows.len();
        if m < 2 * self.min_leaf {
            return None;
        }
        let first = self.y[rows[0]];
        if rows.iter().all(|&r| self.y[r] == first) {
            return None;
        }

        // All sums run over value-sorted sequences so the outcome does not
        // depend on the order rows arrive in.
        self.ys.clear();
        self.ys.extend(rows.iter().map(|&r| self.y[r]));
        self.ys.sort_unstable_by(f64::total_cmp);
        let mean = self.ys.iter().sum::<f64>() / m as f64;
        let parent_sse: f64 = self.ys.iter().map(|v| (v - mean) * (v - mean)).sum();
        if parent_sse <= 0.0 {
            return None;
        }

        let mut best: Option<(usize, f64, f64)> = None;
        for c in self.candidate_columns() {
            let col = self.columns[c];
            self.pairs.clear();
            self.pairs
                .extend(rows.iter().map(|&r| (col[r], self.y[r] - mean)));
            self.pairs
                .sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
            if self.pairs[0].0 == self.pairs[m - 1].0 {
                continue;
            }

            self.suffix.clear();
            self.suffix.resize(m + 1, (0.0, 0.0));
            for i in (0..m).rev() {
                let v = self.pairs[i].1;
                let (s1, s2) = self.suffix[i + 1];
                self.suffix[i] = (s1 + v, s2 + v * v);
            }

            let (mut s1, mut s2) = (0.0, 0.0);
            for i in 1..m {
                let v = self.pairs[i - 1].1;
                s1 += v;
                s2 += v * v;
                if i < self.min_leaf || m - i < self.min_leaf {
                    continue;
                }
                let (lo, hi) = (self.pairs[i - 1].0, self.pairs[i].0);
                if lo == hi {
                    continue;
                }
                let (r1, r2) = self.suffix[i];
                let sse_left = (s2 - s1 * s1 / i as f64).max(0.0);
                let sse_right = (r2 - r1 * r1 / (m - i) as f64).max(0.0);
                let total = sse_left + sse_right;
                if best.is_none_or(|(_, _, b)| total < b) {
                    best = Some((c, midpoint(lo, hi), total));
                }
            }
        }

        let (feature, threshold, sse) = best?;
        if parent_sse - sse > MIN_RELATIVE_GAIN * parent_sse {
            Some((feature, threshold))
        } else {
            None
        }
    }
}

/// Midpoint of `lo < hi` that still separates them under `x <= t`.
fn midpoint(lo: f64, hi: f64) -> f64 {
    let mid = lo + (hi - lo) * 0.5;
    if mid >= hi {
        lo
    } else {
        mid
    }
}
