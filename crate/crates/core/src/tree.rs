//! Weighted regression trees with a fixed leaf budget.
//!
//! Trees are grown best-first: the leaf whose best split has the largest gain
//! is expanded until the budget `J` is reached or no leaf has a split with
//! positive gain. Split search scans each feature along its presorted order
//! and only considers boundaries between distinct adjacent values.
//!
//! Routing rule (part of the model file contract): a sample goes to the left
//! child iff `x[feature] <= threshold`.

use alloc::vec;
use alloc::vec::Vec;

use crate::data::FeatureOrder;
use crate::error::{Error, Result};

/// Floor applied to every denominator in gains and leaf values.
pub const DENOMINATOR_FLOOR: f64 = 1e-12;

#[inline]
fn floored(x: f64) -> f64 {
    if x > DENOMINATOR_FLOOR {
        x
    } else {
        DENOMINATOR_FLOOR
    }
}

/// How candidate splits are scored.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitCriterion {
    /// Unit-weight least squares on the residuals `g` (mart).
    FirstOrder,
    /// Least squares on `g/h` with weights `h` (logitboost).
    SecondOrder,
}

/// Per-sample residual `g` and weight `h >= 0`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct GradientPair {
    pub g: f64,
    pub h: f64,
}

impl GradientPair {
    pub fn new(g: f64, h: f64) -> Self {
        Self { g, h }
    }
}

/// Aggregates over the samples of one side of a split.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct NodeStats {
    pub sum_g: f64,
    pub sum_h: f64,
    pub count: usize,
}

impl NodeStats {
    #[inline]
    fn add(&mut self, p: GradientPair) {
        self.sum_g += p.g;
        self.sum_h += p.h;
        self.count += 1;
    }

    #[inline]
    fn minus(self, other: NodeStats) -> NodeStats {
        NodeStats {
            sum_g: self.sum_g - other.sum_g,
            sum_h: self.sum_h - other.sum_h,
            count: self.count - other.count,
        }
    }

    fn weight(&self, criterion: SplitCriterion) -> f64 {
        match criterion {
            SplitCriterion::FirstOrder => self.count as f64,
            SplitCriterion::SecondOrder => self.sum_h,
        }
    }

    /// Terminal value `sum_g / max(sum_h, floor)`.
    pub fn leaf_value(&self) -> f64 {
        self.sum_g / floored(self.sum_h)
    }
}

/// Reduction in weighted squared error from splitting a node into `left`
/// and `right`.
///
/// Second order: `GL^2/HL + GR^2/HR - (GL+GR)^2/(HL+HR)`. First order uses the
/// sample counts as weights, i.e. the same expression with every `h = 1`.
/// Each side's denominator is floored at [`DENOMINATOR_FLOOR`] and the parent
/// denominator is the sum of the floored sides, which keeps the result
/// non-negative up to rounding.
#[inline]
pub fn gain_at_split(left: NodeStats, right: NodeStats, criterion: SplitCriterion) -> f64 {
    let wl = floored(left.weight(criterion));
    let wr = floored(right.weight(criterion));
    let total = left.sum_g + right.sum_g;
    left.sum_g * left.sum_g / wl + right.sum_g * right.sum_g / wr - total * total / (wl + wr)
}

/// Threshold strictly between `lo < hi` such that `lo <= t < hi`.
#[inline]
fn midpoint(lo: f64, hi: f64) -> f64 {
    let mid = lo + (hi - lo) * 0.5;
    if mid >= lo && mid < hi {
        mid
    } else {
        lo
    }
}

/// A chosen split: samples with `x[feature] <= threshold` go left.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitCandidate {
    pub feature: usize,
    pub threshold: f64,
    pub gain: f64,
}

/// Best boundary along one feature's sorted sample list.
///
/// Returns the last left position and its gain, only if the gain beats `floor`.
#[inline]
fn scan_feature(
    sorted: &[u32],
    column: &[f64],
    pairs: &[GradientPair],
    total: NodeStats,
    criterion: SplitCriterion,
    min_leaf: usize,
    floor: f64,
) -> Option<(usize, f64)> {
    let n = sorted.len();
    let mut left = NodeStats::default();
    let mut best: Option<(usize, f64)> = None;
    let mut best_gain = floor;
    let last = n - min_leaf;
    for p in 0..last {
        let s = sorted[p] as usize;
        left.add(pairs[s]);
        if p + 1 < min_leaf {
            continue;
        }
        let v = column[s];
        let next = column[sorted[p + 1] as usize];
        if v < next {
            let gain = gain_at_split(left, total.minus(left), criterion);
            if gain > best_gain {
                best_gain = gain;
                best = Some((p, gain));
            }
        }
    }
    best
}

fn check_min_leaf(min_leaf: usize) -> Result<()> {
    if min_leaf == 0 {
        return Err(Error::InvalidParameter {
            name: "min_leaf",
            reason: "must be at least 1".into(),
        });
    }
    Ok(())
}

/// Exhaustive best split of the node holding `samples`.
///
/// Scans every non-constant feature in its sorted order restricted to the
/// node. Ties go to the lower feature index, then the lower threshold.
/// Returns `None` when no boundary has positive gain or the node is smaller
/// than `2 * min_leaf`.
pub fn best_split(
    samples: &[usize],
    pairs: &[GradientPair],
    order: &FeatureOrder,
    criterion: SplitCriterion,
    min_leaf: usize,
) -> Result<Option<SplitCandidate>> {
    check_min_leaf(min_leaf)?;
    if pairs.len() != order.num_samples() {
        return Err(Error::ShapeMismatch {
            expected: order.num_samples(),
            found: pairs.len(),
        });
    }
    if samples.len() < 2 * min_leaf {
        return Ok(None);
    }
    let mut member = vec![false; order.num_samples()];
    let mut total = NodeStats::default();
    for &s in samples {
        member[s] = true;
        total.add(pairs[s]);
    }
    let mut best: Option<SplitCandidate> = None;
    let mut sorted = Vec::with_capacity(samples.len());
    for f in 0..order.num_features() {
        if order.is_constant(f) {
            continue;
        }
        sorted.clear();
        sorted.extend(
            order
                .permutation(f)
                .iter()
                .copied()
                .filter(|&s| member[s as usize]),
        );
        let column = order.column(f);
        let floor = best.map_or(0.0, |b| b.gain);
        if let Some((p, gain)) =
            scan_feature(&sorted, column, pairs, total, criterion, min_leaf, floor)
        {
            best = Some(SplitCandidate {
                feature: f,
                threshold: midpoint(column[sorted[p] as usize], column[sorted[p + 1] as usize]),
                gain,
            });
        }
    }
    Ok(best)
}

/// Tree node. Child ids index into [`RegressionTree::nodes`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Node {
    Split {
        feature: u32,
        threshold: f64,
        left: u32,
        right: u32,
    },
    Leaf {
        value: f64,
    },
}

/// Binary regression tree stored as a node array rooted at index 0.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionTree {
    nodes: Vec<Node>,
    num_features: usize,
}

impl RegressionTree {
    /// Single-leaf tree.
    pub fn constant(value: f64, num_features: usize) -> Self {
        Self {
            nodes: vec![Node::Leaf { value }],
            num_features,
        }
    }

    /// Validates structure: every child id points forward to an existing node,
    /// every node except the root has exactly one parent, and split features
    /// are below `num_features`.
    pub fn from_nodes(nodes: Vec<Node>, num_features: usize) -> Result<Self> {
        let bad = |reason: &str| Error::InvalidParameter {
            name: "tree",
            reason: reason.into(),
        };
        if nodes.is_empty() {
            return Err(bad("no nodes"));
        }
        let mut parents = vec![0u8; nodes.len()];
        for (id, node) in nodes.iter().enumerate() {
            match *node {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    if feature as usize >= num_features {
                        return Err(bad("split feature out of range"));
                    }
                    if threshold.is_nan() {
                        return Err(bad("NaN threshold"));
                    }
                    for child in [left, right] {
                        let c = child as usize;
                        if c <= id || c >= nodes.len() {
                            return Err(bad("child id must point forward to an existing node"));
                        }
                        parents[c] += 1;
                    }
                }
                Node::Leaf { value } => {
                    if !value.is_finite() {
                        return Err(bad("non-finite leaf value"));
                    }
                }
            }
        }
        if parents[0] != 0 || parents[1..].iter().any(|&p| p != 1) {
            return Err(bad("nodes do not form a single binary tree"));
        }
        Ok(Self {
            nodes,
            num_features,
        })
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn num_features(&self) -> usize {
        self.num_features
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, Node::Leaf { .. }))
            .count()
    }

    /// Multiplies every leaf value by `factor`.
    pub fn scale_leaves(&mut self, factor: f64) {
        for node in &mut self.nodes {
            if let Node::Leaf { value } = node {
                *value *= factor;
            }
        }
    }

    /// Id of the leaf reached by `x`. `x` must have `num_features` entries.
    #[inline]
    pub fn leaf_index(&self, x: &[f64]) -> usize {
        let mut id = 0usize;
        loop {
            match self.nodes[id] {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    id = if x[feature as usize] <= threshold {
                        left as usize
                    } else {
                        right as usize
                    };
                }
                Node::Leaf { .. } => return id,
            }
        }
    }

    /// Value of the leaf with node id `id`. Panics if `id` is not a leaf.
    #[inline]
    pub fn leaf_value(&self, id: usize) -> f64 {
        match self.nodes[id] {
            Node::Leaf { value } => value,
            Node::Split { .. } => panic!("node {id} is not a leaf"),
        }
    }

    /// Prediction without the dimension check.
    #[inline]
    pub fn evaluate(&self, x: &[f64]) -> f64 {
        self.leaf_value(self.leaf_index(x))
    }

    /// Routes `x` to its leaf and returns the leaf value.
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.num_features {
            return Err(Error::DimensionMismatch {
                expected: self.num_features,
                found: x.len(),
            });
        }
        Ok(self.evaluate(x))
    }
}

/// Growth parameters for [`fit_tree`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeParams {
    /// Leaf budget `J`.
    pub max_leaves: usize,
    pub criterion: SplitCriterion,
    pub min_leaf: usize,
}

/// Fits a tree and returns it with the leaf id of every training sample.
pub fn fit_tree(
    pairs: &[GradientPair],
    order: &FeatureOrder,
    params: TreeParams,
) -> Result<RegressionTree> {
    fit_tree_assigned(pairs, order, params).map(|(tree, _)| tree)
}

struct OpenLeaf {
    node: u32,
    lo: usize,
    hi: usize,
    stats: NodeStats,
    split: Option<SplitCandidate>,
}

/// Node-partitioned copies of the sort orders. Every node owns the same
/// `[lo, hi)` range in each feature's array (and in `rows`), holding its
/// samples in that feature's sorted order.
struct Workspace<'a> {
    order: &'a FeatureOrder,
    pairs: &'a [GradientPair],
    features: Vec<usize>,
    sorted: Vec<Vec<u32>>,
    rows: Vec<u32>,
    goes_left: Vec<bool>,
    scratch: Vec<u32>,
    criterion: SplitCriterion,
    min_leaf: usize,
}

impl Workspace<'_> {
    fn stats(&self, lo: usize, hi: usize) -> NodeStats {
        let mut stats = NodeStats::default();
        for &s in &self.rows[lo..hi] {
            stats.add(self.pairs[s as usize]);
        }
        stats
    }

    fn best_split(&self, lo: usize, hi: usize, total: NodeStats) -> Option<SplitCandidate> {
        if hi - lo < 2 * self.min_leaf {
            return None;
        }
        let mut best: Option<SplitCandidate> = None;
        for (slot, &f) in self.features.iter().enumerate() {
            let sorted = &self.sorted[slot][lo..hi];
            let column = self.order.column(f);
            let floor = best.map_or(0.0, |b| b.gain);
            if let Some((p, gain)) = scan_feature(
                sorted,
                column,
                self.pairs,
                total,
                self.criterion,
                self.min_leaf,
                floor,
            ) {
                let threshold =
                    midpoint(column[sorted[p] as usize], column[sorted[p + 1] as usize]);
                best = Some(SplitCandidate {
                    feature: f,
                    threshold,
                    gain,
                });
            }
        }
        best
    }

    /// Stable partition of `[lo, hi)` in every array; returns the left size.
    fn partition(&mut self, lo: usize, hi: usize, split: SplitCandidate) -> usize {
        let column = self.order.column(split.feature);
        for &s in &self.rows[lo..hi] {
            self.goes_left[s as usize] = column[s as usize] <= split.threshold;
        }
        let goes_left = &self.goes_left;
        let scratch = &mut self.scratch;
        let mut stable_partition = |seg: &mut [u32]| -> usize {
            scratch.clear();
            let mut w = 0;
            for r in 0..seg.len() {
                let s = seg[r];
                if goes_left[s as usize] {
                    seg[w] = s;
                    w += 1;
                } else {
                    scratch.push(s);
                }
            }
            seg[w..].copy_from_slice(scratch);
            w
        };
        let n_left = stable_partition(&mut self.rows[lo..hi]);
        for arr in &mut self.sorted {
            stable_partition(&mut arr[lo..hi]);
        }
        n_left
    }
}

/// Best-first growth to at most `params.max_leaves` leaves.
///
/// Leaf values are `sum g / max(sum h, floor)`; the caller applies any extra
/// factor and the shrinkage. The second return value maps each training
/// sample to the id of its leaf, which always agrees with routing the sample
/// through the returned tree.
pub fn fit_tree_assigned(
    pairs: &[GradientPair],
    order: &FeatureOrder,
    params: TreeParams,
) -> Result<(RegressionTree, Vec<u32>)> {
    if params.max_leaves < 2 {
        return Err(Error::InvalidParameter {
            name: "J",
            reason: "a tree needs at least 2 terminal nodes".into(),
        });
    }
    check_min_leaf(params.min_leaf)?;
    let n = order.num_samples();
    if pairs.len() != n {
        return Err(Error::ShapeMismatch {
            expected: n,
            found: pairs.len(),
        });
    }
    if n == 0 {
        return Err(Error::NoSamples);
    }
    let features: Vec<usize> = (0..order.num_features())
        .filter(|&f| !order.is_constant(f))
        .collect();
    let sorted = features
        .iter()
        .map(|&f| order.permutation(f).to_vec())
        .collect();
    let mut ws = Workspace {
        order,
        pairs,
        features,
        sorted,
        rows: (0..n as u32).collect(),
        goes_left: vec![false; n],
        scratch: Vec::with_capacity(n),
        criterion: params.criterion,
        min_leaf: params.min_leaf,
    };

    let mut nodes = vec![Node::Leaf { value: 0.0 }];
    let root_stats = ws.stats(0, n);
    let mut open = vec![OpenLeaf {
        node: 0,
        lo: 0,
        hi: n,
        stats: root_stats,
        split: ws.best_split(0, n, root_stats),
    }];

    while open.len() < params.max_leaves {
        // Largest gain; ties to the oldest (lowest id) leaf.
        let mut pick: Option<usize> = None;
        for (i, leaf) in open.iter().enumerate() {
            if let Some(cand) = leaf.split {
                let better = match pick {
                    None => true,
                    Some(j) => {
                        let other = open[j].split.unwrap();
                        cand.gain > other.gain
                            || (cand.gain == other.gain && leaf.node < open[j].node)
                    }
                };
                if better {
                    pick = Some(i);
                }
            }
        }
        let Some(i) = pick else { break };
        let leaf = open.swap_remove(i);
        let split = leaf.split.unwrap();
        let n_left = ws.partition(leaf.lo, leaf.hi, split);
        let mid = leaf.lo + n_left;
        let left_id = nodes.len() as u32;
        nodes[leaf.node as usize] = Node::Split {
            feature: split.feature as u32,
            threshold: split.threshold,
            left: left_id,
            right: left_id + 1,
        };
        nodes.push(Node::Leaf { value: 0.0 });
        nodes.push(Node::Leaf { value: 0.0 });
        for (node, lo, hi) in [(left_id, leaf.lo, mid), (left_id + 1, mid, leaf.hi)] {
            let stats = ws.stats(lo, hi);
            let split = ws.best_split(lo, hi, stats);
            open.push(OpenLeaf {
                node,
                lo,
                hi,
                stats,
                split,
            });
        }
    }

    let mut assignment = vec![0u32; n];
    for leaf in &open {
        nodes[leaf.node as usize] = Node::Leaf {
            value: leaf.stats.leaf_value(),
        };
        for &s in &ws.rows[leaf.lo..leaf.hi] {
            assignment[s as usize] = leaf.node;
        }
    }
    let tree = RegressionTree {
        nodes,
        num_features: order.num_features(),
    };
    Ok((tree, assignment))
}
