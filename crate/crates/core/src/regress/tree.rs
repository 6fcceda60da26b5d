//! CART regression trees with squared-error impurity.
//!
//! Growth is depth-first by default; setting `max_leaf_nodes` switches to
//! best-first expansion ordered by impurity gain (the convention
//! leaf-limited boosting expects). Split ties break to the lowest feature
//! index, then the lowest threshold, so fits are fully deterministic.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::matrix::Matrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeParams {
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    pub min_samples_split: usize,
    pub max_leaf_nodes: Option<usize>,
    /// Features sampled (without replacement) per split; `None` = all.
    pub max_features: Option<usize>,
}

impl Default for TreeParams {
    fn default() -> Self {
        Self {
            max_depth: None,
            min_samples_leaf: 1,
            min_samples_split: 2,
            max_leaf_nodes: None,
            max_features: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
enum Node {
    Leaf {
        value: f64,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    nodes: Vec<Node>,
}

impl DecisionTree {
    pub fn predict(&self, x: &Matrix) -> Vec<f64> {
        (0..x.rows()).map(|r| self.predict_row(x.row(r))).collect()
    }

    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let mut at = 0usize;
        loop {
            match &self.nodes[at] {
                Node::Leaf { value } => return *value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    at = if row[*feature] <= *threshold { *left } else { *right };
                }
            }
        }
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, Node::Leaf { .. }))
            .count()
    }
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    gain: f64,
    left: Vec<usize>,
    right: Vec<usize>,
}

struct Builder<'a> {
    x: &'a Matrix,
    y: &'a [f64],
    params: TreeParams,
}

impl<'a> Builder<'a> {
    fn node_stats(&self, idx: &[usize]) -> (f64, f64) {
        let n = idx.len() as f64;
        let sum: f64 = idx.iter().map(|&i| self.y[i]).sum();
        let sum_sq: f64 = idx.iter().map(|&i| self.y[i] * self.y[i]).sum();
        let mean = sum / n;
        let sse = (sum_sq - sum * sum / n).max(0.0);
        (mean, sse)
    }

    fn candidate_features(&self, rng: &mut Option<&mut ChaCha8Rng>) -> Vec<usize> {
        let d = self.x.cols();
        match (self.params.max_features, rng) {
            (Some(k), Some(rng)) if k < d => {
                // Partial Fisher-Yates, then sorted so the lowest-index
                // tie rule is independent of draw order.
                let mut pool: Vec<usize> = (0..d).collect();
                for i in 0..k {
                    let j = rng.gen_range(i..d);
                    pool.swap(i, j);
                }
                let mut picked = pool[..k].to_vec();
                picked.sort_unstable();
                picked
            }
            _ => (0..d).collect(),
        }
    }

    fn best_split(&self, idx: &[usize], rng: &mut Option<&mut ChaCha8Rng>) -> Option<BestSplit> {
        let n = idx.len();
        if n < self.params.min_samples_split || n < 2 * self.params.min_samples_leaf {
            return None;
        }
        let (_, parent_sse) = self.node_stats(idx);
        if parent_sse <= 0.0 {
            return None;
        }

        let mut best: Option<(usize, f64, f64, usize)> = None; // feature, threshold, gain, split_pos
        let mut best_order: Vec<usize> = Vec::new();

        for feature in self.candidate_features(rng) {
            let mut order: Vec<usize> = idx.to_vec();
            order.sort_by(|&a, &b| {
                self.x
                    .get(a, feature)
                    .partial_cmp(&self.x.get(b, feature))
                    .unwrap()
                    .then(a.cmp(&b))
            });

            let total_sum: f64 = order.iter().map(|&i| self.y[i]).sum();
            let total_sq: f64 = order.iter().map(|&i| self.y[i] * self.y[i]).sum();
            let mut left_sum = 0.0;
            let mut left_sq = 0.0;
            for pos in 1..n {
                let prev = order[pos - 1];
                left_sum += self.y[prev];
                left_sq += self.y[prev] * self.y[prev];
                let v_prev = self.x.get(prev, feature);
                let v_next = self.x.get(order[pos], feature);
                if v_prev == v_next {
                    continue;
                }
                if pos < self.params.min_samples_leaf || n - pos < self.params.min_samples_leaf {
                    continue;
                }
                let nl = pos as f64;
                let nr = (n - pos) as f64;
                let right_sum = total_sum - left_sum;
                let right_sq = total_sq - left_sq;
                let sse_l = (left_sq - left_sum * left_sum / nl).max(0.0);
                let sse_r = (right_sq - right_sum * right_sum / nr).max(0.0);
                let gain = parent_sse - sse_l - sse_r;
                let threshold = v_prev + (v_next - v_prev) / 2.0;
                let better = match &best {
                    None => gain > 1e-15,
                    Some((_, _, bg, _)) => gain > *bg + 1e-15,
                };
                if better {
                    best = Some((feature, threshold, gain, pos));
                    best_order = order.clone();
                }
            }
        }

        best.map(|(feature, threshold, gain, pos)| BestSplit {
            feature,
            threshold,
            gain,
            left: best_order[..pos].to_vec(),
            right: best_order[pos..].to_vec(),
        })
    }
}

/// Fit a tree on all rows of `x`. `rng` is required only when
/// `max_features` subsampling is active.
pub fn fit_tree(
    x: &Matrix,
    y: &[f64],
    params: &TreeParams,
    rng: Option<&mut ChaCha8Rng>,
) -> DecisionTree {
    let idx: Vec<usize> = (0..x.rows()).collect();
    fit_tree_on(x, y, &idx, params, rng)
}

/// Fit a tree on the given row subset (bootstrap samples may repeat rows).
pub fn fit_tree_on(
    x: &Matrix,
    y: &[f64],
    idx: &[usize],
    params: &TreeParams,
    mut rng: Option<&mut ChaCha8Rng>,
) -> DecisionTree {
    let builder = Builder {
        x,
        y,
        params: *params,
    };
    let mut nodes = Vec::new();
    match params.max_leaf_nodes {
        None => {
            grow_depth_first(&builder, idx, 0, &mut nodes, &mut rng);
        }
        Some(cap) => grow_best_first(&builder, idx, cap.max(1), &mut nodes, &mut rng),
    }
    DecisionTree { nodes }
}

fn grow_depth_first(
    b: &Builder,
    idx: &[usize],
    depth: usize,
    nodes: &mut Vec<Node>,
    rng: &mut Option<&mut ChaCha8Rng>,
) -> usize {
    let (mean, _) = b.node_stats(idx);
    let at_depth_limit = b.params.max_depth.map(|d| depth >= d).unwrap_or(false);
    let split = if at_depth_limit { None } else { b.best_split(idx, rng) };
    match split {
        None => {
            nodes.push(Node::Leaf { value: mean });
            nodes.len() - 1
        }
        Some(s) => {
            let slot = nodes.len();
            nodes.push(Node::Leaf { value: mean }); // placeholder
            let left = grow_depth_first(b, &s.left, depth + 1, nodes, rng);
            let right = grow_depth_first(b, &s.right, depth + 1, nodes, rng);
            nodes[slot] = Node::Split {
                feature: s.feature,
                threshold: s.threshold,
                left,
                right,
            };
            slot
        }
    }
}

struct Frontier {
    node_slot: usize,
    depth: usize,
    order: usize,
    split: BestSplit,
}

fn grow_best_first(
    b: &Builder,
    idx: &[usize],
    max_leaves: usize,
    nodes: &mut Vec<Node>,
    rng: &mut Option<&mut ChaCha8Rng>,
) {
    let (mean, _) = b.node_stats(idx);
    nodes.push(Node::Leaf { value: mean });
    let mut frontier: Vec<Frontier> = Vec::new();
    let mut order = 0usize;
    let mut leaves = 1usize;

    let depth_ok = |depth: usize| b.params.max_depth.map(|d| depth < d).unwrap_or(true);
    if depth_ok(0) {
        if let Some(split) = b.best_split(idx, rng) {
            frontier.push(Frontier {
                node_slot: 0,
                depth: 0,
                order,
                split,
            });
            order += 1;
        }
    }

    while leaves < max_leaves && !frontier.is_empty() {
        // Highest gain wins; ties resolve to the earliest-created entry.
        let pick = frontier
            .iter()
            .enumerate()
            .max_by(|(_, a), (_, c)| {
                a.split
                    .gain
                    .partial_cmp(&c.split.gain)
                    .unwrap()
                    .then(c.order.cmp(&a.order))
            })
            .map(|(i, _)| i)
            .unwrap();
        let item = frontier.swap_remove(pick);

        let (left_mean, _) = b.node_stats(&item.split.left);
        let (right_mean, _) = b.node_stats(&item.split.right);
        let left_slot = nodes.len();
        nodes.push(Node::Leaf { value: left_mean });
        let right_slot = nodes.len();
        nodes.push(Node::Leaf { value: right_mean });
        nodes[item.node_slot] = Node::Split {
            feature: item.split.feature,
            threshold: item.split.threshold,
            left: left_slot,
            right: right_slot,
        };
        leaves += 1;

        if depth_ok(item.depth + 1) {
            for (slot, part) in [(left_slot, &item.split.left), (right_slot, &item.split.right)] {
                if let Some(split) = b.best_split(part, rng) {
                    frontier.push(Frontier {
                        node_slot: slot,
                        depth: item.depth + 1,
                        order,
                        split,
                    });
                    order += 1;
                }
            }
        }
    }
}
