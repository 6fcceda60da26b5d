//! Ensemble regressors over CART base learners: AdaBoost.R2, stagewise
//! gradient boosting on squared error, and random forests.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{fit_tree, fit_tree_on, DecisionTree, TreeParams};
use super::TrainingMeta;
use crate::matrix::Matrix;
use crate::rng::seeded;

// ---------------------------------------------------------------------------
// AdaBoost.R2 with square loss and weighted-median prediction.

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub(crate) struct AdaModel {
    trees: Vec<DecisionTree>,
    weights: Vec<f64>,
}

impl AdaModel {
    pub fn predict(&self, x: &Matrix) -> Vec<f64> {
        (0..x.rows())
            .map(|r| {
                let row = x.row(r);
                let mut preds: Vec<(f64, usize)> = self
                    .trees
                    .iter()
                    .enumerate()
                    .map(|(t, tree)| (tree.predict_row(row), t))
                    .collect();
                preds.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
                let total: f64 = self.weights.iter().sum();
                let mut acc = 0.0;
                for (value, t) in &preds {
                    acc += self.weights[*t];
                    if acc >= 0.5 * total {
                        return *value;
                    }
                }
                preds.last().map(|(v, _)| *v).unwrap_or(0.0)
            })
            .collect()
    }
}

/// Draw `m` indices from the weight distribution by inverse-CDF sampling.
fn weighted_bootstrap<R: Rng>(weights: &[f64], rng: &mut R) -> Vec<usize> {
    let m = weights.len();
    let mut cdf = Vec::with_capacity(m);
    let mut acc = 0.0;
    for w in weights {
        acc += w;
        cdf.push(acc);
    }
    let total = acc;
    (0..m)
        .map(|_| {
            let u: f64 = rng.gen_range(0.0..total);
            cdf.partition_point(|&c| c <= u).min(m - 1)
        })
        .collect()
}

pub(crate) fn fit_ada(
    x: &Matrix,
    y: &[f64],
    n_estimators: usize,
    learning_rate: f64,
    max_depth: usize,
    bootstrap: bool,
    seed: u64,
) -> (AdaModel, TrainingMeta) {
    let m = x.rows();
    let params = TreeParams {
        max_depth: if max_depth == 0 { None } else { Some(max_depth) },
        ..TreeParams::default()
    };
    let mut rng = seeded(seed);
    let mut sample_weights = vec![1.0 / m as f64; m];
    let mut trees = Vec::new();
    let mut model_weights = Vec::new();
    let mut rounds = 0;

    for _ in 0..n_estimators {
        rounds += 1;
        let idx = if bootstrap {
            weighted_bootstrap(&sample_weights, &mut rng)
        } else {
            (0..m).collect()
        };
        let tree = fit_tree_on(x, y, &idx, &params, None);
        let pred = tree.predict(x);
        let errors: Vec<f64> = pred.iter().zip(y).map(|(p, t)| (p - t).abs()).collect();
        let max_err = errors.iter().cloned().fold(0.0f64, f64::max);
        if max_err == 0.0 {
            // Perfect learner: give it full confidence and stop.
            trees.push(tree);
            model_weights.push(1.0);
            break;
        }
        // Square loss per the tuned profile.
        let losses: Vec<f64> = errors
            .iter()
            .map(|e| (e / max_err) * (e / max_err))
            .collect();
        let avg_loss: f64 = losses
            .iter()
            .zip(&sample_weights)
            .map(|(l, w)| l * w)
            .sum();
        if avg_loss >= 0.5 {
            if trees.is_empty() {
                trees.push(tree);
                model_weights.push(1.0);
            }
            break;
        }
        let beta = avg_loss / (1.0 - avg_loss);
        model_weights.push(learning_rate * (1.0 / beta).ln());
        trees.push(tree);

        let mut total = 0.0;
        for (w, l) in sample_weights.iter_mut().zip(&losses) {
            *w *= beta.powf(learning_rate * (1.0 - l));
            total += *w;
        }
        for w in &mut sample_weights {
            *w /= total;
        }
    }

    (
        AdaModel {
            trees,
            weights: model_weights,
        },
        TrainingMeta {
            iterations: rounds,
            converged: true,
        },
    )
}

// ---------------------------------------------------------------------------
// Gradient boosting on squared error: F0 = mean(y), stages fit residuals.

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub(crate) struct GbrModel {
    baseline: f64,
    learning_rate: f64,
    trees: Vec<DecisionTree>,
}

impl GbrModel {
    pub fn predict(&self, x: &Matrix) -> Vec<f64> {
        (0..x.rows())
            .map(|r| {
                let row = x.row(r);
                self.baseline
                    + self.learning_rate
                        * self
                            .trees
                            .iter()
                            .map(|t| t.predict_row(row))
                            .sum::<f64>()
            })
            .collect()
    }
}

pub(crate) fn fit_gbr(
    x: &Matrix,
    y: &[f64],
    n_estimators: usize,
    learning_rate: f64,
    max_leaf_nodes: usize,
    max_depth: usize,
) -> GbrModel {
    let m = x.rows();
    let baseline = y.iter().sum::<f64>() / m as f64;
    let params = TreeParams {
        max_depth: if max_depth == 0 { None } else { Some(max_depth) },
        max_leaf_nodes: if max_leaf_nodes == 0 {
            None
        } else {
            Some(max_leaf_nodes)
        },
        ..TreeParams::default()
    };
    let mut current: Vec<f64> = vec![baseline; m];
    let mut trees = Vec::with_capacity(n_estimators);
    for _ in 0..n_estimators {
        let residuals: Vec<f64> = y.iter().zip(&current).map(|(t, f)| t - f).collect();
        let tree = fit_tree(x, &residuals, &params, None);
        let update = tree.predict(x);
        for (f, u) in current.iter_mut().zip(&update) {
            *f += learning_rate * u;
        }
        trees.push(tree);
    }
    GbrModel {
        baseline,
        learning_rate,
        trees,
    }
}

// ---------------------------------------------------------------------------
// Random forest: bagged CART with per-split feature subsampling.

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub(crate) struct RfrModel {
    trees: Vec<DecisionTree>,
}

impl RfrModel {
    pub fn predict(&self, x: &Matrix) -> Vec<f64> {
        let n_trees = self.trees.len() as f64;
        (0..x.rows())
            .map(|r| {
                let row = x.row(r);
                self.trees.iter().map(|t| t.predict_row(row)).sum::<f64>() / n_trees
            })
            .collect()
    }
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn fit_rfr(
    x: &Matrix,
    y: &[f64],
    n_estimators: usize,
    max_features: usize,
    min_samples_split: usize,
    min_samples_leaf: usize,
    bootstrap: bool,
    seed: u64,
) -> RfrModel {
    let m = x.rows();
    let d = x.cols();
    let params = TreeParams {
        min_samples_split: min_samples_split.max(2),
        min_samples_leaf: min_samples_leaf.max(1),
        max_features: if max_features == 0 || max_features >= d {
            None
        } else {
            Some(max_features.min(d))
        },
        ..TreeParams::default()
    };
    // Tree t draws everything from seed + t, so the forest is reproducible
    // regardless of how the members are scheduled.
    let trees: Vec<DecisionTree> = (0..n_estimators)
        .into_par_iter()
        .map(|t| {
            let mut rng = seeded(seed.wrapping_add(t as u64));
            let idx: Vec<usize> = if bootstrap {
                (0..m).map(|_| rng.gen_range(0..m)).collect()
            } else {
                (0..m).collect()
            };
            fit_tree_on(x, y, &idx, &params, Some(&mut rng))
        })
        .collect();
    RfrModel { trees }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{normal_vec, seeded as seed_rng};

    fn friedman_like(m: usize, seed: u64) -> (Matrix, Vec<f64>) {
        let mut rng = seed_rng(seed);
        let rows: Vec<Vec<f64>> = (0..m).map(|_| normal_vec(&mut rng, 3, 0.0, 1.0)).collect();
        let y: Vec<f64> = rows
            .iter()
            .map(|r| r[0].max(0.0) * 2.0 + r[1] - 0.3 * r[2])
            .collect();
        (Matrix::from_rows(&rows).unwrap(), y)
    }

    #[test]
    fn gbr_single_stage_unit_rate_equals_base_tree() {
        let (x, y) = friedman_like(50, 1);
        let gbr = fit_gbr(&x, &y, 1, 1.0, 0, 3);
        let base = fit_tree(
            &x,
            &y,
            &TreeParams {
                max_depth: Some(3),
                ..TreeParams::default()
            },
            None,
        );
        for (a, b) in gbr.predict(&x).iter().zip(base.predict(&x)) {
            assert!((a - b).abs() <= 1e-9);
        }
    }

    #[test]
    fn rfr_single_tree_no_subsampling_equals_cart() {
        let (x, y) = friedman_like(40, 2);
        let rfr = fit_rfr(&x, &y, 1, 0, 2, 1, false, 7);
        let base = fit_tree(&x, &y, &TreeParams::default(), None);
        assert_eq!(rfr.predict(&x), base.predict(&x));
    }

    #[test]
    fn ada_single_round_no_bootstrap_equals_base_tree() {
        let (x, y) = friedman_like(40, 3);
        let (ada, _) = fit_ada(&x, &y, 1, 0.1, 3, false, 7);
        let base = fit_tree(
            &x,
            &y,
            &TreeParams {
                max_depth: Some(3),
                ..TreeParams::default()
            },
            None,
        );
        assert_eq!(ada.predict(&x), base.predict(&x));
    }

    #[test]
    fn more_boosting_stages_reduce_training_error() {
        let (x, y) = friedman_like(80, 4);
        let sse = |model: &GbrModel| {
            model
                .predict(&x)
                .iter()
                .zip(&y)
                .map(|(p, t)| (p - t) * (p - t))
                .sum::<f64>()
        };
        let few = fit_gbr(&x, &y, 5, 0.1, 8, 0);
        let many = fit_gbr(&x, &y, 60, 0.1, 8, 0);
        assert!(sse(&many) < sse(&few));
    }

    #[test]
    fn rfr_is_deterministic_across_runs() {
        let (x, y) = friedman_like(40, 5);
        let a = fit_rfr(&x, &y, 16, 2, 2, 1, true, 11);
        let b = fit_rfr(&x, &y, 16, 2, 2, 1, true, 11);
        assert_eq!(a.predict(&x), b.predict(&x));
    }

    #[test]
    fn ada_weighted_median_is_a_training_prediction() {
        let (x, y) = friedman_like(30, 6);
        let (ada, _) = fit_ada(&x, &y, 10, 0.5, 3, true, 13);
        // Weighted median always returns one of the member predictions.
        let row = x.row(0);
        let members: Vec<f64> = ada.trees.iter().map(|t| t.predict_row(row)).collect();
        let p = ada.predict(&x)[0];
        assert!(members.iter().any(|m| (m - p).abs() < 1e-15));
    }
}
