//! Error metrics and the repeated K-fold grid-search tuner.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::regress::{self, RegressorConfig, RegressorFamily};
use crate::rng::{permutation, seeded};

/// Entries with `|y| < MAPE_EPS` are skipped by MAPE (and counted).
pub const MAPE_EPS: f64 = 1e-12;

/// The five evaluation criteria.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    R2,
    Mse,
    Rmse,
    Mae,
    Mape,
}

impl Metric {
    pub const ALL: [Metric; 5] = [Metric::R2, Metric::Mse, Metric::Rmse, Metric::Mae, Metric::Mape];

    pub fn as_str(&self) -> &'static str {
        match self {
            Metric::R2 => "r2",
            Metric::Mse => "mse",
            Metric::Rmse => "rmse",
            Metric::Mae => "mae",
            Metric::Mape => "mape",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        Self::ALL
            .iter()
            .find(|m| m.as_str() == lower)
            .copied()
            .ok_or_else(|| Error::InvalidParam(format!("unknown metric {s:?}")))
    }

    /// R2 is a score (higher is better); the rest are errors.
    pub fn prefers_higher(&self) -> bool {
        matches!(self, Metric::R2)
    }

    /// True when `a` is a strictly better value than `b`.
    pub fn better(&self, a: f64, b: f64) -> bool {
        if self.prefers_higher() {
            a > b
        } else {
            a < b
        }
    }

    /// The value every real result beats.
    pub fn worst(&self) -> f64 {
        if self.prefers_higher() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    }
}

impl std::fmt::Display for Metric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// All five criteria for one prediction vector.
///
/// `mape` is `None` when every target was below [`MAPE_EPS`];
/// `mape_skipped` counts the skipped entries otherwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub r2: f64,
    pub mse: f64,
    pub rmse: f64,
    pub mae: f64,
    pub mape: Option<f64>,
    pub mape_skipped: usize,
    pub n: usize,
}

impl MetricReport {
    pub fn value(&self, metric: Metric) -> f64 {
        match metric {
            Metric::R2 => self.r2,
            Metric::Mse => self.mse,
            Metric::Rmse => self.rmse,
            Metric::Mae => self.mae,
            Metric::Mape => self.mape.unwrap_or(f64::INFINITY),
        }
    }
}

/// Compute all five metrics.
///
/// R2 is the standard coefficient of determination with both sums squared.
/// On a constant target it degenerates: 1 when residuals vanish, else 0.
pub fn metrics(y: &[f64], yhat: &[f64]) -> Result<MetricReport> {
    if y.len() != yhat.len() {
        return Err(Error::Shape(format!(
            "length mismatch: y has {}, yhat has {}",
            y.len(),
            yhat.len()
        )));
    }
    if y.is_empty() {
        return Err(Error::EmptyInput("empty metric input".into()));
    }
    if y.iter().chain(yhat).any(|v| !v.is_finite()) {
        return Err(Error::NumericInput("non-finite metric input".into()));
    }

    let n = y.len();
    let nf = n as f64;
    let mean_y = y.iter().sum::<f64>() / nf;

    let mut ss_res = 0.0;
    let mut ss_tot = 0.0;
    let mut abs_sum = 0.0;
    let mut mape_sum = 0.0;
    let mut mape_n = 0usize;
    for i in 0..n {
        let e = y[i] - yhat[i];
        ss_res += e * e;
        abs_sum += e.abs();
        let d = y[i] - mean_y;
        ss_tot += d * d;
        if y[i].abs() >= MAPE_EPS {
            mape_sum += (e / y[i]).abs();
            mape_n += 1;
        }
    }

    let mse = ss_res / nf;
    let r2 = if ss_tot > 0.0 {
        1.0 - ss_res / ss_tot
    } else if ss_res == 0.0 {
        1.0
    } else {
        0.0
    };
    let mape = if mape_n > 0 {
        Some(100.0 / mape_n as f64 * mape_sum)
    } else {
        None
    };

    Ok(MetricReport {
        r2,
        mse,
        rmse: mse.sqrt(),
        mae: abs_sum / nf,
        mape,
        mape_skipped: n - mape_n,
        n,
    })
}

/// One metric value; undefined MAPE evaluates to the metric's worst value.
pub fn score(y: &[f64], yhat: &[f64], metric: Metric) -> Result<f64> {
    Ok(metrics(y, yhat)?.value(metric))
}

/// Contiguous K-fold index blocks over `m` rows, optionally on a seeded
/// permutation. The first `m % folds` folds take the extra row.
pub fn kfold_indices(m: usize, folds: usize, shuffle_seed: Option<u64>) -> Vec<(Vec<usize>, Vec<usize>)> {
    let order: Vec<usize> = match shuffle_seed {
        Some(seed) => permutation(&mut seeded(seed), m),
        None => (0..m).collect(),
    };
    let base = m / folds;
    let extra = m % folds;
    let mut out = Vec::with_capacity(folds);
    let mut start = 0usize;
    for f in 0..folds {
        let size = base + usize::from(f < extra);
        let test: Vec<usize> = order[start..start + size].to_vec();
        let train: Vec<usize> = order[..start]
            .iter()
            .chain(&order[start + size..])
            .copied()
            .collect();
        out.push((train, test));
        start += size;
    }
    out
}

/// Scores of one hyperparameter candidate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateResult {
    pub params: BTreeMap<String, f64>,
    pub mean: f64,
    /// Population standard deviation over the fold scores.
    pub std: f64,
    /// `K * repeats` fold scores, repeat-major.
    pub fold_scores: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSearchResult {
    pub family: RegressorFamily,
    pub metric: Metric,
    pub best_params: BTreeMap<String, f64>,
    pub best_index: usize,
    pub candidates: Vec<CandidateResult>,
}

impl GridSearchResult {
    pub fn best_config(&self, seed: u64) -> RegressorConfig {
        let mut config = RegressorConfig::new(self.family).with_seed(seed);
        for (k, v) in &self.best_params {
            config = config.with(k, *v);
        }
        config
    }
}

fn cartesian_product(grid: &BTreeMap<String, Vec<f64>>) -> Vec<BTreeMap<String, f64>> {
    let mut out: Vec<BTreeMap<String, f64>> = vec![BTreeMap::new()];
    for (key, values) in grid {
        let mut next = Vec::with_capacity(out.len() * values.len());
        for partial in &out {
            for v in values {
                let mut p = partial.clone();
                p.insert(key.clone(), *v);
                next.push(p);
            }
        }
        out = next;
    }
    out
}

/// Exhaustive grid search scored by `repeats` independent seeded K-fold
/// rounds (fold shuffles use `seed + repeat_index`). Candidates are ranked
/// by mean fold score; ties keep the earlier candidate in product order.
#[allow(clippy::too_many_arguments)]
pub fn grid_search(
    grid: &BTreeMap<String, Vec<f64>>,
    family: RegressorFamily,
    x: &Matrix,
    y: &[f64],
    k: usize,
    repeats: usize,
    metric: Metric,
    seed: u64,
) -> Result<GridSearchResult> {
    if grid.is_empty() || grid.values().any(|v| v.is_empty()) {
        return Err(Error::EmptyInput("empty hyperparameter grid".into()));
    }
    if k < 2 {
        return Err(Error::InvalidParam("grid search needs k >= 2".into()));
    }
    if x.rows() < k {
        return Err(Error::InsufficientSamples {
            required: k,
            actual: x.rows(),
        });
    }
    if repeats < 1 {
        return Err(Error::InvalidParam("repeats must be >= 1".into()));
    }

    let mut candidates = Vec::new();
    let mut best_index = 0usize;
    let mut best_mean = metric.worst();

    for (index, params) in cartesian_product(grid).into_iter().enumerate() {
        let mut config = RegressorConfig::new(family).with_seed(seed);
        for (key, value) in &params {
            config = config.with(key, *value);
        }
        config.validate()?;

        let mut fold_scores = Vec::with_capacity(k * repeats);
        for repeat in 0..repeats {
            let folds = kfold_indices(x.rows(), k, Some(seed.wrapping_add(repeat as u64)));
            for (train, test) in folds {
                let x_train = x.select_rows(&train)?;
                let y_train: Vec<f64> = train.iter().map(|&i| y[i]).collect();
                let x_test = x.select_rows(&test)?;
                let y_test: Vec<f64> = test.iter().map(|&i| y[i]).collect();
                let model = regress::fit(&config, &x_train, &y_train)?;
                let pred = model.predict(&x_test)?;
                fold_scores.push(score(&y_test, &pred, metric)?);
            }
        }
        let mean = fold_scores.iter().sum::<f64>() / fold_scores.len() as f64;
        let var = fold_scores
            .iter()
            .map(|s| (s - mean) * (s - mean))
            .sum::<f64>()
            / fold_scores.len() as f64;
        if metric.better(mean, best_mean) {
            best_mean = mean;
            best_index = index;
        }
        candidates.push(CandidateResult {
            params,
            mean,
            std: var.sqrt(),
            fold_scores,
        });
    }

    Ok(GridSearchResult {
        family,
        metric,
        best_params: candidates[best_index].params.clone(),
        best_index,
        candidates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{normal_vec, seeded as seed_rng};

    #[test]
    fn perfect_prediction_metrics() {
        let y = vec![1.0, 2.0, 3.0];
        let r = metrics(&y, &y).unwrap();
        assert_eq!(r.mse, 0.0);
        assert_eq!(r.rmse, 0.0);
        assert_eq!(r.mae, 0.0);
        assert_eq!(r.mape, Some(0.0));
        assert_eq!(r.r2, 1.0);
    }

    #[test]
    fn worked_example_values() {
        let y = vec![1.0, 2.0, 3.0];
        let yhat = vec![2.0, 2.0, 2.0];
        let r = metrics(&y, &yhat).unwrap();
        assert!((r.mse - 2.0 / 3.0).abs() <= 1e-12);
        assert!((r.rmse - (2.0f64 / 3.0).sqrt()).abs() <= 1e-12);
        assert!((r.mae - 2.0 / 3.0).abs() <= 1e-12);
        assert!((r.mape.unwrap() - 100.0 / 3.0 * (1.0 + 0.0 + 1.0 / 3.0)).abs() <= 1e-9);
        assert!((r.r2 - 0.0).abs() <= 1e-12);
    }

    #[test]
    fn constant_mean_predictor_has_zero_r2() {
        let y = vec![1.0, 5.0, 3.0, 7.0];
        let mean = y.iter().sum::<f64>() / 4.0;
        let r = metrics(&y, &[mean; 4]).unwrap();
        assert!((r.r2 - 0.0).abs() <= 1e-12);
    }

    #[test]
    fn mape_skips_zero_targets() {
        let y = vec![0.0, 2.0];
        let yhat = vec![1.0, 1.0];
        let r = metrics(&y, &yhat).unwrap();
        assert_eq!(r.mape_skipped, 1);
        assert!((r.mape.unwrap() - 50.0).abs() <= 1e-12);
        let all_zero = metrics(&[0.0, 0.0], &[1.0, 1.0]).unwrap();
        assert_eq!(all_zero.mape, None);
        assert_eq!(all_zero.mape_skipped, 2);
    }

    #[test]
    fn length_mismatch_and_empty_are_errors() {
        assert!(matches!(metrics(&[1.0], &[1.0, 2.0]), Err(Error::Shape(_))));
        assert!(matches!(metrics(&[], &[]), Err(Error::EmptyInput(_))));
    }

    #[test]
    fn kfold_blocks_cover_everything_once() {
        for (m, k) in [(10, 3), (9, 3), (7, 2), (5, 5)] {
            let folds = kfold_indices(m, k, None);
            assert_eq!(folds.len(), k);
            let mut seen: Vec<usize> = folds.iter().flat_map(|(_, t)| t.clone()).collect();
            seen.sort_unstable();
            assert_eq!(seen, (0..m).collect::<Vec<_>>());
            for (train, test) in &folds {
                assert_eq!(train.len() + test.len(), m);
            }
        }
    }

    #[test]
    fn contiguous_folds_are_ordered_blocks() {
        let folds = kfold_indices(6, 3, None);
        assert_eq!(folds[0].1, vec![0, 1]);
        assert_eq!(folds[1].1, vec![2, 3]);
        assert_eq!(folds[2].1, vec![4, 5]);
    }

    #[test]
    fn grid_search_fold_matrix_width_is_k_times_repeats() {
        let mut rng = seed_rng(2);
        let rows: Vec<Vec<f64>> = (0..40).map(|_| normal_vec(&mut rng, 2, 0.0, 1.0)).collect();
        let y: Vec<f64> = rows.iter().map(|r| r[0] * 2.0 + 1.0).collect();
        let x = Matrix::from_rows(&rows).unwrap();
        let grid = BTreeMap::from([("alpha".to_string(), vec![0.0])]);
        let result = grid_search(
            &grid,
            RegressorFamily::Ridge,
            &x,
            &y,
            10,
            3,
            Metric::Mse,
            1,
        )
        .unwrap();
        assert_eq!(result.candidates.len(), 1);
        assert_eq!(result.candidates[0].fold_scores.len(), 30);
        let c = &result.candidates[0];
        let mean = c.fold_scores.iter().sum::<f64>() / 30.0;
        assert!((mean - c.mean).abs() <= 1e-12);
    }

    #[test]
    fn grid_search_prefers_unpenalized_ridge_on_linear_data() {
        let mut rng = seed_rng(4);
        let rows: Vec<Vec<f64>> = (0..50).map(|_| normal_vec(&mut rng, 3, 0.0, 1.0)).collect();
        let y: Vec<f64> = rows.iter().map(|r| 3.0 * r[0] - r[1]).collect();
        let x = Matrix::from_rows(&rows).unwrap();
        let grid = BTreeMap::from([("alpha".to_string(), vec![0.0, 1e6])]);
        let result = grid_search(
            &grid,
            RegressorFamily::Ridge,
            &x,
            &y,
            5,
            2,
            Metric::Mse,
            1,
        )
        .unwrap();
        assert_eq!(result.best_params["alpha"], 0.0);
    }

    #[test]
    fn too_few_samples_for_k_is_error() {
        let x = Matrix::from_rows(&[vec![1.0], vec![2.0]]).unwrap();
        let grid = BTreeMap::from([("alpha".to_string(), vec![0.0])]);
        assert!(matches!(
            grid_search(&grid, RegressorFamily::Ridge, &x, &[1.0, 2.0], 10, 3, Metric::Mse, 1),
            Err(Error::InsufficientSamples { .. })
        ));
    }
}
