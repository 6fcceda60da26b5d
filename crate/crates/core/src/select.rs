//! Greedy wrapper feature selection: sequential forward and backward
//! search over indicator groups, scored by cross-validated metrics.
//!
//! A "group" is either all windowed columns of one indicator (the
//! default, matching how selections are reported per indicator) or a
//! single design-matrix column. Candidate evaluations inside one greedy
//! step are independent and run in parallel; the winner is reduced with a
//! deterministic tie rule (lowest group index), so results do not depend
//! on scheduling.

use std::sync::atomic::{AtomicU64, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluate::{kfold_indices, score, Metric};
use crate::regress::{self, RegressorConfig};
use crate::window::WindowedDataset;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SelectionMethod {
    Sfs,
    Sbs,
}

impl SelectionMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            SelectionMethod::Sfs => "sfs",
            SelectionMethod::Sbs => "sbs",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "sfs" => Ok(SelectionMethod::Sfs),
            "sbs" => Ok(SelectionMethod::Sbs),
            other => Err(Error::InvalidParam(format!(
                "unknown selection method {other:?}"
            ))),
        }
    }
}

impl std::fmt::Display for SelectionMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionConfig {
    pub method: SelectionMethod,
    pub regressor: RegressorConfig,
    pub metric: Metric,
    pub cv_folds: usize,
    /// Move all lag-columns of one indicator together (default) or select
    /// individual columns.
    pub group_by_indicator: bool,
    pub max_steps: usize,
    /// Contiguous time-ordered folds by default; seeded shuffling for
    /// replication experiments.
    pub cv_shuffle: bool,
    pub seed: u64,
}

impl SelectionConfig {
    pub fn new(method: SelectionMethod, regressor: RegressorConfig, metric: Metric) -> Self {
        Self {
            method,
            regressor,
            metric,
            cv_folds: 5,
            group_by_indicator: true,
            max_steps: usize::MAX,
            cv_shuffle: false,
            seed: 1,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.cv_folds < 2 {
            return Err(Error::InvalidParam("cv_folds must be >= 2".into()));
        }
        if self.max_steps < 1 {
            return Err(Error::InvalidParam("max_steps must be >= 1".into()));
        }
        Ok(())
    }
}

/// One greedy step: how many candidates were scored, which group won, and
/// the CV score of the resulting feature set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionStep {
    pub candidates_evaluated: usize,
    pub chosen: String,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    pub method: SelectionMethod,
    pub metric: Metric,
    pub regressor: RegressorConfig,
    /// Groups in greedy order: additions for SFS, removals for SBS.
    pub selected: Vec<String>,
    pub trace: Vec<SelectionStep>,
    /// Full-set score before any removal (SBS only).
    pub initial_score: Option<f64>,
    pub best_score: f64,
    pub best_subset: Vec<String>,
    /// Total model fits performed (folds x candidate evaluations).
    pub fit_count: u64,
}

struct Group {
    name: String,
    cols: Vec<usize>,
}

fn build_groups(dataset: &WindowedDataset, by_indicator: bool) -> Vec<Group> {
    if by_indicator {
        dataset
            .group_names()
            .into_iter()
            .map(|name| {
                let cols = dataset.group_columns(&name);
                Group { name, cols }
            })
            .collect()
    } else {
        dataset
            .feature_names
            .iter()
            .enumerate()
            .map(|(c, name)| Group {
                name: name.clone(),
                cols: vec![c],
            })
            .collect()
    }
}

/// Mean metric value over K contiguous (or seeded-shuffled) folds.
pub fn cross_val_score(
    dataset: &WindowedDataset,
    regressor: &RegressorConfig,
    metric: Metric,
    folds: usize,
    shuffle: bool,
    seed: u64,
) -> Result<f64> {
    let counter = AtomicU64::new(0);
    cv_score_counted(dataset, regressor, metric, folds, shuffle, seed, &counter)
}

fn cv_score_counted(
    dataset: &WindowedDataset,
    regressor: &RegressorConfig,
    metric: Metric,
    folds: usize,
    shuffle: bool,
    seed: u64,
    fits: &AtomicU64,
) -> Result<f64> {
    let m = dataset.rows();
    if folds < 2 {
        return Err(Error::InvalidParam("cv folds must be >= 2".into()));
    }
    if m < folds {
        return Err(Error::InsufficientSamples {
            required: folds,
            actual: m,
        });
    }
    let mut total = 0.0;
    for (train, test) in kfold_indices(m, folds, shuffle.then_some(seed)) {
        let x_train = dataset.x.select_rows(&train)?;
        let y_train: Vec<f64> = train.iter().map(|&i| dataset.y[i]).collect();
        let x_test = dataset.x.select_rows(&test)?;
        let y_test: Vec<f64> = test.iter().map(|&i| dataset.y[i]).collect();
        let model = regress::fit(regressor, &x_train, &y_train)?;
        fits.fetch_add(1, Ordering::Relaxed);
        let pred = model.predict(&x_test)?;
        total += score(&y_test, &pred, metric)?;
    }
    Ok(total / folds as f64)
}

/// Score the dataset restricted to `cols`.
fn eval_columns(
    dataset: &WindowedDataset,
    cols: &[usize],
    config: &SelectionConfig,
    fits: &AtomicU64,
) -> Result<f64> {
    let restricted = dataset.restrict_columns(cols)?;
    cv_score_counted(
        &restricted,
        &config.regressor,
        config.metric,
        config.cv_folds,
        config.cv_shuffle,
        config.seed,
        fits,
    )
}

fn sorted_union(groups: &[Group], members: &[usize]) -> Vec<usize> {
    let mut cols: Vec<usize> = members
        .iter()
        .flat_map(|&g| groups[g].cols.iter().copied())
        .collect();
    cols.sort_unstable();
    cols
}

/// Pick the best (candidate, score) with the deterministic tie rule:
/// candidates arrive in ascending group order and only a strictly better
/// score displaces the incumbent.
fn arg_best(metric: Metric, scored: &[(usize, f64)]) -> Result<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for &(g, s) in scored {
        if s.is_nan() {
            continue;
        }
        match best {
            None => best = Some((g, s)),
            Some((_, bs)) if metric.better(s, bs) => best = Some((g, s)),
            _ => {}
        }
    }
    best.ok_or_else(|| Error::NumericInput("all candidate scores were NaN".into()))
}

/// Sequential forward selection: grow from empty by the best addition.
pub fn sfs(dataset: &WindowedDataset, config: &SelectionConfig) -> Result<SelectionResult> {
    config.validate()?;
    let groups = build_groups(dataset, config.group_by_indicator);
    if groups.is_empty() {
        return Err(Error::EmptyInput("dataset has no feature groups".into()));
    }
    let fits = AtomicU64::new(0);

    let mut remaining: Vec<usize> = (0..groups.len()).collect();
    let mut chosen: Vec<usize> = Vec::new();
    let mut trace = Vec::new();
    let steps = config.max_steps.min(groups.len());

    for _ in 0..steps {
        let scored: Vec<(usize, f64)> = remaining
            .par_iter()
            .map(|&g| {
                let mut members = chosen.clone();
                members.push(g);
                let cols = sorted_union(&groups, &members);
                eval_columns(dataset, &cols, config, &fits).map(|s| (g, s))
            })
            .collect::<Result<_>>()?;
        let (winner, winner_score) = arg_best(config.metric, &scored)?;
        trace.push(SelectionStep {
            candidates_evaluated: remaining.len(),
            chosen: groups[winner].name.clone(),
            score: winner_score,
        });
        chosen.push(winner);
        remaining.retain(|&g| g != winner);
    }

    // Best-scoring prefix of the greedy path.
    let mut best_len = 1;
    let mut best_score = trace[0].score;
    for (i, step) in trace.iter().enumerate().skip(1) {
        if config.metric.better(step.score, best_score) {
            best_score = step.score;
            best_len = i + 1;
        }
    }

    Ok(SelectionResult {
        method: SelectionMethod::Sfs,
        metric: config.metric,
        regressor: config.regressor.clone(),
        selected: chosen.iter().map(|&g| groups[g].name.clone()).collect(),
        trace,
        initial_score: None,
        best_score,
        best_subset: chosen[..best_len]
            .iter()
            .map(|&g| groups[g].name.clone())
            .collect(),
        fit_count: fits.load(Ordering::Relaxed),
    })
}

/// Sequential backward selection: shrink from the full set by the removal
/// that leaves the best score. The initial full set competes for
/// `best_subset` too.
pub fn sbs(dataset: &WindowedDataset, config: &SelectionConfig) -> Result<SelectionResult> {
    config.validate()?;
    let groups = build_groups(dataset, config.group_by_indicator);
    if groups.is_empty() {
        return Err(Error::EmptyInput("dataset has no feature groups".into()));
    }
    let fits = AtomicU64::new(0);

    let mut remaining: Vec<usize> = (0..groups.len()).collect();
    let full_cols = sorted_union(&groups, &remaining);
    let initial_score = eval_columns(dataset, &full_cols, config, &fits)?;

    let mut best_score = initial_score;
    let mut best_set: Vec<usize> = remaining.clone();
    let mut removed: Vec<usize> = Vec::new();
    let mut trace = Vec::new();
    let steps = config.max_steps.min(groups.len().saturating_sub(1));

    for _ in 0..steps {
        let scored: Vec<(usize, f64)> = remaining
            .par_iter()
            .map(|&g| {
                let members: Vec<usize> =
                    remaining.iter().copied().filter(|&x| x != g).collect();
                let cols = sorted_union(&groups, &members);
                eval_columns(dataset, &cols, config, &fits).map(|s| (g, s))
            })
            .collect::<Result<_>>()?;
        let (winner, winner_score) = arg_best(config.metric, &scored)?;
        trace.push(SelectionStep {
            candidates_evaluated: remaining.len(),
            chosen: groups[winner].name.clone(),
            score: winner_score,
        });
        removed.push(winner);
        remaining.retain(|&g| g != winner);
        if config.metric.better(winner_score, best_score) {
            best_score = winner_score;
            best_set = remaining.clone();
        }
    }

    Ok(SelectionResult {
        method: SelectionMethod::Sbs,
        metric: config.metric,
        regressor: config.regressor.clone(),
        selected: removed.iter().map(|&g| groups[g].name.clone()).collect(),
        trace,
        initial_score: Some(initial_score),
        best_score,
        best_subset: best_set.iter().map(|&g| groups[g].name.clone()).collect(),
        fit_count: fits.load(Ordering::Relaxed),
    })
}

/// Run the configured method.
pub fn run_selection(
    dataset: &WindowedDataset,
    config: &SelectionConfig,
) -> Result<SelectionResult> {
    match config.method {
        SelectionMethod::Sfs => sfs(dataset, config),
        SelectionMethod::Sbs => sbs(dataset, config),
    }
}

/// Percentage of results whose best subset contains each group, sorted
/// descending (ties alphabetical).
pub fn top_indicator_census(results: &[SelectionResult]) -> Result<Vec<(String, f64)>> {
    if results.is_empty() {
        return Err(Error::EmptyInput("census needs at least one result".into()));
    }
    let mut counts: std::collections::BTreeMap<&str, usize> = std::collections::BTreeMap::new();
    for result in results {
        for name in &result.best_subset {
            *counts.entry(name.as_str()).or_insert(0) += 1;
        }
    }
    let total = results.len() as f64;
    let mut table: Vec<(String, f64)> = counts
        .into_iter()
        .map(|(name, c)| (name.to_string(), 100.0 * c as f64 / total))
        .collect();
    table.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    Ok(table)
}
