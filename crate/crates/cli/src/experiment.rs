//! The two-phase experiment protocol.
//!
//! Phase one runs the (method x regressor x metric) selection matrix on
//! the selection partition's training split. Phase two rebuilds the
//! windowed dataset on the prediction partition, trains each regressor on
//! the chronological 70% with (a) its selected indicator subset and (b)
//! all indicators as the baseline, evaluates all five criteria on the
//! held-out 30%, and reports per-metric improvement percentages.

use indsel::error::Error;
use indsel::evaluate::{metrics, Metric, MetricReport};
use indsel::indicators::IndicatorRegistry;
use indsel::regress::{self, RegressorFamily};
use indsel::select::{run_selection, SelectionConfig, SelectionResult};
use indsel::series::PriceSeries;
use serde::Serialize;
use std::collections::BTreeMap;

use crate::config::ExperimentConfig;
use crate::pipeline::{build_partition, PartitionDataset, PipelineSettings};
use crate::CliError;

/// Phase-two outcome for one selection result.
#[derive(Debug, Clone, Serialize)]
pub struct ModelReport {
    pub method: String,
    pub family: String,
    pub selection_metric: String,
    pub best_subset: Vec<String>,
    pub baseline: MetricReport,
    pub selected: MetricReport,
    /// `(metric, 100 * (baseline - selected) / baseline)` per error metric.
    pub improvements: Vec<(String, f64)>,
    /// Test rows in price units for the predicted-vs-actual series.
    pub test_dates: Vec<String>,
    pub actual: Vec<f64>,
    pub predicted: Vec<f64>,
}

impl ModelReport {
    pub fn stem(&self) -> String {
        format!("{}_{}_{}", self.method, self.family, self.selection_metric)
    }
}

fn selection_settings(config: &ExperimentConfig) -> Result<PipelineSettings, CliError> {
    Ok(PipelineSettings::from_config(config)?)
}

/// Run every (method, regressor, metric) triple on the selection
/// partition's training split.
pub fn run_selection_phase(
    config: &ExperimentConfig,
    series: &PriceSeries,
    registry: &IndicatorRegistry,
) -> Result<Vec<SelectionResult>, CliError> {
    let settings = selection_settings(config)?;
    let partition = build_partition(series, config.selection_range.as_ref(), registry, &settings)?;
    let train = if config.selection_full_partition {
        partition.dataset.clone()
    } else {
        partition.train()?
    };
    if train.rows() < config.cv_folds {
        return Err(CliError::Core(Error::InsufficientSamples {
            required: config.cv_folds,
            actual: train.rows(),
        }));
    }

    let mut results = Vec::new();
    for (method, family, metric) in config.selection_matrix() {
        log::info!("selection: {method} {family} {metric}");
        let mut sel_config = SelectionConfig::new(method, config.regressor_config(family), metric);
        sel_config.cv_folds = config.cv_folds;
        sel_config.group_by_indicator = config.group_by_indicator;
        sel_config.cv_shuffle = config.cv_shuffle;
        sel_config.seed = config.seed;
        if let Some(steps) = config.max_steps {
            sel_config.max_steps = steps;
        }
        results.push(run_selection(&train, &sel_config)?);
    }
    Ok(results)
}

fn error_metrics() -> [Metric; 4] {
    [Metric::Mse, Metric::Rmse, Metric::Mae, Metric::Mape]
}

fn fit_and_score(
    partition: &PartitionDataset,
    dataset_train: &indsel::window::WindowedDataset,
    dataset_test: &indsel::window::WindowedDataset,
    config: &indsel::regress::RegressorConfig,
) -> Result<(MetricReport, Vec<f64>), CliError> {
    let model = regress::fit(config, &dataset_train.x, &dataset_train.y)?;
    let pred = model.predict(&dataset_test.x)?;
    let report = metrics(&dataset_test.y, &pred)?;
    Ok((report, partition.to_price_units(&pred)))
}

/// Evaluate each selection on the prediction partition against its
/// all-features baseline.
pub fn run_prediction_phase(
    config: &ExperimentConfig,
    series: &PriceSeries,
    registry: &IndicatorRegistry,
    selections: &[SelectionResult],
) -> Result<Vec<ModelReport>, CliError> {
    let settings = selection_settings(config)?;
    let partition = build_partition(series, config.prediction_range.as_ref(), registry, &settings)?;
    let train = partition.train()?;
    let test = partition.test()?;
    let actual_prices = partition.to_price_units(&test.y);
    let test_dates: Vec<String> = test
        .sample_dates
        .iter()
        .map(|d| d.format("%Y-%m-%d").to_string())
        .collect();

    // One baseline per distinct regressor config (family + params + seed).
    let mut baselines: BTreeMap<String, (MetricReport, Vec<f64>)> = BTreeMap::new();

    let mut reports = Vec::new();
    for selection in selections {
        let family = selection.regressor.family;
        let reg_config = selection.regressor.clone();
        let key = serde_json::to_string(&reg_config).map_err(indsel::Error::from)?;
        if !baselines.contains_key(&key) {
            let scored = fit_and_score(&partition, &train, &test, &reg_config)?;
            baselines.insert(key.clone(), scored);
        }
        let (baseline_report, _) = baselines.get(&key).cloned().unwrap();

        let known = train.group_names();
        for group in &selection.best_subset {
            if !known.contains(group) {
                return Err(CliError::Core(Error::Reference(format!(
                    "selection references unknown group {group:?}"
                ))));
            }
        }
        let train_sel = train.restrict_groups(&selection.best_subset)?;
        let test_sel = test.restrict_groups(&selection.best_subset)?;
        let (selected_report, predicted_prices) =
            fit_and_score(&partition, &train_sel, &test_sel, &reg_config)?;

        let improvements = error_metrics()
            .iter()
            .map(|&metric| {
                let base = baseline_report.value(metric);
                let sel = selected_report.value(metric);
                let pct = if base != 0.0 && base.is_finite() && sel.is_finite() {
                    100.0 * (base - sel) / base
                } else {
                    0.0
                };
                (metric.as_str().to_string(), pct)
            })
            .collect();

        reports.push(ModelReport {
            method: selection.method.to_string(),
            family: family.to_string(),
            selection_metric: selection.metric.to_string(),
            best_subset: selection.best_subset.clone(),
            baseline: baseline_report,
            selected: selected_report,
            improvements,
            test_dates: test_dates.clone(),
            actual: actual_prices.clone(),
            predicted: predicted_prices,
        });
    }
    Ok(reports)
}

/// Figure-10 style sweep: test MSE of the first configured regressor,
/// trained on all features, for each window size.
pub fn window_size_sweep_mse(
    config: &ExperimentConfig,
    series: &PriceSeries,
    registry: &IndicatorRegistry,
) -> Result<Vec<(usize, f64)>, CliError> {
    let family: RegressorFamily = config.regressors[0];
    let reg_config = config.regressor_config(family);
    let mut out = Vec::new();
    for &w in &config.window_sweep {
        let mut settings = selection_settings(config)?;
        settings.window = indsel::window::WindowSpec::new(w, config.window_h)?;
        let partition =
            build_partition(series, config.prediction_range.as_ref(), registry, &settings)?;
        let train = partition.train()?;
        let test = partition.test()?;
        let (report, _) = fit_and_score(&partition, &train, &test, &reg_config)?;
        out.push((w, report.mse));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::synthetic_ohlcv;
    use std::path::Path;

    fn test_config() -> ExperimentConfig {
        let text = "\
[data]
input = unused.csv
[window]
w = 3
h = 3
[indicators]
roster = sma(length=5); ema(length=5); rsi(length=14); mom(length=10); willr(length=14)
[selection]
methods = sfs
regressors = LR
metrics = mse
[output]
seed = 3
fast = true
";
        ExperimentConfig::parse(text, Path::new(".")).unwrap()
    }

    #[test]
    fn two_phase_protocol_runs_end_to_end() {
        let config = test_config();
        let series = synthetic_ohlcv(260, 11);
        let registry = IndicatorRegistry::with_defaults();
        let selections = run_selection_phase(&config, &series, &registry).unwrap();
        assert_eq!(selections.len(), 1);
        assert!(!selections[0].best_subset.is_empty());

        let reports = run_prediction_phase(&config, &series, &registry, &selections).unwrap();
        assert_eq!(reports.len(), 1);
        let r = &reports[0];
        assert_eq!(r.family, "LR");
        assert_eq!(r.actual.len(), r.predicted.len());
        assert_eq!(r.test_dates.len(), r.actual.len());
        // improvement arithmetic is recomputable from emitted values
        for (name, pct) in &r.improvements {
            let metric = Metric::parse(name).unwrap();
            let base = r.baseline.value(metric);
            let sel = r.selected.value(metric);
            if base != 0.0 {
                assert!((pct - 100.0 * (base - sel) / base).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn full_subset_selection_improves_exactly_zero() {
        let config = test_config();
        let series = synthetic_ohlcv(260, 13);
        let registry = IndicatorRegistry::with_defaults();
        let mut selections = run_selection_phase(&config, &series, &registry).unwrap();
        // force best_subset = all groups
        let all_groups: Vec<String> = vec!["sma", "ema", "rsi", "mom", "willr"]
            .into_iter()
            .map(String::from)
            .collect();
        selections[0].best_subset = all_groups;
        let reports = run_prediction_phase(&config, &series, &registry, &selections).unwrap();
        for (_, pct) in &reports[0].improvements {
            assert_eq!(*pct, 0.0, "identical models must improve exactly 0%");
        }
        assert_eq!(reports[0].baseline, reports[0].selected);
    }

    #[test]
    fn sweep_produces_one_mse_per_size() {
        let mut config = test_config();
        config.window_sweep = vec![1, 2, 3];
        let series = synthetic_ohlcv(200, 17);
        let registry = IndicatorRegistry::with_defaults();
        let sweep = window_size_sweep_mse(&config, &series, &registry).unwrap();
        assert_eq!(sweep.len(), 3);
        assert!(sweep.iter().all(|(_, mse)| mse.is_finite()));
    }

    #[test]
    fn unknown_group_reference_is_error() {
        let config = test_config();
        let series = synthetic_ohlcv(260, 19);
        let registry = IndicatorRegistry::with_defaults();
        let mut selections = run_selection_phase(&config, &series, &registry).unwrap();
        selections[0].best_subset = vec!["nonsense".to_string()];
        let err = run_prediction_phase(&config, &series, &registry, &selections).unwrap_err();
        assert!(format!("{err}").contains("unknown group"));
    }
}
