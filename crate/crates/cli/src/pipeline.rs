//! Per-partition dataset assembly: slice, impute, indicators, warm-up
//! drop, min-max scaling, and windowing.
//!
//! The chronological 70/30 split happens on windowed rows. By default the
//! scaler fits only on the frame days that appear inside training feature
//! windows, so nothing from the test range leaks into the scale; the
//! `scaler_fit = full` replication mode fits on the whole partition.

use indsel::error::{Error, Result};
use indsel::frame::FeatureFrame;
use indsel::indicators::{IndicatorRegistry, IndicatorSpec};
use indsel::scale::{minmax_fit, minmax_transform, ColumnScaler, ScalerParams};
use indsel::series::PriceSeries;
use indsel::window::{make_windows, WindowSpec, WindowedDataset};

use crate::config::{DateRange, ExperimentConfig};

/// A windowed, scaled partition plus everything needed to interpret it.
#[derive(Debug, Clone)]
pub struct PartitionDataset {
    pub dataset: WindowedDataset,
    /// Training-row count; with the default chronological split these are
    /// rows `[0, train_rows)`.
    pub train_rows: usize,
    /// Row indices of the train/test split (chronological unless the
    /// shuffled replication mode is active).
    pub train_idx: Vec<usize>,
    pub test_idx: Vec<usize>,
    pub feature_scaler: ScalerParams,
    /// Present when the target was scaled; inverts predictions back to
    /// price units.
    pub target_scaler: Option<ColumnScaler>,
    /// Unscaled closes aligned with the post-warm-up frame dates.
    pub raw_close: Vec<f64>,
}

impl PartitionDataset {
    pub fn train(&self) -> Result<WindowedDataset> {
        self.dataset.select_rows(&self.train_idx)
    }

    pub fn test(&self) -> Result<WindowedDataset> {
        self.dataset.select_rows(&self.test_idx)
    }

    /// Map model-space values back to price units.
    pub fn to_price_units(&self, values: &[f64]) -> Vec<f64> {
        match &self.target_scaler {
            Some(scaler) => scaler.inverse_vec(values),
            None => values.to_vec(),
        }
    }
}

pub struct PipelineSettings {
    pub roster: Vec<IndicatorSpec>,
    pub window: WindowSpec,
    pub train_fraction: f64,
    pub scale_target: bool,
    pub scaler_fit_full: bool,
    /// Seeded-shuffle train/test membership (replication mode). Implies a
    /// full-partition scaler fit, since no chronological prefix exists.
    pub split_shuffle: Option<u64>,
}

impl PipelineSettings {
    pub fn from_config(config: &ExperimentConfig) -> Result<Self> {
        Ok(Self {
            roster: config.roster.clone(),
            window: WindowSpec::new(config.window_w, config.window_h)?,
            train_fraction: config.train_fraction,
            scale_target: config.scale_target,
            scaler_fit_full: config.scaler_fit_full,
            split_shuffle: config.split_shuffle.then_some(config.seed),
        })
    }
}

/// Run the preprocessing pipeline on one date range of `series`.
pub fn build_partition(
    series: &PriceSeries,
    range: Option<&DateRange>,
    registry: &IndicatorRegistry,
    settings: &PipelineSettings,
) -> Result<PartitionDataset> {
    let sliced = match range {
        Some(r) => series.slice_dates(r.start, r.end)?,
        None => series.clone(),
    };
    let imputed = sliced.impute_missing()?;

    let frame = registry.compute_all(&settings.roster, &imputed)?;
    let mut frame = frame.drop_warmup()?;
    if !frame.is_complete() {
        // Residual interior gaps get the partition column mean.
        frame = frame.impute_missing()?;
    }

    let dropped = imputed.len() - frame.len();
    let raw_close = imputed.close[dropped..].to_vec();

    let n = frame.len();
    let (w, h) = (settings.window.w, settings.window.h);
    if n < w + h {
        return Err(Error::InsufficientHistory {
            required: w + h,
            actual: n,
        });
    }
    let m = n - w - h + 1;
    let train_rows = ((m as f64) * settings.train_fraction).floor() as usize;
    if train_rows == 0 || train_rows >= m {
        return Err(Error::InsufficientSamples {
            required: 2,
            actual: m,
        });
    }

    // Days covered by training feature windows: 0 ..= (train_rows-1)+(w-1).
    let fit_days = if settings.scaler_fit_full || settings.split_shuffle.is_some() {
        n
    } else {
        train_rows + w - 1
    };
    let fit_frame = slice_frame_rows(&frame, fit_days)?;
    let feature_scaler = minmax_fit(&fit_frame)?;
    let scaled_frame = minmax_transform(&frame, &feature_scaler)?;

    let (targets, target_scaler) = if settings.scale_target {
        let scaler = ColumnScaler::fit(&raw_close[..fit_days])?;
        (scaler.transform_vec(&raw_close), Some(scaler))
    } else {
        (raw_close.clone(), None)
    };

    let (train_idx, test_idx) = match settings.split_shuffle {
        None => ((0..train_rows).collect(), (train_rows..m).collect()),
        Some(seed) => {
            let order = indsel::rng::permutation(&mut indsel::rng::seeded(seed), m);
            (
                order[..train_rows].to_vec(),
                order[train_rows..].to_vec(),
            )
        }
    };

    let dataset = make_windows(&scaled_frame, &targets, settings.window)?;
    Ok(PartitionDataset {
        dataset,
        train_rows,
        train_idx,
        test_idx,
        feature_scaler,
        target_scaler,
        raw_close,
    })
}

fn slice_frame_rows(frame: &FeatureFrame, rows: usize) -> Result<FeatureFrame> {
    frame.slice_dates(frame.dates[0], frame.dates[rows - 1])
}

/// The imputed feature frame and aligned closes without scaling or
/// windowing (for the `indicators` subcommand output).
pub fn build_feature_frame(
    series: &PriceSeries,
    range: Option<&DateRange>,
    registry: &IndicatorRegistry,
    roster: &[IndicatorSpec],
) -> Result<(FeatureFrame, Vec<f64>)> {
    let sliced = match range {
        Some(r) => series.slice_dates(r.start, r.end)?,
        None => series.clone(),
    };
    let imputed = sliced.impute_missing()?;
    let frame = registry.compute_all(roster, &imputed)?;
    let frame = frame.drop_warmup()?;
    let dropped = imputed.len() - frame.len();
    Ok((frame, imputed.close[dropped..].to_vec()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::synthetic_ohlcv;
    use indsel::indicators::IndicatorSpec;

    fn settings(scale_target: bool, fit_full: bool) -> PipelineSettings {
        PipelineSettings {
            roster: vec![
                IndicatorSpec::parse("sma(length=5)").unwrap(),
                IndicatorSpec::parse("rsi(length=14)").unwrap(),
                IndicatorSpec::parse("mom(length=10)").unwrap(),
            ],
            window: WindowSpec::new(3, 3).unwrap(),
            train_fraction: 0.7,
            scale_target,
            scaler_fit_full: fit_full,
            split_shuffle: None,
        }
    }

    #[test]
    fn partition_shapes_follow_the_window_law() {
        let series = synthetic_ohlcv(120, 3);
        let registry = IndicatorRegistry::with_defaults();
        let part = build_partition(&series, None, &registry, &settings(true, false)).unwrap();
        // warm-up is rsi(14) = 14 rows -> frame 106 rows -> m = 101
        assert_eq!(part.dataset.rows(), 101);
        assert_eq!(part.dataset.cols(), 3 * 3);
        assert_eq!(part.train_rows, 70);
        assert_eq!(part.raw_close.len(), 106);
    }

    #[test]
    fn chronological_split_has_ordered_dates() {
        let series = synthetic_ohlcv(150, 4);
        let registry = IndicatorRegistry::with_defaults();
        let part = build_partition(&series, None, &registry, &settings(true, false)).unwrap();
        let train = part.train().unwrap();
        let test = part.test().unwrap();
        let last_train = train.sample_dates.last().unwrap();
        assert!(test.sample_dates.iter().all(|d| d > last_train));
    }

    #[test]
    fn train_fit_scaler_maps_training_days_into_unit_range() {
        let series = synthetic_ohlcv(140, 5);
        let registry = IndicatorRegistry::with_defaults();
        let part = build_partition(&series, None, &registry, &settings(true, false)).unwrap();
        let train = part.train().unwrap();
        // every training feature lies in [0,1] because the scaler was
        // fitted exactly on the days those windows cover
        for r in 0..train.rows() {
            for v in train.x.row(r) {
                assert!((-1e-9..=1.0 + 1e-9).contains(v), "train value {v} outside [0,1]");
            }
        }
    }

    #[test]
    fn unscaled_target_keeps_price_units() {
        let series = synthetic_ohlcv(120, 6);
        let registry = IndicatorRegistry::with_defaults();
        let part = build_partition(&series, None, &registry, &settings(false, false)).unwrap();
        assert!(part.target_scaler.is_none());
        assert!(part.dataset.y.iter().any(|v| *v > 10.0));
        let round_trip = part.to_price_units(&part.dataset.y);
        assert_eq!(round_trip, part.dataset.y);
    }

    #[test]
    fn too_short_partition_is_error() {
        let series = synthetic_ohlcv(20, 7);
        let registry = IndicatorRegistry::with_defaults();
        assert!(build_partition(&series, None, &registry, &settings(true, false)).is_err());
    }

    #[test]
    fn shuffled_split_partitions_all_rows_once() {
        let series = synthetic_ohlcv(130, 8);
        let registry = IndicatorRegistry::with_defaults();
        let mut s = settings(true, false);
        s.split_shuffle = Some(11);
        let part = build_partition(&series, None, &registry, &s).unwrap();
        let mut all: Vec<usize> = part
            .train_idx
            .iter()
            .chain(&part.test_idx)
            .copied()
            .collect();
        all.sort_unstable();
        assert_eq!(all, (0..part.dataset.rows()).collect::<Vec<_>>());
        assert_eq!(part.train_idx.len(), part.train_rows);
        // shuffled membership is not the chronological prefix
        assert_ne!(part.train_idx, (0..part.train_rows).collect::<Vec<_>>());
        // deterministic for a fixed seed
        let again = build_partition(&series, None, &registry, &s).unwrap();
        assert_eq!(part.train_idx, again.train_idx);
    }
}
