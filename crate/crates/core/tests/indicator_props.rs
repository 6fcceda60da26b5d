//! Cross-indicator invariants: no-lookahead, shift equivariance, output
//! bounds, and degenerate-length identities.

use chrono::NaiveDate;
use indsel::indicators::{native_names, IndicatorRegistry, IndicatorSpec};
use indsel::rng::{next_normal, seeded};
use indsel::series::PriceSeries;
use proptest::prelude::*;
use rand::Rng;

/// Random but well-formed OHLCV series (positive prices, high >= low).
fn random_series(n: usize, seed: u64) -> PriceSeries {
    let mut rng = seeded(seed);
    let start = NaiveDate::from_ymd_opt(2015, 3, 2).unwrap();
    let mut close = Vec::with_capacity(n);
    let mut level: f64 = 50.0;
    for _ in 0..n {
        level *= (0.02 * next_normal(&mut rng)).exp();
        close.push(level);
    }
    let mut open = Vec::with_capacity(n);
    let mut high = Vec::with_capacity(n);
    let mut low = Vec::with_capacity(n);
    let mut volume = Vec::with_capacity(n);
    for i in 0..n {
        let o = if i == 0 { close[0] } else { close[i - 1] } * (1.0 + 0.002 * next_normal(&mut rng));
        let spread = (0.005 * close[i] * next_normal(&mut rng).abs()).max(1e-6);
        open.push(o);
        high.push(o.max(close[i]) + spread);
        low.push((o.min(close[i]) - spread).max(1e-3));
        volume.push(1e5 * (1.0 + rng.gen::<f64>()));
    }
    PriceSeries {
        dates: (0..n).map(|i| start + chrono::Days::new(i as u64)).collect(),
        open,
        high,
        low,
        adj_close: close.clone(),
        close,
        volume,
    }
}

fn truncated(series: &PriceSeries, t: usize) -> PriceSeries {
    PriceSeries {
        dates: series.dates[..t].to_vec(),
        open: series.open[..t].to_vec(),
        high: series.high[..t].to_vec(),
        low: series.low[..t].to_vec(),
        close: series.close[..t].to_vec(),
        adj_close: series.adj_close[..t].to_vec(),
        volume: series.volume[..t].to_vec(),
    }
}

fn same_or_both_nan(a: f64, b: f64) -> bool {
    (a.is_nan() && b.is_nan()) || a == b
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn no_lookahead_for_every_native_indicator(seed in 0u64..5000, t in 60usize..130) {
        let reg = IndicatorRegistry::with_defaults();
        let series = random_series(130, seed);
        let cut = truncated(&series, t);
        for name in native_names() {
            let spec = IndicatorSpec::new(name);
            let full = reg.compute(&spec, &series).unwrap();
            let part = reg.compute(&spec, &cut).unwrap();
            for (fc, pc) in full.columns.iter().zip(&part.columns) {
                for i in 0..t {
                    prop_assert!(
                        same_or_both_nan(fc.values[i], pc.values[i]),
                        "{name}/{} row {i}: full {} vs truncated {}",
                        fc.name, fc.values[i], pc.values[i]
                    );
                }
            }
        }
    }

    #[test]
    fn shift_equivariance(seed in 0u64..5000, offset in 1u64..500) {
        let reg = IndicatorRegistry::with_defaults();
        let series = random_series(80, seed);
        let mut moved = series.clone();
        for d in &mut moved.dates {
            *d = *d + chrono::Days::new(offset);
        }
        for name in native_names() {
            let spec = IndicatorSpec::new(name);
            let a = reg.compute(&spec, &series).unwrap();
            let b = reg.compute(&spec, &moved).unwrap();
            for (ca, cb) in a.columns.iter().zip(&b.columns) {
                for i in 0..80 {
                    prop_assert!(same_or_both_nan(ca.values[i], cb.values[i]));
                }
            }
        }
    }

    #[test]
    fn bounded_outputs(seed in 0u64..5000) {
        let reg = IndicatorRegistry::with_defaults();
        let series = random_series(90, seed);

        let rsi = reg.compute(&IndicatorSpec::new("rsi"), &series).unwrap();
        for v in &rsi.columns[0].values {
            prop_assert!(v.is_nan() || (0.0..=100.0).contains(v));
        }

        let stoch = reg.compute(&IndicatorSpec::new("stoch"), &series).unwrap();
        for v in &stoch.column("stoch_14_3_k").unwrap().values {
            prop_assert!(v.is_nan() || (-1e-9..=100.0 + 1e-9).contains(v));
        }

        let willr = reg.compute(&IndicatorSpec::new("willr"), &series).unwrap();
        for v in &willr.columns[0].values {
            prop_assert!(v.is_nan() || (-100.0 - 1e-9..=1e-9).contains(v));
        }

        let bb = reg.compute(&IndicatorSpec::new("bbands"), &series).unwrap();
        let lower = &bb.column("bbands_20_2_lower").unwrap().values;
        let mid = &bb.column("bbands_20_2_mid").unwrap().values;
        let upper = &bb.column("bbands_20_2_upper").unwrap().values;
        for i in 0..90 {
            if lower[i].is_finite() {
                prop_assert!(lower[i] <= mid[i] + 1e-12 && mid[i] <= upper[i] + 1e-12);
            }
        }

        let decay = reg.compute(&IndicatorSpec::new("decay"), &series).unwrap();
        for (v, c) in decay.columns[0].values.iter().zip(&series.close) {
            prop_assert!(*v >= 0.0 && *v >= *c - 1e-12);
        }
    }

    #[test]
    fn length_one_smoothers_are_identity(seed in 0u64..5000) {
        let reg = IndicatorRegistry::with_defaults();
        let series = random_series(40, seed);
        for text in ["ema(length=1)", "sma(length=1)"] {
            let spec = IndicatorSpec::parse(text).unwrap();
            let out = reg.compute(&spec, &series).unwrap();
            for (v, c) in out.columns[0].values.iter().zip(&series.close) {
                prop_assert_eq!(*v, *c);
            }
        }
    }
}

#[test]
fn warmup_metadata_matches_observed_warmup() {
    let reg = IndicatorRegistry::with_defaults();
    let series = random_series(130, 42);
    for name in native_names() {
        let spec = IndicatorSpec::new(name);
        let declared = reg.warmup(&spec).unwrap();
        let frame = reg.compute(&spec, &series).unwrap();
        let observed = frame
            .columns
            .iter()
            .map(|c| c.values.iter().position(|v| v.is_finite()).unwrap())
            .max()
            .unwrap();
        assert_eq!(
            declared, observed,
            "{name}: declared warm-up {declared}, observed {observed}"
        );
        // Nothing after the declared warm-up may be missing.
        for col in &frame.columns {
            for (i, v) in col.values.iter().enumerate().skip(declared) {
                assert!(v.is_finite(), "{name}/{} missing at {i}", col.name);
            }
        }
    }
}
