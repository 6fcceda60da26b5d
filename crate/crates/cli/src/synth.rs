//! Seeded synthetic OHLCV generation for demos and tests.

use chrono::{Datelike, NaiveDate, Weekday};
use indsel::rng::{next_normal, seeded};
use indsel::series::PriceSeries;
use rand::Rng;

/// Geometric-random-walk daily bars on a weekday calendar starting
/// 2018-01-02. Deterministic for a given (days, seed).
pub fn synthetic_ohlcv(days: usize, seed: u64) -> PriceSeries {
    let mut rng = seeded(seed);
    let mut date = NaiveDate::from_ymd_opt(2018, 1, 2).unwrap();
    let mut level: f64 = 100.0;

    let mut series = PriceSeries {
        dates: Vec::with_capacity(days),
        open: Vec::with_capacity(days),
        high: Vec::with_capacity(days),
        low: Vec::with_capacity(days),
        close: Vec::with_capacity(days),
        adj_close: Vec::with_capacity(days),
        volume: Vec::with_capacity(days),
    };

    for _ in 0..days {
        while matches!(date.weekday(), Weekday::Sat | Weekday::Sun) {
            date = date.succ_opt().unwrap();
        }
        let drift = 0.0004;
        let vol = 0.018;
        let open = level * (1.0 + 0.003 * next_normal(&mut rng));
        level *= (drift + vol * next_normal(&mut rng)).exp();
        let close = level;
        let spread = (open - close).abs() * 0.5 + level * 0.004 * next_normal(&mut rng).abs();
        let high = open.max(close) + spread;
        let low = (open.min(close) - spread).max(0.01);
        let volume = (1.0e6 * (0.5 + rng.gen::<f64>())).round();

        series.dates.push(date);
        series.open.push(open);
        series.high.push(high);
        series.low.push(low);
        series.close.push(close);
        series.adj_close.push(close);
        series.volume.push(volume);
        date = date.succ_opt().unwrap();
    }
    series
}
