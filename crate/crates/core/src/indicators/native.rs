//! The native indicator set.
//!
//! Formulas follow the reference technical-analysis conventions this
//! project pins down: Wilder smoothing (`alpha = 1/length`) for RSI and
//! ATR, standard EMA (`alpha = 2/(length+1)`) seeded with the SMA of the
//! first `length` observations elsewhere, and population standard
//! deviation in bbands/stdev/zscore. Ichimoku spans are emitted unshifted
//! so no output entry ever depends on future rows.

use super::ops::*;
use super::{IndicatorDef, IndicatorRegistry, Params};
use crate::series::PriceSeries;

fn flag(cond: bool) -> f64 {
    if cond {
        1.0
    } else {
        0.0
    }
}

fn nan_flag(inputs: &[f64], cond: bool) -> f64 {
    if inputs.iter().any(|v| v.is_nan()) {
        f64::NAN
    } else {
        flag(cond)
    }
}

fn single<W, C>(params: &[(&str, f64)], warmup: W, compute: C) -> IndicatorDef
where
    W: Fn(&Params) -> usize + Send + Sync + 'static,
    C: Fn(&Params, &PriceSeries) -> Vec<f64> + Send + Sync + 'static,
{
    IndicatorDef::new(
        params,
        vec![String::new()],
        warmup,
        move |p, s| vec![compute(p, s)],
    )
}

fn multi<W, C>(
    params: &[(&str, f64)],
    suffixes: &[&str],
    warmup: W,
    compute: C,
) -> IndicatorDef
where
    W: Fn(&Params) -> usize + Send + Sync + 'static,
    C: Fn(&Params, &PriceSeries) -> Vec<Vec<f64>> + Send + Sync + 'static,
{
    IndicatorDef::new(
        params,
        suffixes.iter().map(|s| s.to_string()).collect(),
        warmup,
        compute,
    )
}

/// Percentage oscillator shared by ppo/pvo: fast/slow EMA of `src`, signal
/// EMA of the oscillator, histogram.
fn pct_oscillator(src: &[f64], fast: usize, slow: usize, signal: usize) -> Vec<Vec<f64>> {
    let f = ema(src, fast);
    let s = ema(src, slow);
    let line = zip_with(&f, &s, |a, b| if b != 0.0 { 100.0 * (a - b) / b } else { 0.0 });
    let sig = ema(&line, signal);
    let hist = zip_with(&line, &sig, |a, b| a - b);
    vec![line, sig, hist]
}

/// Squeeze momentum: smoothed momentum of close.
fn squeeze_momentum(close: &[f64], mom_length: usize, mom_smooth: usize) -> Vec<f64> {
    rolling_mean(&diff(close, mom_length), mom_smooth)
}

/// Keltner channel bounds: EMA basis with EMA(true range) bands.
fn keltner(series: &PriceSeries, length: usize, scalar: f64) -> (Vec<f64>, Vec<f64>) {
    let basis = ema(&series.close, length);
    let band = ema(
        &true_range(&series.high, &series.low, &series.close),
        length,
    );
    let lower = zip_with(&basis, &band, move |b, r| b - scalar * r);
    let upper = zip_with(&basis, &band, move |b, r| b + scalar * r);
    (lower, upper)
}

fn bollinger(close: &[f64], length: usize, std_mult: f64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let mid = rolling_mean(close, length);
    let dev = rolling_std_pop(close, length);
    let lower = zip_with(&mid, &dev, move |m, d| m - std_mult * d);
    let upper = zip_with(&mid, &dev, move |m, d| m + std_mult * d);
    (lower, mid, upper)
}

fn obv_series(close: &[f64], volume: &[f64]) -> Vec<f64> {
    let n = close.len();
    let mut out = vec![f64::NAN; n];
    if n == 0 {
        return out;
    }
    let mut acc = volume[0];
    out[0] = acc;
    for i in 1..n {
        let d = close[i] - close[i - 1];
        if d > 0.0 {
            acc += volume[i];
        } else if d < 0.0 {
            acc -= volume[i];
        }
        out[i] = acc;
    }
    out
}

fn typical_price(s: &PriceSeries) -> Vec<f64> {
    (0..s.len())
        .map(|i| (s.high[i] + s.low[i] + s.close[i]) / 3.0)
        .collect()
}

pub(super) fn install_native(reg: &mut IndicatorRegistry) {
    reg.register(
        "sma",
        single(&[("length", 10.0)], |p| p.usize("length") - 1, |p, s| {
            rolling_mean(&s.close, p.usize("length"))
        }),
    )
    .unwrap();

    reg.register(
        "ema",
        single(&[("length", 10.0)], |p| p.usize("length") - 1, |p, s| {
            ema(&s.close, p.usize("length"))
        }),
    )
    .unwrap();

    reg.register(
        "wma",
        single(&[("length", 10.0)], |p| p.usize("length") - 1, |p, s| {
            weighted_mean(&s.close, p.usize("length"))
        }),
    )
    .unwrap();

    reg.register(
        "dema",
        single(
            &[("length", 10.0)],
            |p| 2 * (p.usize("length") - 1),
            |p, s| {
                let l = p.usize("length");
                let e1 = ema(&s.close, l);
                let e2 = ema(&e1, l);
                zip_with(&e1, &e2, |a, b| 2.0 * a - b)
            },
        ),
    )
    .unwrap();

    reg.register(
        "tema",
        single(
            &[("length", 10.0)],
            |p| 3 * (p.usize("length") - 1),
            |p, s| {
                let l = p.usize("length");
                let e1 = ema(&s.close, l);
                let e2 = ema(&e1, l);
                let e3 = ema(&e2, l);
                (0..s.len())
                    .map(|i| 3.0 * e1[i] - 3.0 * e2[i] + e3[i])
                    .collect()
            },
        ),
    )
    .unwrap();

    // Triangular MA: SMA of SMA with half-length (length+2)/2.
    reg.register(
        "trima",
        single(
            &[("length", 10.0)],
            |p| 2 * ((p.usize("length") + 2) / 2 - 1),
            |p, s| {
                let half = (p.usize("length") + 2) / 2;
                rolling_mean(&rolling_mean(&s.close, half), half)
            },
        ),
    )
    .unwrap();

    reg.register(
        "midpoint",
        single(&[("length", 2.0)], |p| p.usize("length") - 1, |p, s| {
            let l = p.usize("length");
            zip_with(&rolling_max(&s.close, l), &rolling_min(&s.close, l), |a, b| {
                (a + b) / 2.0
            })
        }),
    )
    .unwrap();

    reg.register(
        "midprice",
        single(&[("length", 2.0)], |p| p.usize("length") - 1, |p, s| {
            let l = p.usize("length");
            zip_with(&rolling_max(&s.high, l), &rolling_min(&s.low, l), |a, b| {
                (a + b) / 2.0
            })
        }),
    )
    .unwrap();

    reg.register(
        "mom",
        single(&[("length", 10.0)], |p| p.usize("length"), |p, s| {
            diff(&s.close, p.usize("length"))
        }),
    )
    .unwrap();

    reg.register(
        "roc",
        single(&[("length", 10.0)], |p| p.usize("length"), |p, s| {
            let l = p.usize("length");
            zip_with(&s.close, &shift(&s.close, l), |c, prev| {
                if prev != 0.0 {
                    100.0 * (c / prev - 1.0)
                } else {
                    0.0
                }
            })
        }),
    )
    .unwrap();

    // Wilder RSI; 100 when the average loss is zero, 50 on a dead-flat window.
    reg.register(
        "rsi",
        single(&[("length", 14.0)], |p| p.usize("length"), |p, s| {
            let l = p.usize("length");
            let d = diff(&s.close, 1);
            let gains: Vec<f64> = d.iter().map(|&x| if x > 0.0 { x } else if x.is_nan() { f64::NAN } else { 0.0 }).collect();
            let losses: Vec<f64> = d.iter().map(|&x| if x < 0.0 { -x } else if x.is_nan() { f64::NAN } else { 0.0 }).collect();
            let ag = wilder(&gains, l);
            let al = wilder(&losses, l);
            zip_with(&ag, &al, |g, lo| {
                if g == 0.0 && lo == 0.0 {
                    50.0
                } else {
                    100.0 * g / (g + lo)
                }
            })
        }),
    )
    .unwrap();

    reg.register(
        "macd",
        multi(
            &[("fast", 12.0), ("slow", 26.0), ("signal", 9.0)],
            &["", "signal", "hist"],
            |p| p.usize("slow") - 1 + p.usize("signal") - 1,
            |p, s| {
                let f = ema(&s.close, p.usize("fast"));
                let sl = ema(&s.close, p.usize("slow"));
                let line = zip_with(&f, &sl, |a, b| a - b);
                let sig = ema(&line, p.usize("signal"));
                let hist = zip_with(&line, &sig, |a, b| a - b);
                vec![line, sig, hist]
            },
        ),
    )
    .unwrap();

    reg.register(
        "ppo",
        multi(
            &[("fast", 12.0), ("slow", 26.0), ("signal", 9.0)],
            &["", "signal", "hist"],
            |p| p.usize("slow") - 1 + p.usize("signal") - 1,
            |p, s| pct_oscillator(&s.close, p.usize("fast"), p.usize("slow"), p.usize("signal")),
        ),
    )
    .unwrap();

    reg.register(
        "pvo",
        multi(
            &[("fast", 12.0), ("slow", 26.0), ("signal", 9.0)],
            &["", "signal", "hist"],
            |p| p.usize("slow") - 1 + p.usize("signal") - 1,
            |p, s| pct_oscillator(&s.volume, p.usize("fast"), p.usize("slow"), p.usize("signal")),
        ),
    )
    .unwrap();

    reg.register(
        "bbands",
        multi(
            &[("length", 20.0), ("std", 2.0)],
            &["lower", "mid", "upper", "bandwidth", "percent"],
            |p| p.usize("length") - 1,
            |p, s| {
                let (lower, mid, upper) = bollinger(&s.close, p.usize("length"), p.get("std"));
                let bandwidth = (0..s.len())
                    .map(|i| {
                        if mid[i] != 0.0 {
                            100.0 * (upper[i] - lower[i]) / mid[i]
                        } else {
                            0.0
                        }
                    })
                    .collect();
                let percent = (0..s.len())
                    .map(|i| {
                        let range = upper[i] - lower[i];
                        if range != 0.0 {
                            (s.close[i] - lower[i]) / range
                        } else if range == 0.0 && lower[i].is_finite() {
                            0.5
                        } else {
                            f64::NAN
                        }
                    })
                    .collect();
                vec![lower, mid, upper, bandwidth, percent]
            },
        ),
    )
    .unwrap();

    reg.register(
        "stoch",
        multi(
            &[("k", 14.0), ("d", 3.0)],
            &["k", "d"],
            |p| p.usize("k") - 1 + p.usize("d") - 1,
            |p, s| {
                let kl = p.usize("k");
                let hh = rolling_max(&s.high, kl);
                let ll = rolling_min(&s.low, kl);
                let k: Vec<f64> = (0..s.len())
                    .map(|i| {
                        let range = hh[i] - ll[i];
                        if range != 0.0 {
                            100.0 * (s.close[i] - ll[i]) / range
                        } else if range == 0.0 && hh[i].is_finite() {
                            50.0
                        } else {
                            f64::NAN
                        }
                    })
                    .collect();
                let d = rolling_mean(&k, p.usize("d"));
                vec![k, d]
            },
        ),
    )
    .unwrap();

    reg.register(
        "willr",
        single(&[("length", 14.0)], |p| p.usize("length") - 1, |p, s| {
            let l = p.usize("length");
            let hh = rolling_max(&s.high, l);
            let ll = rolling_min(&s.low, l);
            (0..s.len())
                .map(|i| {
                    let range = hh[i] - ll[i];
                    if range != 0.0 {
                        -100.0 * (hh[i] - s.close[i]) / range
                    } else if range == 0.0 && hh[i].is_finite() {
                        -50.0
                    } else {
                        f64::NAN
                    }
                })
                .collect()
        }),
    )
    .unwrap();

    reg.register(
        "atr",
        single(&[("length", 14.0)], |p| p.usize("length") - 1, |p, s| {
            wilder(
                &true_range(&s.high, &s.low, &s.close),
                p.usize("length"),
            )
        }),
    )
    .unwrap();

    reg.register(
        "natr",
        single(&[("length", 14.0)], |p| p.usize("length") - 1, |p, s| {
            let atr = wilder(&true_range(&s.high, &s.low, &s.close), p.usize("length"));
            zip_with(&atr, &s.close, |a, c| if c != 0.0 { 100.0 * a / c } else { 0.0 })
        }),
    )
    .unwrap();

    reg.register(
        "cci",
        single(
            &[("length", 20.0), ("c", 0.015)],
            |p| p.usize("length") - 1,
            |p, s| {
                let l = p.usize("length");
                let c = p.get("c");
                let tp = typical_price(s);
                let sma_tp = rolling_mean(&tp, l);
                (0..s.len())
                    .map(|i| {
                        if i + 1 < l || sma_tp[i].is_nan() {
                            return f64::NAN;
                        }
                        let md = tp[i + 1 - l..=i]
                            .iter()
                            .map(|x| (x - sma_tp[i]).abs())
                            .sum::<f64>()
                            / l as f64;
                        if md != 0.0 {
                            (tp[i] - sma_tp[i]) / (c * md)
                        } else {
                            0.0
                        }
                    })
                    .collect()
            },
        ),
    )
    .unwrap();

    // Detrended price oscillator, non-centered to avoid lookahead.
    reg.register(
        "dpo",
        single(
            &[("length", 20.0)],
            |p| p.usize("length") - 1 + p.usize("length") / 2 + 1,
            |p, s| {
                let l = p.usize("length");
                let t = l / 2 + 1;
                zip_with(&s.close, &shift(&rolling_mean(&s.close, l), t), |c, m| c - m)
            },
        ),
    )
    .unwrap();

    reg.register(
        "obv",
        single(&[], |_| 0, |_, s| obv_series(&s.close, &s.volume)),
    )
    .unwrap();

    reg.register(
        "mfi",
        single(&[("length", 14.0)], |p| p.usize("length"), |p, s| {
            let l = p.usize("length");
            let tp = typical_price(s);
            let d = diff(&tp, 1);
            let raw: Vec<f64> = (0..s.len()).map(|i| tp[i] * s.volume[i]).collect();
            let pos: Vec<f64> = (0..s.len())
                .map(|i| {
                    if d[i].is_nan() {
                        f64::NAN
                    } else if d[i] > 0.0 {
                        raw[i]
                    } else {
                        0.0
                    }
                })
                .collect();
            let neg: Vec<f64> = (0..s.len())
                .map(|i| {
                    if d[i].is_nan() {
                        f64::NAN
                    } else if d[i] < 0.0 {
                        raw[i]
                    } else {
                        0.0
                    }
                })
                .collect();
            let ps = rolling_sum(&pos, l);
            let ns = rolling_sum(&neg, l);
            zip_with(&ps, &ns, |a, b| {
                let t = a + b;
                if t != 0.0 {
                    100.0 * a / t
                } else {
                    50.0
                }
            })
        }),
    )
    .unwrap();

    reg.register(
        "stdev",
        single(&[("length", 20.0)], |p| p.usize("length") - 1, |p, s| {
            rolling_std_pop(&s.close, p.usize("length"))
        }),
    )
    .unwrap();

    reg.register(
        "zscore",
        single(&[("length", 20.0)], |p| p.usize("length") - 1, |p, s| {
            let l = p.usize("length");
            let m = rolling_mean(&s.close, l);
            let d = rolling_std_pop(&s.close, l);
            (0..s.len())
                .map(|i| {
                    if d[i].is_nan() || m[i].is_nan() {
                        f64::NAN
                    } else if d[i] != 0.0 {
                        (s.close[i] - m[i]) / d[i]
                    } else {
                        0.0
                    }
                })
                .collect()
        }),
    )
    .unwrap();

    reg.register(
        "slope",
        single(&[("length", 20.0)], |p| p.usize("length"), |p, s| {
            let l = p.usize("length");
            diff(&s.close, l).iter().map(|v| v / l as f64).collect()
        }),
    )
    .unwrap();

    reg.register(
        "squeeze",
        multi(
            &[
                ("bb_length", 20.0),
                ("bb_std", 2.0),
                ("kc_length", 20.0),
                ("kc_scalar", 1.5),
                ("mom_length", 12.0),
                ("mom_smooth", 6.0),
            ],
            &["", "on", "off", "no"],
            |p| {
                (p.usize("mom_length") + p.usize("mom_smooth") - 1)
                    .max(p.usize("bb_length") - 1)
                    .max(p.usize("kc_length") - 1)
            },
            |p, s| {
                let (bbl, _, bbu) = bollinger(&s.close, p.usize("bb_length"), p.get("bb_std"));
                let (kcl, kcu) = keltner(s, p.usize("kc_length"), p.get("kc_scalar"));
                let momentum =
                    squeeze_momentum(&s.close, p.usize("mom_length"), p.usize("mom_smooth"));
                let mut on = Vec::with_capacity(s.len());
                let mut off = Vec::with_capacity(s.len());
                let mut no = Vec::with_capacity(s.len());
                for i in 0..s.len() {
                    let ins = [bbl[i], bbu[i], kcl[i], kcu[i]];
                    let is_on = bbl[i] > kcl[i] && bbu[i] < kcu[i];
                    let is_off = bbl[i] < kcl[i] && bbu[i] > kcu[i];
                    on.push(nan_flag(&ins, is_on));
                    off.push(nan_flag(&ins, is_off));
                    no.push(nan_flag(&ins, !is_on && !is_off));
                }
                vec![momentum, on, off, no]
            },
        ),
    )
    .unwrap();

    reg.register(
        "squeeze_pro",
        multi(
            &[
                ("bb_length", 20.0),
                ("bb_std", 2.0),
                ("kc_length", 20.0),
                ("wide", 2.0),
                ("normal", 1.5),
                ("narrow", 1.0),
                ("mom_length", 12.0),
                ("mom_smooth", 6.0),
            ],
            &["", "on_wide", "on_normal", "on_narrow", "off", "no"],
            |p| {
                (p.usize("mom_length") + p.usize("mom_smooth") - 1)
                    .max(p.usize("bb_length") - 1)
                    .max(p.usize("kc_length") - 1)
            },
            |p, s| {
                let (bbl, _, bbu) = bollinger(&s.close, p.usize("bb_length"), p.get("bb_std"));
                let kc_len = p.usize("kc_length");
                let (wl, wu) = keltner(s, kc_len, p.get("wide"));
                let (nl, nu) = keltner(s, kc_len, p.get("normal"));
                let (rl, ru) = keltner(s, kc_len, p.get("narrow"));
                let momentum =
                    squeeze_momentum(&s.close, p.usize("mom_length"), p.usize("mom_smooth"));
                let n = s.len();
                let mut cols: Vec<Vec<f64>> =
                    std::iter::repeat_with(|| Vec::with_capacity(n)).take(5).collect();
                for i in 0..n {
                    let ins = [bbl[i], bbu[i], wl[i], wu[i], nl[i], nu[i], rl[i], ru[i]];
                    let on_wide = bbl[i] > wl[i] && bbu[i] < wu[i];
                    let on_normal = bbl[i] > nl[i] && bbu[i] < nu[i];
                    let on_narrow = bbl[i] > rl[i] && bbu[i] < ru[i];
                    let off = bbl[i] < wl[i] && bbu[i] > wu[i];
                    cols[0].push(nan_flag(&ins, on_wide));
                    cols[1].push(nan_flag(&ins, on_normal));
                    cols[2].push(nan_flag(&ins, on_narrow));
                    cols[3].push(nan_flag(&ins, off));
                    cols[4].push(nan_flag(&ins, !on_wide && !off));
                }
                let mut out = vec![momentum];
                out.extend(cols);
                out
            },
        ),
    )
    .unwrap();

    // Elder's thermometer: bar-to-bar extreme movement vs its EMA.
    reg.register(
        "thermo",
        multi(
            &[("length", 20.0), ("long", 2.0), ("short", 0.5)],
            &["", "ma", "long", "short"],
            |p| p.usize("length"),
            |p, s| {
                let n = s.len();
                let mut t = vec![f64::NAN; n];
                for i in 1..n {
                    t[i] = (s.high[i] - s.high[i - 1])
                        .abs()
                        .max((s.low[i] - s.low[i - 1]).abs());
                }
                let ma = ema(&t, p.usize("length"));
                let long_f = p.get("long");
                let short_f = p.get("short");
                let mut lf = Vec::with_capacity(n);
                let mut sf = Vec::with_capacity(n);
                for i in 0..n {
                    let ins = [t[i], ma[i]];
                    lf.push(nan_flag(&ins, t[i] < ma[i] * long_f));
                    sf.push(nan_flag(&ins, t[i] > ma[i] * short_f));
                }
                vec![t, ma, lf, sf]
            },
        ),
    )
    .unwrap();

    // Linear decay floor: d_t = max(c_t, d_{t-1} - 1/length, 0).
    reg.register(
        "decay",
        single(&[("length", 5.0)], |_| 0, |p, s| {
            let step = 1.0 / p.usize("length") as f64;
            let mut out = Vec::with_capacity(s.len());
            let mut prev = 0.0;
            for &c in &s.close {
                let d = c.max(prev - step).max(0.0);
                out.push(d);
                prev = d;
            }
            out
        }),
    )
    .unwrap();

    // Archer OBV: fast/slow EMAs of OBV plus run flags over `run` bars.
    reg.register(
        "aobv",
        multi(
            &[("fast", 4.0), ("slow", 12.0), ("run", 2.0)],
            &["fast", "slow", "long_run", "short_run"],
            |p| p.usize("slow") - 1 + p.usize("run"),
            |p, s| {
                let obv = obv_series(&s.close, &s.volume);
                let f = ema(&obv, p.usize("fast"));
                let sl = ema(&obv, p.usize("slow"));
                let run = p.usize("run");
                let fp = shift(&f, run);
                let sp = shift(&sl, run);
                let n = s.len();
                let mut lr = Vec::with_capacity(n);
                let mut sr = Vec::with_capacity(n);
                for i in 0..n {
                    let ins = [f[i], sl[i], fp[i], sp[i]];
                    lr.push(nan_flag(&ins, f[i] > fp[i] && sl[i] > sp[i]));
                    sr.push(nan_flag(&ins, f[i] < fp[i] && sl[i] < sp[i]));
                }
                vec![f, sl, lr, sr]
            },
        ),
    )
    .unwrap();

    // Unshifted ichimoku lines: conversion/base midlines and both spans.
    reg.register(
        "ichimoku",
        multi(
            &[("conversion", 9.0), ("base", 26.0), ("span", 52.0)],
            &["conversion", "base", "span_a", "span_b"],
            |p| p.usize("span") - 1,
            |p, s| {
                let mid = |l: usize| {
                    zip_with(&rolling_max(&s.high, l), &rolling_min(&s.low, l), |a, b| {
                        (a + b) / 2.0
                    })
                };
                let conv = mid(p.usize("conversion"));
                let base = mid(p.usize("base"));
                let span_a = zip_with(&conv, &base, |a, b| (a + b) / 2.0);
                let span_b = mid(p.usize("span"));
                vec![conv, base, span_a, span_b]
            },
        ),
    )
    .unwrap();
}

/// Names of every natively implemented indicator, in registry order.
pub fn native_names() -> Vec<&'static str> {
    vec![
        "aobv", "atr", "bbands", "cci", "decay", "dema", "dpo", "ema", "ichimoku", "macd",
        "mfi", "midpoint", "midprice", "mom", "natr", "obv", "ppo", "pvo", "roc", "rsi",
        "slope", "sma", "squeeze", "squeeze_pro", "stdev", "stoch", "tema", "thermo", "trima",
        "willr", "wma", "zscore",
    ]
}
