//! Rolling-window and exponential-smoothing primitives.
//!
//! All functions are NaN-aware in the same way: a leading NaN block in the
//! input (warm-up inherited from an upstream indicator) shifts the output's
//! warm-up by the same amount, and entry `t` of any output depends only on
//! input entries at indices `<= t`.

/// Index of the first finite value, or `len` when there is none.
pub fn first_finite(values: &[f64]) -> usize {
    values
        .iter()
        .position(|v| v.is_finite())
        .unwrap_or(values.len())
}

fn with_warmup<F>(values: &[f64], extra: usize, f: F) -> Vec<f64>
where
    F: Fn(&[f64], &mut [f64]),
{
    let n = values.len();
    let s = first_finite(values);
    let mut out = vec![f64::NAN; n];
    if s + extra < n {
        let (_, tail) = out.split_at_mut(s);
        f(&values[s..], tail);
    }
    out
}

/// Rolling arithmetic mean over `length` observations.
pub fn rolling_mean(values: &[f64], length: usize) -> Vec<f64> {
    if length == 1 {
        return values.to_vec();
    }
    with_warmup(values, length.saturating_sub(1), |v, out| {
        let mut sum = 0.0;
        for i in 0..v.len() {
            sum += v[i];
            if i >= length {
                sum -= v[i - length];
            }
            if i + 1 >= length {
                out[i] = sum / length as f64;
            }
        }
    })
}

/// Rolling sum over `length` observations.
pub fn rolling_sum(values: &[f64], length: usize) -> Vec<f64> {
    if length == 1 {
        return values.to_vec();
    }
    with_warmup(values, length.saturating_sub(1), |v, out| {
        let mut sum = 0.0;
        for i in 0..v.len() {
            sum += v[i];
            if i >= length {
                sum -= v[i - length];
            }
            if i + 1 >= length {
                out[i] = sum;
            }
        }
    })
}

/// Rolling population standard deviation over `length` observations.
pub fn rolling_std_pop(values: &[f64], length: usize) -> Vec<f64> {
    with_warmup(values, length.saturating_sub(1), |v, out| {
        for i in (length - 1)..v.len() {
            let w = &v[i + 1 - length..=i];
            let mean = w.iter().sum::<f64>() / length as f64;
            let var = w.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / length as f64;
            out[i] = var.max(0.0).sqrt();
        }
    })
}

pub fn rolling_max(values: &[f64], length: usize) -> Vec<f64> {
    with_warmup(values, length.saturating_sub(1), |v, out| {
        for i in (length - 1)..v.len() {
            out[i] = v[i + 1 - length..=i].iter().cloned().fold(f64::MIN, f64::max);
        }
    })
}

pub fn rolling_min(values: &[f64], length: usize) -> Vec<f64> {
    with_warmup(values, length.saturating_sub(1), |v, out| {
        for i in (length - 1)..v.len() {
            out[i] = v[i + 1 - length..=i].iter().cloned().fold(f64::MAX, f64::min);
        }
    })
}

/// Exponential moving average seeded with the SMA of the first `length`
/// observations, then `alpha = 2 / (length + 1)`.
pub fn ema(values: &[f64], length: usize) -> Vec<f64> {
    smoothed(values, length, 2.0 / (length as f64 + 1.0))
}

/// Wilder's smoothing: same SMA seed, `alpha = 1 / length`.
pub fn wilder(values: &[f64], length: usize) -> Vec<f64> {
    smoothed(values, length, 1.0 / length as f64)
}

fn smoothed(values: &[f64], length: usize, alpha: f64) -> Vec<f64> {
    with_warmup(values, length.saturating_sub(1), |v, out| {
        let mut acc = v[..length].iter().sum::<f64>() / length as f64;
        out[length - 1] = acc;
        for i in length..v.len() {
            acc = alpha * v[i] + (1.0 - alpha) * acc;
            out[i] = acc;
        }
    })
}

/// `values[t] - values[t - k]`.
pub fn diff(values: &[f64], k: usize) -> Vec<f64> {
    with_warmup(values, k, |v, out| {
        for i in k..v.len() {
            out[i] = v[i] - v[i - k];
        }
    })
}

/// Value `k` steps earlier (`values[t - k]`), NaN where unavailable.
pub fn shift(values: &[f64], k: usize) -> Vec<f64> {
    let n = values.len();
    let mut out = vec![f64::NAN; n];
    if k < n {
        out[k..].copy_from_slice(&values[..n - k]);
    }
    out
}

/// Linearly weighted mean: weights `1..=length`, most recent heaviest.
pub fn weighted_mean(values: &[f64], length: usize) -> Vec<f64> {
    let denom = (length * (length + 1)) as f64 / 2.0;
    with_warmup(values, length.saturating_sub(1), |v, out| {
        for i in (length - 1)..v.len() {
            let mut acc = 0.0;
            for (j, x) in v[i + 1 - length..=i].iter().enumerate() {
                acc += (j + 1) as f64 * x;
            }
            out[i] = acc / denom;
        }
    })
}

/// True range: `max(h-l, |h-prev_close|, |l-prev_close|)`; first entry is
/// plain `h-l`.
pub fn true_range(high: &[f64], low: &[f64], close: &[f64]) -> Vec<f64> {
    let n = close.len();
    let mut out = vec![f64::NAN; n];
    if n == 0 {
        return out;
    }
    out[0] = high[0] - low[0];
    for i in 1..n {
        let pc = close[i - 1];
        out[i] = (high[i] - low[i])
            .max((high[i] - pc).abs())
            .max((low[i] - pc).abs());
    }
    out
}

/// Elementwise binary op ignoring NaN (NaN in either side propagates).
pub fn zip_with<F: Fn(f64, f64) -> f64>(a: &[f64], b: &[f64], f: F) -> Vec<f64> {
    a.iter().zip(b).map(|(&x, &y)| f(x, y)).collect()
}
