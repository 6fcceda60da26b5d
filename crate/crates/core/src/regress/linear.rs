//! Linear-family solvers: least squares and ridge on an SVD, lasso by
//! cyclic coordinate descent with soft-thresholding.
//!
//! All three center the data when fitting an intercept, so the intercept
//! is never penalized. Rank-deficient systems fall back to the
//! minimum-norm solution through the pseudo-inverse cutoff.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::TrainingMeta;
use crate::matrix::Matrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub(crate) struct LinearModel {
    pub coefficients: Vec<f64>,
    pub intercept: f64,
}

impl LinearModel {
    pub fn predict(&self, x: &Matrix) -> Vec<f64> {
        (0..x.rows())
            .map(|r| {
                self.intercept
                    + x.row(r)
                        .iter()
                        .zip(&self.coefficients)
                        .map(|(a, b)| a * b)
                        .sum::<f64>()
            })
            .collect()
    }
}

struct Centered {
    xc: DMatrix<f64>,
    yc: DVector<f64>,
    x_mean: Vec<f64>,
    y_mean: f64,
}

fn center(x: &Matrix, y: &[f64], fit_intercept: bool) -> Centered {
    let (m, d) = (x.rows(), x.cols());
    let mut x_mean = vec![0.0; d];
    let mut y_mean = 0.0;
    if fit_intercept {
        for r in 0..m {
            for (c, xm) in x_mean.iter_mut().enumerate() {
                *xm += x.get(r, c);
            }
            y_mean += y[r];
        }
        for xm in &mut x_mean {
            *xm /= m as f64;
        }
        y_mean /= m as f64;
    }
    let xc = DMatrix::from_fn(m, d, |r, c| x.get(r, c) - x_mean[c]);
    let yc = DVector::from_fn(m, |r, _| y[r] - y_mean);
    Centered {
        xc,
        yc,
        x_mean,
        y_mean,
    }
}

fn finish(c: &Centered, beta: DVector<f64>) -> LinearModel {
    let intercept = c.y_mean
        - c.x_mean
            .iter()
            .zip(beta.iter())
            .map(|(a, b)| a * b)
            .sum::<f64>();
    LinearModel {
        coefficients: beta.iter().copied().collect(),
        intercept,
    }
}

/// Ordinary least squares via SVD pseudo-inverse (minimum-norm solution).
pub(crate) fn fit_lr(x: &Matrix, y: &[f64], fit_intercept: bool) -> LinearModel {
    fit_svd(x, y, 0.0, fit_intercept)
}

/// Ridge closed form on the SVD: shrink singular directions by
/// `s / (s^2 + alpha)`. `alpha = 0` reproduces least squares exactly.
pub(crate) fn fit_ridge(x: &Matrix, y: &[f64], alpha: f64, fit_intercept: bool) -> LinearModel {
    fit_svd(x, y, alpha, fit_intercept)
}

fn fit_svd(x: &Matrix, y: &[f64], alpha: f64, fit_intercept: bool) -> LinearModel {
    let c = center(x, y, fit_intercept);
    let svd = c.xc.clone().svd(true, true);
    let u = svd.u.as_ref().expect("svd computed with u");
    let vt = svd.v_t.as_ref().expect("svd computed with v_t");
    let s = &svd.singular_values;
    let cutoff = s.max() * (x.rows().max(x.cols()) as f64) * f64::EPSILON;

    let uty = u.transpose() * &c.yc;
    let mut shrunk = DVector::zeros(s.len());
    for i in 0..s.len() {
        let si = s[i];
        if si > cutoff {
            let denom = si * si + alpha;
            shrunk[i] = if denom > 0.0 { uty[i] * si / denom } else { 0.0 };
        }
    }
    let beta = vt.transpose() * shrunk;
    finish(&c, beta)
}

fn soft_threshold(v: f64, t: f64) -> f64 {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}

/// Lasso objective: `RSS / (2m) + alpha * l1(coefficients)`.
pub fn lasso_objective(
    x: &Matrix,
    y: &[f64],
    coefficients: &[f64],
    intercept: f64,
    alpha: f64,
) -> f64 {
    let m = x.rows() as f64;
    let model = LinearModel {
        coefficients: coefficients.to_vec(),
        intercept,
    };
    let pred = model.predict(x);
    let rss: f64 = pred
        .iter()
        .zip(y)
        .map(|(p, t)| (p - t) * (p - t))
        .sum();
    rss / (2.0 * m) + alpha * coefficients.iter().map(|b| b.abs()).sum::<f64>()
}

/// Cyclic coordinate descent. Each sweep updates every coordinate once;
/// the objective is non-increasing sweep over sweep.
pub(crate) fn fit_lasso(
    x: &Matrix,
    y: &[f64],
    alpha: f64,
    max_iter: usize,
    tol: f64,
    fit_intercept: bool,
) -> (LinearModel, TrainingMeta) {
    let (m, d) = (x.rows(), x.cols());
    let mf = m as f64;
    let c = center(x, y, fit_intercept);

    let cols: Vec<Vec<f64>> = (0..d).map(|j| c.xc.column(j).iter().copied().collect()).collect();
    let col_sq: Vec<f64> = cols
        .iter()
        .map(|col| col.iter().map(|v| v * v).sum::<f64>() / mf)
        .collect();

    let mut beta = vec![0.0; d];
    let mut residual: Vec<f64> = c.yc.iter().copied().collect();
    let mut iterations = 0;
    let mut converged = false;

    for _ in 0..max_iter {
        iterations += 1;
        let mut max_delta = 0.0f64;
        let mut max_beta = 0.0f64;
        for j in 0..d {
            if col_sq[j] == 0.0 {
                continue;
            }
            let old = beta[j];
            // rho = x_j . (residual + x_j * old) / m
            let mut rho = 0.0;
            for (xi, r) in cols[j].iter().zip(&residual) {
                rho += xi * r;
            }
            rho = rho / mf + col_sq[j] * old;
            let new = soft_threshold(rho, alpha) / col_sq[j];
            if new != old {
                let delta = new - old;
                for (xi, r) in cols[j].iter().zip(residual.iter_mut()) {
                    *r -= xi * delta;
                }
                beta[j] = new;
                max_delta = max_delta.max(delta.abs());
            }
            max_beta = max_beta.max(beta[j].abs());
        }
        if max_delta <= tol * max_beta.max(1e-12) {
            converged = true;
            break;
        }
    }

    let model = finish(&c, DVector::from_vec(beta));
    (
        model,
        TrainingMeta {
            iterations,
            converged,
        },
    )
}
