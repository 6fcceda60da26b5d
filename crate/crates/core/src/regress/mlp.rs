//! Single-hidden-layer perceptron regressor trained full-batch with
//! limited-memory BFGS.
//!
//! Architecture: `input -> logistic(hidden) -> linear(1)`. Loss is
//! `mean squared error / 2` plus an L2 penalty `alpha * |W|^2 / (2m)` on
//! the weight matrices (biases unpenalized). Weights start uniform in
//! `(-r, r)` with `r = sqrt(6 / (fan_in + fan_out))`, drawn from the
//! seeded stream, so training is reproducible bit for bit.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::TrainingMeta;
use crate::matrix::Matrix;
use crate::rng::seeded;

/// Network shape plus the L2 penalty; owns the parameter layout.
///
/// The flat parameter vector is `[W1 (input x hidden, row-major), b1
/// (hidden), W2 (hidden), b2]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MlpSpec {
    pub input: usize,
    pub hidden: usize,
    pub alpha: f64,
}

impl MlpSpec {
    pub fn param_count(&self) -> usize {
        self.input * self.hidden + self.hidden + self.hidden + 1
    }

    pub fn init_theta(&self, seed: u64) -> Vec<f64> {
        let mut rng = seeded(seed);
        let mut theta = vec![0.0; self.param_count()];
        let r1 = (6.0 / (self.input + self.hidden) as f64).sqrt();
        for w in theta.iter_mut().take(self.input * self.hidden) {
            *w = rng.gen_range(-r1..r1);
        }
        let r2 = (6.0 / (self.hidden + 1) as f64).sqrt();
        let w2_start = self.input * self.hidden + self.hidden;
        for w in theta[w2_start..w2_start + self.hidden].iter_mut() {
            *w = rng.gen_range(-r2..r2);
        }
        theta
    }

    fn forward_row(&self, theta: &[f64], row: &[f64], hidden_out: &mut [f64]) -> f64 {
        let (w1, rest) = theta.split_at(self.input * self.hidden);
        let (b1, rest) = rest.split_at(self.hidden);
        let (w2, b2) = rest.split_at(self.hidden);
        for j in 0..self.hidden {
            let mut z = b1[j];
            for (i, &xi) in row.iter().enumerate() {
                z += xi * w1[i * self.hidden + j];
            }
            hidden_out[j] = 1.0 / (1.0 + (-z).exp());
        }
        let mut out = b2[0];
        for j in 0..self.hidden {
            out += hidden_out[j] * w2[j];
        }
        out
    }

    /// Full-batch loss and analytic gradient at `theta`.
    pub fn loss_and_grad(&self, theta: &[f64], x: &Matrix, y: &[f64]) -> (f64, Vec<f64>) {
        let m = x.rows();
        let mf = m as f64;
        let mut grad = vec![0.0; self.param_count()];
        let mut hidden = vec![0.0; self.hidden];
        let mut loss = 0.0;

        let w2_start = self.input * self.hidden + self.hidden;
        for r in 0..m {
            let row = x.row(r);
            let pred = self.forward_row(theta, row, &mut hidden);
            let err = pred - y[r];
            loss += err * err;

            let delta_out = err / mf;
            // output layer
            for j in 0..self.hidden {
                grad[w2_start + j] += delta_out * hidden[j];
            }
            grad[w2_start + self.hidden] += delta_out;
            // hidden layer
            for j in 0..self.hidden {
                let dh = delta_out * theta[w2_start + j] * hidden[j] * (1.0 - hidden[j]);
                for (i, &xi) in row.iter().enumerate() {
                    grad[i * self.hidden + j] += dh * xi;
                }
                grad[self.input * self.hidden + j] += dh;
            }
        }
        loss /= 2.0 * mf;

        // L2 penalty on both weight matrices, biases excluded.
        let mut penalty = 0.0;
        for (i, g) in grad.iter_mut().enumerate().take(self.input * self.hidden) {
            penalty += theta[i] * theta[i];
            *g += self.alpha * theta[i] / mf;
        }
        for j in 0..self.hidden {
            let i = w2_start + j;
            penalty += theta[i] * theta[i];
            grad[i] += self.alpha * theta[i] / mf;
        }
        loss += self.alpha * penalty / (2.0 * mf);

        (loss, grad)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub(crate) struct MlpModel {
    spec: MlpSpec,
    theta: Vec<f64>,
}

impl MlpModel {
    pub fn predict(&self, x: &Matrix) -> Vec<f64> {
        let mut hidden = vec![0.0; self.spec.hidden];
        (0..x.rows())
            .map(|r| self.spec.forward_row(&self.theta, x.row(r), &mut hidden))
            .collect()
    }
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn fit_mlp(
    x: &Matrix,
    y: &[f64],
    hidden: usize,
    alpha: f64,
    max_iter: usize,
    tol: f64,
    memory: usize,
    seed: u64,
) -> (MlpModel, TrainingMeta) {
    let spec = MlpSpec {
        input: x.cols(),
        hidden,
        alpha,
    };
    let theta0 = spec.init_theta(seed);
    let result = lbfgs(
        |t| spec.loss_and_grad(t, x, y),
        theta0,
        max_iter,
        tol,
        memory.max(1),
    );
    (
        MlpModel {
            spec,
            theta: result.theta,
        },
        TrainingMeta {
            iterations: result.iterations,
            converged: result.converged,
        },
    )
}

struct LbfgsResult {
    theta: Vec<f64>,
    iterations: usize,
    converged: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |acc, x| acc.max(x.abs()))
}

/// Limited-memory BFGS with a strong-Wolfe line search (c1=1e-4, c2=0.9).
/// Curvature pairs with `y.s <= 0` are skipped to keep the inverse
/// Hessian approximation positive definite.
fn lbfgs<F>(f: F, theta0: Vec<f64>, max_iter: usize, tol: f64, memory: usize) -> LbfgsResult
where
    F: Fn(&[f64]) -> (f64, Vec<f64>),
{
    let n = theta0.len();
    let mut theta = theta0;
    let (mut loss, mut grad) = f(&theta);
    let mut s_hist: Vec<Vec<f64>> = Vec::new();
    let mut y_hist: Vec<Vec<f64>> = Vec::new();
    let mut iterations = 0;

    for _ in 0..max_iter {
        if inf_norm(&grad) <= tol {
            return LbfgsResult {
                theta,
                iterations,
                converged: true,
            };
        }
        iterations += 1;

        // Two-loop recursion for the search direction.
        let mut direction: Vec<f64> = grad.iter().map(|g| -g).collect();
        let k = s_hist.len();
        let mut alphas = vec![0.0; k];
        for i in (0..k).rev() {
            let rho = 1.0 / dot(&y_hist[i], &s_hist[i]);
            let a = rho * dot(&s_hist[i], &direction);
            alphas[i] = a;
            for (d, yv) in direction.iter_mut().zip(&y_hist[i]) {
                *d -= a * yv;
            }
        }
        if k > 0 {
            let last = k - 1;
            let gamma = dot(&s_hist[last], &y_hist[last]) / dot(&y_hist[last], &y_hist[last]);
            for d in direction.iter_mut() {
                *d *= gamma;
            }
        }
        for i in 0..k {
            let rho = 1.0 / dot(&y_hist[i], &s_hist[i]);
            let b = rho * dot(&y_hist[i], &direction);
            for (d, sv) in direction.iter_mut().zip(&s_hist[i]) {
                *d += (alphas[i] - b) * sv;
            }
        }

        let mut dg = dot(&direction, &grad);
        if dg >= 0.0 {
            // Not a descent direction: restart from steepest descent.
            direction = grad.iter().map(|g| -g).collect();
            dg = -dot(&grad, &grad);
            s_hist.clear();
            y_hist.clear();
        }

        let Some((step, new_loss, new_grad)) = wolfe_search(&f, &theta, &direction, loss, dg)
        else {
            // Line search failed; give up at the current point.
            return LbfgsResult {
                theta,
                iterations,
                converged: false,
            };
        };

        let mut s = vec![0.0; n];
        let mut yv = vec![0.0; n];
        for i in 0..n {
            s[i] = step * direction[i];
            yv[i] = new_grad[i] - grad[i];
        }
        theta.iter_mut().zip(&s).for_each(|(t, si)| *t += si);
        if dot(&yv, &s) > 1e-10 {
            if s_hist.len() == memory {
                s_hist.remove(0);
                y_hist.remove(0);
            }
            s_hist.push(s);
            y_hist.push(yv);
        }
        loss = new_loss;
        grad = new_grad;
    }

    let converged = inf_norm(&grad) <= tol;
    LbfgsResult {
        theta,
        iterations,
        converged,
    }
}

const WOLFE_C1: f64 = 1e-4;
const WOLFE_C2: f64 = 0.9;

fn eval_at<F>(f: &F, theta: &[f64], direction: &[f64], step: f64) -> (f64, Vec<f64>, f64)
where
    F: Fn(&[f64]) -> (f64, Vec<f64>),
{
    let probe: Vec<f64> = theta
        .iter()
        .zip(direction)
        .map(|(t, d)| t + step * d)
        .collect();
    let (loss, grad) = f(&probe);
    let slope = dot(&grad, direction);
    (loss, grad, slope)
}

/// Bracket-and-zoom strong-Wolfe search. Returns (step, loss, grad).
fn wolfe_search<F>(
    f: &F,
    theta: &[f64],
    direction: &[f64],
    loss0: f64,
    slope0: f64,
) -> Option<(f64, f64, Vec<f64>)>
where
    F: Fn(&[f64]) -> (f64, Vec<f64>),
{
    let mut prev_step = 0.0;
    let mut prev_loss = loss0;
    let mut prev_slope = slope0;
    let mut step = 1.0;

    for iter in 0..20 {
        let (loss, grad, slope) = eval_at(f, theta, direction, step);
        if loss > loss0 + WOLFE_C1 * step * slope0 || (iter > 0 && loss >= prev_loss) {
            return zoom(
                f, theta, direction, loss0, slope0, prev_step, prev_loss, prev_slope, step, loss,
            );
        }
        if slope.abs() <= -WOLFE_C2 * slope0 {
            return Some((step, loss, grad));
        }
        if slope >= 0.0 {
            return zoom(
                f, theta, direction, loss0, slope0, step, loss, slope, prev_step, prev_loss,
            );
        }
        prev_step = step;
        prev_loss = loss;
        prev_slope = slope;
        step *= 2.0;
    }
    None
}

#[allow(clippy::too_many_arguments)]
fn zoom<F>(
    f: &F,
    theta: &[f64],
    direction: &[f64],
    loss0: f64,
    slope0: f64,
    mut lo: f64,
    mut loss_lo: f64,
    mut slope_lo: f64,
    mut hi: f64,
    mut loss_hi: f64,
) -> Option<(f64, f64, Vec<f64>)>
where
    F: Fn(&[f64]) -> (f64, Vec<f64>),
{
    for _ in 0..30 {
        // Quadratic interpolation with a bisection fallback.
        let mid = {
            let denom = 2.0 * (loss_hi - loss_lo - slope_lo * (hi - lo));
            let q = if denom.abs() > 1e-30 {
                lo - slope_lo * (hi - lo) * (hi - lo) / denom
            } else {
                f64::NAN
            };
            let (a, b) = if lo < hi { (lo, hi) } else { (hi, lo) };
            if q.is_finite() && q > a + 0.1 * (b - a) && q < b - 0.1 * (b - a) {
                q
            } else {
                0.5 * (lo + hi)
            }
        };
        let (loss, grad, slope) = eval_at(f, theta, direction, mid);
        if loss > loss0 + WOLFE_C1 * mid * slope0 || loss >= loss_lo {
            hi = mid;
            loss_hi = loss;
        } else {
            if slope.abs() <= -WOLFE_C2 * slope0 {
                return Some((mid, loss, grad));
            }
            if slope * (hi - lo) >= 0.0 {
                hi = lo;
                loss_hi = loss_lo;
            }
            lo = mid;
            loss_lo = loss;
            slope_lo = slope;
        }
        if (hi - lo).abs() < 1e-14 {
            if loss_lo < loss0 {
                let (l, g, _) = eval_at(f, theta, direction, lo);
                return Some((lo, l, g));
            }
            return None;
        }
    }
    if loss_lo < loss0 {
        let (l, g, _) = eval_at(f, theta, direction, lo);
        return Some((lo, l, g));
    }
    None
}
