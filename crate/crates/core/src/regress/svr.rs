//! Epsilon-insensitive support vector regression with an RBF kernel,
//! solved in the dual by sequential optimization of maximal-violating
//! variable pairs.
//!
//! The 2n dual variables are `[alpha; alpha*]` with signs `+1/-1`; each
//! step picks the most violating pair under the equality constraint,
//! solves the two-variable subproblem analytically, clips to the box
//! `[0, C]`, and updates the gradient. The bias is the midpoint of the
//! KKT-feasible interval at termination.

use serde::{Deserialize, Serialize};

use super::TrainingMeta;
use crate::matrix::Matrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub(crate) struct SvrModel {
    gamma: f64,
    bias: f64,
    support_rows: Vec<Vec<f64>>,
    support_beta: Vec<f64>,
}

fn rbf(a: &[f64], b: &[f64], gamma: f64) -> f64 {
    let sq: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    (-gamma * sq).exp()
}

impl SvrModel {
    pub fn predict(&self, x: &Matrix) -> Vec<f64> {
        (0..x.rows())
            .map(|r| {
                let row = x.row(r);
                self.bias
                    + self
                        .support_rows
                        .iter()
                        .zip(&self.support_beta)
                        .map(|(sv, beta)| beta * rbf(sv, row, self.gamma))
                        .sum::<f64>()
            })
            .collect()
    }
}

struct DualState {
    /// All 2n dual variables: `[alpha; alpha*]`.
    a: Vec<f64>,
    grad: Vec<f64>,
    meta: TrainingMeta,
}

fn solve_dual(
    x: &Matrix,
    y: &[f64],
    c: f64,
    gamma: f64,
    epsilon: f64,
    tol: f64,
    max_iter: usize,
) -> DualState {
    let n = x.rows();
    let rows: Vec<&[f64]> = (0..n).map(|r| x.row(r)).collect();

    // Cache the n x n kernel once; Q_ij = s_i s_j K_(i%n)(j%n).
    let mut kernel = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let k = rbf(rows[i], rows[j], gamma);
            kernel[i * n + j] = k;
            kernel[j * n + i] = k;
        }
    }
    let kval = |i: usize, j: usize| kernel[(i % n) * n + (j % n)];
    let sign = |t: usize| if t < n { 1.0 } else { -1.0 };

    let mut a = vec![0.0f64; 2 * n];
    // G_t = p_t at a = 0: epsilon - y for alpha, epsilon + y for alpha*.
    let mut grad: Vec<f64> = (0..2 * n)
        .map(|t| {
            if t < n {
                epsilon - y[t]
            } else {
                epsilon + y[t - n]
            }
        })
        .collect();

    let mut iterations = 0usize;
    let mut converged = false;

    while iterations < max_iter {
        // Maximal violating pair over -s_t G_t; ties keep the lowest index.
        let mut up: Option<(f64, usize)> = None;
        let mut low: Option<(f64, usize)> = None;
        for t in 0..2 * n {
            let v = -sign(t) * grad[t];
            let in_up = (t < n && a[t] < c) || (t >= n && a[t] > 0.0);
            let in_low = (t < n && a[t] > 0.0) || (t >= n && a[t] < c);
            if in_up && up.map(|(best, _)| v > best).unwrap_or(true) {
                up = Some((v, t));
            }
            if in_low && low.map(|(best, _)| v < best).unwrap_or(true) {
                low = Some((v, t));
            }
        }
        let (Some((m_up, i)), Some((m_low, j))) = (up, low) else {
            converged = true;
            break;
        };
        if m_up - m_low <= tol {
            converged = true;
            break;
        }
        iterations += 1;

        let si = sign(i);
        let sj = sign(j);
        let same = si * sj;
        let quad = (kval(i, i) + kval(j, j) - 2.0 * same * kval(i, j)).max(1e-12);
        let mut delta = -(grad[i] - same * grad[j]) / quad;

        // Box constraints on a_i + delta and a_j - same * delta.
        let (mut lo_b, mut hi_b) = (-a[i], c - a[i]);
        if same > 0.0 {
            lo_b = lo_b.max(a[j] - c);
            hi_b = hi_b.min(a[j]);
        } else {
            lo_b = lo_b.max(-a[j]);
            hi_b = hi_b.min(c - a[j]);
        }
        delta = delta.clamp(lo_b, hi_b);
        if delta == 0.0 {
            break;
        }

        a[i] += delta;
        a[j] -= same * delta;
        for (t, g) in grad.iter_mut().enumerate() {
            let st = sign(t);
            *g += st * si * kval(t, i) * delta - st * sj * kval(t, j) * same * delta;
        }
    }

    DualState {
        a,
        grad,
        meta: TrainingMeta {
            iterations,
            converged,
        },
    }
}

pub(crate) fn fit_svr(
    x: &Matrix,
    y: &[f64],
    c: f64,
    gamma: f64,
    epsilon: f64,
    tol: f64,
    max_iter: usize,
) -> (SvrModel, TrainingMeta) {
    let n = x.rows();
    let state = solve_dual(x, y, c, gamma, epsilon, tol, max_iter);
    let sign = |t: usize| if t < n { 1.0 } else { -1.0 };

    // Bias: midpoint of the KKT interval; fall back to the full range when
    // every variable sits on the same bound (e.g. C = 0).
    let mut m_up = f64::NEG_INFINITY;
    let mut m_low = f64::INFINITY;
    for t in 0..2 * n {
        let v = -sign(t) * state.grad[t];
        let in_up = (t < n && state.a[t] < c) || (t >= n && state.a[t] > 0.0);
        let in_low = (t < n && state.a[t] > 0.0) || (t >= n && state.a[t] < c);
        if in_up {
            m_up = m_up.max(v);
        }
        if in_low {
            m_low = m_low.min(v);
        }
    }
    if !m_up.is_finite() || !m_low.is_finite() {
        m_up = f64::NEG_INFINITY;
        m_low = f64::INFINITY;
        for t in 0..2 * n {
            let v = -sign(t) * state.grad[t];
            m_up = m_up.max(v);
            m_low = m_low.min(v);
        }
    }
    let bias = 0.5 * (m_up + m_low);

    let mut support_rows = Vec::new();
    let mut support_beta = Vec::new();
    for t in 0..n {
        let beta = state.a[t] - state.a[t + n];
        if beta != 0.0 {
            support_rows.push(x.row(t).to_vec());
            support_beta.push(beta);
        }
    }

    (
        SvrModel {
            gamma,
            bias,
            support_rows,
            support_beta,
        },
        state.meta,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{normal_vec, seeded};

    fn sine_problem(m: usize) -> (Matrix, Vec<f64>) {
        let rows: Vec<Vec<f64>> = (0..m).map(|i| vec![i as f64 / m as f64 * 6.0]).collect();
        let y: Vec<f64> = rows.iter().map(|r| r[0].sin()).collect();
        (Matrix::from_rows(&rows).unwrap(), y)
    }

    #[test]
    fn fits_smooth_function_within_epsilon_band() {
        let (x, y) = sine_problem(40);
        let (model, meta) = fit_svr(&x, &y, 10.0, 0.5, 0.05, 1e-3, 100_000);
        assert!(meta.converged);
        let pred = model.predict(&x);
        let worst = pred
            .iter()
            .zip(&y)
            .map(|(p, t)| (p - t).abs())
            .fold(0.0f64, f64::max);
        // Converged epsilon-SVR keeps training error near the tube width.
        assert!(worst <= 0.05 + 0.05, "worst residual {worst}");
    }

    #[test]
    fn dual_respects_box_constraints() {
        let mut rng = seeded(3);
        let rows: Vec<Vec<f64>> = (0..25).map(|_| normal_vec(&mut rng, 2, 0.0, 1.0)).collect();
        let y: Vec<f64> = rows.iter().map(|r| r[0] - 0.5 * r[1]).collect();
        let x = Matrix::from_rows(&rows).unwrap();
        let c = 0.3;
        let state = solve_dual(&x, &y, c, 0.1, 0.1, 1e-3, 100_000);
        for v in &state.a {
            assert!(*v >= -1e-12 && *v <= c + 1e-12, "dual var {v} outside [0, {c}]");
        }
        // Equality constraint sum(alpha - alpha*) = 0 is maintained.
        let n = x.rows();
        let balance: f64 = (0..n).map(|t| state.a[t] - state.a[t + n]).sum();
        assert!(balance.abs() <= 1e-12);
    }

    #[test]
    fn tiny_c_predictions_bounded_by_targets() {
        let (x, y) = sine_problem(30);
        let eps = 0.1;
        let (model, _) = fit_svr(&x, &y, 1e-9, 0.1, eps, 1e-3, 10_000);
        let max_y = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for p in model.predict(&x) {
            assert!(p.abs() <= max_y + eps + 1e-9, "prediction {p} escapes bound");
        }
    }

    #[test]
    fn budget_exhaustion_flags_non_convergence() {
        let (x, y) = sine_problem(30);
        let (_, meta) = fit_svr(&x, &y, 10.0, 0.5, 0.001, 1e-9, 3);
        assert!(!meta.converged);
        assert_eq!(meta.iterations, 3);
    }
}
