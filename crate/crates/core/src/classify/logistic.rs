//! L2-regularized logistic regression trained by gradient descent with a
//! backtracking line search.
//!
//! Objective (strictly convex, so the descent is monotone):
//!
//! ```text
//! J(w, b) = mean cross-entropy + (λ/2)·‖w‖²
//! ```
//!
//! The intercept is not penalized. Training stops when the gradient norm
//! drops below `grad_tol` or the iteration cap is reached.

use serde::{Deserialize, Serialize};

use super::{label_to_unit, ClassifierKind, ClassifyError, LogisticParams};
use crate::labeling::Label;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticState {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub iterations: usize,
    pub final_grad_norm: f64,
    /// Objective value after each accepted step; not persisted.
    #[serde(skip)]
    pub objective_trace: Vec<f64>,
}

impl LogisticState {
    pub fn probability(&self, z: &[f64]) -> f64 {
        let logit: f64 = self.bias + self.weights.iter().zip(z).map(|(w, v)| w * v).sum::<f64>();
        sigmoid(logit)
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

pub(super) fn train_logistic(
    params: &LogisticParams,
    z: &[Vec<f64>],
    y: &[Label],
) -> Result<LogisticState, ClassifyError> {
    let n = z.len();
    let d = z[0].len();
    let targets: Vec<f64> = y.iter().map(|&l| label_to_unit(l)).collect();

    let objective = |w: &[f64], b: f64| -> f64 {
        let mut loss = 0.0;
        for (row, &t) in z.iter().zip(&targets) {
            let logit = b + dot(w, row);
            // Stable −[t·log p + (1−t)·log(1−p)] = log(1+e^logit) − t·logit.
            let log1p_exp = if logit >= 0.0 {
                logit + (-logit).exp().ln_1p()
            } else {
                logit.exp().ln_1p()
            };
            loss += log1p_exp - t * logit;
        }
        loss / n as f64 + 0.5 * params.l2 * w.iter().map(|v| v * v).sum::<f64>()
    };

    let mut w = vec![0.0f64; d];
    let mut b = 0.0f64;
    let mut obj = objective(&w, b);
    let mut trace = vec![obj];
    let mut grad_norm = f64::INFINITY;
    let mut iterations = 0usize;

    while iterations < params.max_iter {
        let mut g_w = vec![0.0f64; d];
        let mut g_b = 0.0f64;
        for (row, &t) in z.iter().zip(&targets) {
            let err = sigmoid(b + dot(&w, row)) - t;
            for (g, v) in g_w.iter_mut().zip(row) {
                *g += err * v;
            }
            g_b += err;
        }
        for (g, wv) in g_w.iter_mut().zip(&w) {
            *g = *g / n as f64 + params.l2 * wv;
        }
        g_b /= n as f64;

        grad_norm = (g_w.iter().map(|g| g * g).sum::<f64>() + g_b * g_b).sqrt();
        if grad_norm < params.grad_tol {
            break;
        }

        // Backtracking: halve the step until the Armijo condition holds.
        let g_squared = grad_norm * grad_norm;
        let mut step = 1.0f64;
        loop {
            let w_next: Vec<f64> = w.iter().zip(&g_w).map(|(wv, g)| wv - step * g).collect();
            let b_next = b - step * g_b;
            let obj_next = objective(&w_next, b_next);
            if obj_next.is_finite() && obj_next <= obj - 1e-4 * step * g_squared {
                w = w_next;
                b = b_next;
                obj = obj_next;
                break;
            }
            step /= 2.0;
            if step < 1e-16 {
                return Err(ClassifyError::NoConvergence {
                    kind: ClassifierKind::LogisticRegression,
                    iterations,
                    objective: obj,
                });
            }
        }
        trace.push(obj);
        iterations += 1;
    }

    Ok(LogisticState {
        weights: w,
        bias: b,
        iterations,
        final_grad_norm: grad_norm,
        objective_trace: trace,
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
