//! Soft-margin SVM trained with sequential minimal optimization.
//!
//! The solver sweeps the training set looking for KKT violators, picks the
//! second multiplier of each working pair from a seeded RNG, and stops after
//! `max_passes` consecutive sweeps without an update. Probabilities come
//! from a Platt sigmoid fitted to the training decision values by Newton
//! iteration.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{label_to_sign, ClassifierKind, ClassifyError, SvmParams};
use crate::labeling::Label;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum KernelKind {
    Linear,
    /// K(a, b) = exp(−γ‖a − b‖²); γ defaults to 1 / n_features.
    Rbf {
        gamma: Option<f64>,
    },
}

impl KernelKind {
    fn resolve(self, n_features: usize) -> ResolvedKernel {
        match self {
            KernelKind::Linear => ResolvedKernel::Linear,
            KernelKind::Rbf { gamma } => ResolvedKernel::Rbf {
                gamma: gamma.unwrap_or(1.0 / n_features.max(1) as f64),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum ResolvedKernel {
    Linear,
    Rbf { gamma: f64 },
}

impl ResolvedKernel {
    pub fn compute(&self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            ResolvedKernel::Linear => a.iter().zip(b).map(|(x, y)| x * y).sum(),
            ResolvedKernel::Rbf { gamma } => {
                let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
                (-gamma * d2).exp()
            }
        }
    }
}

/// A support vector in standardized feature space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupportVector {
    /// Index into the original training set.
    pub train_index: usize,
    pub x: Vec<f64>,
    /// αᵢ·yᵢ with y ∈ {−1, +1}.
    pub alpha_y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmState {
    pub kernel: ResolvedKernel,
    pub c: f64,
    pub support: Vec<SupportVector>,
    pub bias: f64,
    /// Platt sigmoid: p(stress | x) = 1 / (1 + exp(a·f(x) + b)).
    pub platt_a: f64,
    pub platt_b: f64,
    pub iterations: usize,
    /// Largest KKT residual over the training set at convergence.
    pub max_kkt_violation: f64,
}

impl SvmState {
    /// Decision value f(x) = Σ αᵢyᵢ K(xᵢ, x) + b on standardized input.
    pub fn decision_value(&self, z: &[f64]) -> f64 {
        let mut f = self.bias;
        for sv in &self.support {
            f += sv.alpha_y * self.kernel.compute(&sv.x, z);
        }
        f
    }

    pub fn probability(&self, z: &[f64]) -> f64 {
        let f = self.decision_value(z);
        1.0 / (1.0 + (self.platt_a * f + self.platt_b).exp())
    }
}

pub(super) fn train_svm(
    params: &SvmParams,
    z: &[Vec<f64>],
    y: &[Label],
    seed: u64,
) -> Result<SvmState, ClassifyError> {
    let n = z.len();
    let kernel = params.kernel.resolve(z[0].len());
    let signs: Vec<f64> = y.iter().map(|&l| label_to_sign(l)).collect();
    let c = params.c;
    let tol = params.tol;

    // Kernel matrix; cohorts here are small enough to keep it dense.
    let mut k = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i..n {
            let v = kernel.compute(&z[i], &z[j]);
            k[i][j] = v;
            k[j][i] = v;
        }
    }

    let mut alpha = vec![0.0f64; n];
    let mut bias = 0.0f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let decision = |alpha: &[f64], bias: f64, i: usize, k: &[Vec<f64>]| -> f64 {
        let mut f = bias;
        for j in 0..n {
            if alpha[j] != 0.0 {
                f += alpha[j] * signs[j] * k[i][j];
            }
        }
        f
    };

    let mut iterations = 0usize;
    let mut quiet_passes = 0usize;
    while quiet_passes < params.max_passes && iterations < params.max_iter {
        let mut changed = 0usize;
        for i in 0..n {
            let e_i = decision(&alpha, bias, i, &k) - signs[i];
            let violates =
                (signs[i] * e_i < -tol && alpha[i] < c) || (signs[i] * e_i > tol && alpha[i] > 0.0);
            if !violates {
                continue;
            }
            // Random second multiplier, distinct from i.
            let mut j = rng.random_range(0..n - 1);
            if j >= i {
                j += 1;
            }
            let e_j = decision(&alpha, bias, j, &k) - signs[j];

            let (alpha_i_old, alpha_j_old) = (alpha[i], alpha[j]);
            let (lo, hi) = if signs[i] != signs[j] {
                (
                    (alpha_j_old - alpha_i_old).max(0.0),
                    (c + alpha_j_old - alpha_i_old).min(c),
                )
            } else {
                (
                    (alpha_i_old + alpha_j_old - c).max(0.0),
                    (alpha_i_old + alpha_j_old).min(c),
                )
            };
            if lo >= hi {
                continue;
            }
            let eta = 2.0 * k[i][j] - k[i][i] - k[j][j];
            if eta >= 0.0 {
                continue;
            }

            let mut alpha_j_new = alpha_j_old - signs[j] * (e_i - e_j) / eta;
            alpha_j_new = alpha_j_new.clamp(lo, hi);
            if (alpha_j_new - alpha_j_old).abs() < 1e-7 {
                continue;
            }
            let alpha_i_new = alpha_i_old + signs[i] * signs[j] * (alpha_j_old - alpha_j_new);

            let b1 = bias
                - e_i
                - signs[i] * (alpha_i_new - alpha_i_old) * k[i][i]
                - signs[j] * (alpha_j_new - alpha_j_old) * k[i][j];
            let b2 = bias
                - e_j
                - signs[i] * (alpha_i_new - alpha_i_old) * k[i][j]
                - signs[j] * (alpha_j_new - alpha_j_old) * k[j][j];
            bias = if alpha_i_new > 0.0 && alpha_i_new < c {
                b1
            } else if alpha_j_new > 0.0 && alpha_j_new < c {
                b2
            } else {
                (b1 + b2) / 2.0
            };

            alpha[i] = alpha_i_new;
            alpha[j] = alpha_j_new;
            changed += 1;
            iterations += 1;
        }
        if changed == 0 {
            quiet_passes += 1;
        } else {
            quiet_passes = 0;
        }
    }

    // KKT residual over all training points:
    //   α = 0    requires y·f ≥ 1
    //   0 < α < C requires y·f = 1
    //   α = C    requires y·f ≤ 1
    let mut max_kkt = 0.0f64;
    let mut decisions = Vec::with_capacity(n);
    for i in 0..n {
        let f = decision(&alpha, bias, i, &k);
        decisions.push(f);
        let margin = signs[i] * f;
        let residual = if alpha[i] <= 0.0 {
            (1.0 - margin).max(0.0)
        } else if alpha[i] >= c {
            (margin - 1.0).max(0.0)
        } else {
            (margin - 1.0).abs()
        };
        max_kkt = max_kkt.max(residual);
    }

    let support: Vec<SupportVector> = (0..n)
        .filter(|&i| alpha[i] > 0.0)
        .map(|i| SupportVector {
            train_index: i,
            x: z[i].clone(),
            alpha_y: alpha[i] * signs[i],
        })
        .collect();

    let (platt_a, platt_b) = fit_platt(&decisions, y);

    if support.is_empty() {
        // No violators were ever found; with validated two-class input this
        // indicates a numerically degenerate kernel matrix.
        return Err(ClassifyError::NoConvergence {
            kind: ClassifierKind::Svm,
            iterations,
            objective: max_kkt,
        });
    }

    Ok(SvmState {
        kernel,
        c,
        support,
        bias,
        platt_a,
        platt_b,
        iterations,
        max_kkt_violation: max_kkt,
    })
}

/// Fits the Platt sigmoid p = 1/(1 + exp(a·f + b)) on training decision
/// values with the regularized targets and damped Newton iteration from
/// Lin, Lin & Weng (2007).
fn fit_platt(decisions: &[f64], y: &[Label]) -> (f64, f64) {
    let n = decisions.len();
    let n_pos = y.iter().filter(|&&l| l == Label::Stress).count() as f64;
    let n_neg = n as f64 - n_pos;
    let hi_target = (n_pos + 1.0) / (n_pos + 2.0);
    let lo_target = 1.0 / (n_neg + 2.0);
    let targets: Vec<f64> = y
        .iter()
        .map(|&l| match l {
            Label::Stress => hi_target,
            Label::Control => lo_target,
        })
        .collect();

    let mut a = 0.0f64;
    let mut b = ((n_neg + 1.0) / (n_pos + 1.0)).ln();

    let objective = |a: f64, b: f64| -> f64 {
        let mut obj = 0.0;
        for (&f, &t) in decisions.iter().zip(&targets) {
            let z = a * f + b;
            // log(1 + exp(−|z|)) formulation keeps this stable for large |z|.
            let log1p_exp = if z >= 0.0 {
                (-z).exp().ln_1p()
            } else {
                z.exp().ln_1p() - z
            };
            obj += t * z + log1p_exp;
        }
        obj
    };

    let mut obj = objective(a, b);
    for _ in 0..100 {
        // Gradient and Hessian of the negative log-likelihood.
        let (mut g_a, mut g_b) = (0.0f64, 0.0f64);
        let (mut h_aa, mut h_ab, mut h_bb) = (1e-12f64, 0.0f64, 1e-12f64);
        for (&f, &t) in decisions.iter().zip(&targets) {
            let z = a * f + b;
            let p = if z >= 0.0 {
                let e = (-z).exp();
                e / (1.0 + e)
            } else {
                1.0 / (1.0 + z.exp())
            };
            let d1 = t - p;
            let d2 = p * (1.0 - p);
            g_a += f * d1;
            g_b += d1;
            h_aa += f * f * d2;
            h_ab += f * d2;
            h_bb += d2;
        }
        if g_a.abs() < 1e-10 && g_b.abs() < 1e-10 {
            break;
        }
        let det = h_aa * h_bb - h_ab * h_ab;
        let step_a = -(h_bb * g_a - h_ab * g_b) / det;
        let step_b = -(h_aa * g_b - h_ab * g_a) / det;

        // Backtracking line search on the objective.
        let mut stepsize = 1.0;
        loop {
            let na = a + stepsize * step_a;
            let nb = b + stepsize * step_b;
            let new_obj = objective(na, nb);
            if new_obj < obj + 1e-4 * stepsize * (g_a * step_a + g_b * step_b) {
                a = na;
                b = nb;
                obj = new_obj;
                break;
            }
            stepsize /= 2.0;
            if stepsize < 1e-10 {
                return (a, b);
            }
        }
    }
    (a, b)
}
