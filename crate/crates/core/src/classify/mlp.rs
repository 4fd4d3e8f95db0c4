//! One-hidden-layer perceptron, sigmoid activations throughout, trained by
//! full-batch backpropagation on the mean squared-error objective
//! E = ½(y − f(x))² per instance.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{label_to_unit, MlpParams};
use crate::labeling::Label;

/// Network weights. `w_hidden[j]` feeds hidden unit j; `w_out` maps the
/// hidden layer to the single sigmoid output, whose value is used directly
/// as the stress probability.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpNet {
    pub w_hidden: Vec<Vec<f64>>,
    pub b_hidden: Vec<f64>,
    pub w_out: Vec<f64>,
    pub b_out: f64,
    pub epochs_run: usize,
}

/// Gradients in the same layout as [`MlpNet`].
#[derive(Debug, Clone, PartialEq)]
pub struct MlpGradients {
    pub w_hidden: Vec<Vec<f64>>,
    pub b_hidden: Vec<f64>,
    pub w_out: Vec<f64>,
    pub b_out: f64,
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

impl MlpNet {
    /// Fresh network with weights uniform in ±`init_scale`, drawn in a fixed
    /// order (hidden weights row by row, hidden biases, output weights,
    /// output bias) so initialization is reproducible from the seed.
    pub fn init(n_inputs: usize, hidden_units: usize, init_scale: f64, seed: u64) -> MlpNet {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let draw = |rng: &mut ChaCha8Rng| rng.random_range(-init_scale..init_scale);
        let w_hidden = (0..hidden_units)
            .map(|_| (0..n_inputs).map(|_| draw(&mut rng)).collect())
            .collect();
        let b_hidden = (0..hidden_units).map(|_| draw(&mut rng)).collect();
        let w_out = (0..hidden_units).map(|_| draw(&mut rng)).collect();
        let b_out = draw(&mut rng);
        MlpNet {
            w_hidden,
            b_hidden,
            w_out,
            b_out,
            epochs_run: 0,
        }
    }

    fn hidden_activations(&self, x: &[f64]) -> Vec<f64> {
        self.w_hidden
            .iter()
            .zip(&self.b_hidden)
            .map(|(w, b)| sigmoid(b + w.iter().zip(x).map(|(wi, xi)| wi * xi).sum::<f64>()))
            .collect()
    }

    /// Network output f(x) ∈ (0, 1).
    pub fn forward(&self, x: &[f64]) -> f64 {
        let h = self.hidden_activations(x);
        sigmoid(self.b_out + self.w_out.iter().zip(&h).map(|(w, hi)| w * hi).sum::<f64>())
    }

    /// Mean squared-error loss (½(y − f)² averaged over the batch).
    pub fn mean_loss(&self, x: &[Vec<f64>], targets: &[f64]) -> f64 {
        x.iter()
            .zip(targets)
            .map(|(row, &t)| super::mlp_loss(t, self.forward(row)))
            .sum::<f64>()
            / x.len() as f64
    }

    /// Backpropagated gradients of the mean loss.
    pub fn gradients(&self, x: &[Vec<f64>], targets: &[f64]) -> MlpGradients {
        let n_inputs = self.w_hidden.first().map_or(0, Vec::len);
        let hidden = self.w_hidden.len();
        let mut g = MlpGradients {
            w_hidden: vec![vec![0.0; n_inputs]; hidden],
            b_hidden: vec![0.0; hidden],
            w_out: vec![0.0; hidden],
            b_out: 0.0,
        };
        let inv_n = 1.0 / x.len() as f64;
        for (row, &t) in x.iter().zip(targets) {
            let h = self.hidden_activations(row);
            let out =
                sigmoid(self.b_out + self.w_out.iter().zip(&h).map(|(w, hi)| w * hi).sum::<f64>());
            // dE/d(out logit) = (f − y)·f·(1 − f)
            let delta_out = (out - t) * out * (1.0 - out);
            for (gw, hi) in g.w_out.iter_mut().zip(&h) {
                *gw += delta_out * hi * inv_n;
            }
            g.b_out += delta_out * inv_n;
            for (((g_row, g_b), w_out_j), h_j) in g
                .w_hidden
                .iter_mut()
                .zip(&mut g.b_hidden)
                .zip(&self.w_out)
                .zip(&h)
            {
                let delta_h = delta_out * w_out_j * h_j * (1.0 - h_j);
                for (gw, xi) in g_row.iter_mut().zip(row) {
                    *gw += delta_h * xi * inv_n;
                }
                *g_b += delta_h * inv_n;
            }
        }
        g
    }

    fn apply_gradients(&mut self, g: &MlpGradients, lr: f64) {
        for (w_row, g_row) in self.w_hidden.iter_mut().zip(&g.w_hidden) {
            for (w, gv) in w_row.iter_mut().zip(g_row) {
                *w -= lr * gv;
            }
        }
        for (b, gv) in self.b_hidden.iter_mut().zip(&g.b_hidden) {
            *b -= lr * gv;
        }
        for (w, gv) in self.w_out.iter_mut().zip(&g.w_out) {
            *w -= lr * gv;
        }
        self.b_out -= lr * g.b_out;
    }
}

pub(super) fn train_mlp(params: &MlpParams, z: &[Vec<f64>], y: &[Label], seed: u64) -> MlpNet {
    let targets: Vec<f64> = y.iter().map(|&l| label_to_unit(l)).collect();
    let mut net = MlpNet::init(z[0].len(), params.hidden_units, params.init_scale, seed);
    for _ in 0..params.epochs {
        let g = net.gradients(z, &targets);
        net.apply_gradients(&g, params.learning_rate);
    }
    net.epochs_run = params.epochs;
    net
}
