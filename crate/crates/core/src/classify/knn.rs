//! K-nearest-neighbour classification over standardized instances.

use serde::{Deserialize, Serialize};

use super::label_to_unit;
use crate::labeling::Label;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnState {
    pub k: usize,
    pub instances: Vec<(Vec<f64>, Label)>,
}

pub(super) fn train_knn(params: &super::KnnParams, z: &[Vec<f64>], y: &[Label]) -> KnnState {
    KnnState {
        k: params.k.min(z.len()),
        instances: z.iter().cloned().zip(y.iter().copied()).collect(),
    }
}

impl KnnState {
    /// Fraction of stress votes among the k nearest neighbours.
    ///
    /// Neighbours are ordered by distance, then by feature values, then by
    /// label, so the ranking does not depend on training-set order. A split
    /// vote (possible only for even k) goes to the class with the smaller
    /// mean distance, control on a further tie.
    pub fn probability(&self, z: &[f64]) -> f64 {
        let mut ranked: Vec<(f64, &Vec<f64>, Label)> = self
            .instances
            .iter()
            .map(|(x, label)| {
                let d = x
                    .iter()
                    .zip(z)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                (d, x, *label)
            })
            .collect();
        ranked.sort_by(|a, b| {
            a.0.total_cmp(&b.0)
                .then_with(|| lex_cmp(a.1, b.1))
                .then(a.2.cmp(&b.2))
        });
        let k = self.k.min(ranked.len());
        let neighbours = &ranked[..k];
        let stress_votes = neighbours
            .iter()
            .filter(|(_, _, l)| *l == Label::Stress)
            .count();
        if 2 * stress_votes == k {
            let mean_dist = |label: Label| {
                let dists: Vec<f64> = neighbours
                    .iter()
                    .filter(|(_, _, l)| *l == label)
                    .map(|(d, _, _)| *d)
                    .collect();
                dists.iter().sum::<f64>() / dists.len() as f64
            };
            let winner = if mean_dist(Label::Stress) < mean_dist(Label::Control) {
                Label::Stress
            } else {
                Label::Control
            };
            // Nudged off 0.5 so the argmax matches the tie-break.
            return 0.5 + (label_to_unit(winner) - 0.5) * 1e-9;
        }
        stress_votes as f64 / k as f64
    }
}

fn lex_cmp(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        let ord = x.total_cmp(y);
        if ord != std::cmp::Ordering::Equal {
            return ord;
        }
    }
    a.len().cmp(&b.len())
}
