//! Per-feature standardization fit on training data only.

use serde::{Deserialize, Serialize};

/// Column means and standard deviations of the training matrix.
///
/// Constant columns get an SD of 1 so that transformation is the identity
/// shift rather than a division by zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub means: Vec<f64>,
    pub sds: Vec<f64>,
}

impl Scaler {
    /// Fits on the rows of `x` with the sample (n − 1) standard deviation.
    pub fn fit(x: &[Vec<f64>]) -> Scaler {
        let n = x.len();
        let d = x.first().map_or(0, Vec::len);
        let mut means = vec![0.0; d];
        for row in x {
            for (m, v) in means.iter_mut().zip(row) {
                *m += v;
            }
        }
        for m in &mut means {
            *m /= n as f64;
        }
        let mut sds = vec![0.0; d];
        if n > 1 {
            for row in x {
                for ((s, m), v) in sds.iter_mut().zip(&means).zip(row) {
                    *s += (v - m) * (v - m);
                }
            }
            for s in &mut sds {
                *s = (*s / (n - 1) as f64).sqrt();
            }
        }
        for s in &mut sds {
            if !s.is_finite() || *s <= 1e-12 {
                *s = 1.0;
            }
        }
        Scaler { means, sds }
    }

    pub fn transform(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.means.iter().zip(&self.sds))
            .map(|(v, (m, s))| (v - m) / s)
            .collect()
    }

    pub fn transform_matrix(&self, x: &[Vec<f64>]) -> Vec<Vec<f64>> {
        x.iter().map(|row| self.transform(row)).collect()
    }
}
