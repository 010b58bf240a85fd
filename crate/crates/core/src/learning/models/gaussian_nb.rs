use super::{argmax, NUM_CLASSES};
use crate::learning::dataset::Matrix;

/// Per-feature Gaussian class conditionals. Every variance is raised by
/// `var_smoothing` times the largest feature variance; classes absent from
/// the training data are never predicted.
#[derive(Debug, Clone)]
pub struct GaussianNb {
    log_prior: [f64; NUM_CLASSES],
    mean: Vec<Vec<f64>>,
    var: Vec<Vec<f64>>,
}

impl GaussianNb {
    pub fn fit(x: &Matrix, y: &[usize], var_smoothing: f64) -> Self {
        let (n, d) = (x.rows(), x.cols());
        let mut count = [0usize; NUM_CLASSES];
        let mut mean = vec![vec![0.0; d]; NUM_CLASSES];
        let mut var = vec![vec![0.0; d]; NUM_CLASSES];
        for i in 0..n {
            count[y[i]] += 1;
            for (j, v) in x.row(i).iter().enumerate() {
                mean[y[i]][j] += v;
            }
        }
        for c in 0..NUM_CLASSES {
            if count[c] > 0 {
                mean[c].iter_mut().for_each(|m| *m /= count[c] as f64);
            }
        }
        for i in 0..n {
            for (j, v) in x.row(i).iter().enumerate() {
                var[y[i]][j] += (v - mean[y[i]][j]).powi(2);
            }
        }
        let mut overall = vec![0.0; d];
        let mut grand = vec![0.0; d];
        for i in 0..n {
            for (j, v) in x.row(i).iter().enumerate() {
                grand[j] += v / n as f64;
            }
        }
        for i in 0..n {
            for (j, v) in x.row(i).iter().enumerate() {
                overall[j] += (v - grand[j]).powi(2) / n as f64;
            }
        }
        let max_var = overall.iter().cloned().fold(0.0f64, f64::max);
        let epsilon = (var_smoothing * max_var).max(1e-300);
        for c in 0..NUM_CLASSES {
            for v in &mut var[c] {
                *v = if count[c] > 0 { *v / count[c] as f64 } else { 0.0 } + epsilon;
            }
        }
        let mut log_prior = [f64::NEG_INFINITY; NUM_CLASSES];
        for c in 0..NUM_CLASSES {
            if count[c] > 0 {
                log_prior[c] = (count[c] as f64 / n as f64).ln();
            }
        }
        GaussianNb {
            log_prior,
            mean,
            var,
        }
    }

    pub fn log_joint(&self, row: &[f64]) -> [f64; NUM_CLASSES] {
        let mut out = self.log_prior;
        for c in 0..NUM_CLASSES {
            if out[c] == f64::NEG_INFINITY {
                continue;
            }
            for (j, v) in row.iter().enumerate() {
                let var = self.var[c][j];
                out[c] -= 0.5 * ((2.0 * std::f64::consts::PI * var).ln() + (v - self.mean[c][j]).powi(2) / var);
            }
        }
        out
    }

    pub fn predict_row(&self, row: &[f64]) -> usize {
        argmax(&self.log_joint(row))
    }
}
