use super::binning::Binned;
use super::tree::{grow_regressor, Tree};
use super::{argmax, NUM_CLASSES};
use crate::learning::dataset::Matrix;

/// One-vs-rest gradient boosting: per class, an additive model of
/// depth-limited Newton regression trees on the logistic loss. Predicts the
/// class with the largest margin.
#[derive(Debug, Clone)]
pub struct GradientBoosting {
    base: [f64; NUM_CLASSES],
    shrinkage: f64,
    trees: Vec<[Option<Tree<f64>>; NUM_CLASSES]>,
    cols: usize,
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

impl GradientBoosting {
    pub fn fit(x: &Matrix, y: &[usize], trees: usize, max_depth: usize, shrinkage: f64) -> Self {
        let n = x.rows();
        let binned = Binned::new(x);
        let mut base = [0.0; NUM_CLASSES];
        let mut present = [false; NUM_CLASSES];
        for c in 0..NUM_CLASSES {
            let k = y.iter().filter(|&&l| l == c).count();
            present[c] = k > 0;
            // Absent classes get a margin no fitted class can lose to.
            base[c] = if k == 0 {
                -1e9
            } else if k == n {
                1e9
            } else {
                let p = k as f64 / n as f64;
                (p / (1.0 - p)).ln()
            };
        }
        let mut margin: Vec<[f64; NUM_CLASSES]> = vec![base; n];
        let mut grad = vec![0.0; n];
        let mut hess = vec![0.0; n];
        let mut rounds = Vec::with_capacity(trees);
        for _ in 0..trees {
            let mut round: [Option<Tree<f64>>; NUM_CLASSES] = [None, None, None];
            for c in 0..NUM_CLASSES {
                if !present[c] {
                    continue;
                }
                for i in 0..n {
                    let p = sigmoid(margin[i][c]);
                    grad[i] = p - if y[i] == c { 1.0 } else { 0.0 };
                    hess[i] = (p * (1.0 - p)).max(1e-16);
                }
                let tree = grow_regressor(&binned, &grad, &hess, max_depth);
                for i in 0..n {
                    margin[i][c] += shrinkage * tree.leaf(x.row(i));
                }
                round[c] = Some(tree);
            }
            rounds.push(round);
        }
        GradientBoosting {
            base,
            shrinkage,
            trees: rounds,
            cols: x.cols(),
        }
    }

    pub fn margins(&self, row: &[f64]) -> [f64; NUM_CLASSES] {
        let mut m = self.base;
        for round in &self.trees {
            for (c, t) in round.iter().enumerate() {
                if let Some(t) = t {
                    m[c] += self.shrinkage * t.leaf(row);
                }
            }
        }
        m
    }

    pub fn predict_row(&self, row: &[f64]) -> usize {
        argmax(&self.margins(row))
    }

    pub fn split_counts(&self) -> Vec<usize> {
        let mut c = vec![0; self.cols];
        for round in &self.trees {
            for t in round.iter().flatten() {
                t.add_split_counts(&mut c);
            }
        }
        c
    }
}
