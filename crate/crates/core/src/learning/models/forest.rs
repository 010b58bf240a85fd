use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::binning::Binned;
use super::tree::{grow_classifier, ClassificationTree, TreeParams};
use super::{MaxFeatures, NUM_CLASSES};
use crate::learning::dataset::Matrix;

/// Bagged Gini trees with a random feature subset per split; majority vote,
/// ties to the smaller class index.
#[derive(Debug, Clone)]
pub struct RandomForest {
    trees: Vec<ClassificationTree>,
    cols: usize,
}

impl RandomForest {
    pub fn fit(
        x: &Matrix,
        y: &[usize],
        trees: usize,
        max_depth: usize,
        max_features: MaxFeatures,
        bootstrap: bool,
        seed: u64,
    ) -> Self {
        let binned = Binned::new(x);
        let n = x.rows();
        let params = TreeParams {
            max_depth,
            max_features: max_features.resolve(x.cols()),
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let grown = (0..trees)
            .map(|_| {
                let samples: Vec<u32> = if bootstrap {
                    (0..n).map(|_| rng.gen_range(0..n as u32)).collect()
                } else {
                    (0..n as u32).collect()
                };
                grow_classifier(&binned, y, samples, params, &mut rng)
            })
            .collect();
        RandomForest {
            trees: grown,
            cols: x.cols(),
        }
    }

    pub fn trees(&self) -> &[ClassificationTree] {
        &self.trees
    }

    pub fn predict_row(&self, row: &[f64]) -> usize {
        let mut votes = [0usize; NUM_CLASSES];
        for t in &self.trees {
            votes[t.predict_row(row)] += 1;
        }
        let best = *votes.iter().max().expect("classes");
        votes.iter().position(|&v| v == best).expect("max")
    }

    pub fn split_counts(&self) -> Vec<usize> {
        let mut c = vec![0; self.cols];
        for t in &self.trees {
            t.0.add_split_counts(&mut c);
        }
        c
    }
}
