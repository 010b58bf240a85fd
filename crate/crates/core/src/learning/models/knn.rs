use super::NUM_CLASSES;
use crate::learning::dataset::Matrix;

/// Brute-force k nearest neighbours in raw Euclidean space.
///
/// Neighbours are ranked by (distance, class index, training order); the vote
/// is a plain majority with ties to the smaller class index.
#[derive(Debug, Clone)]
pub struct Knn {
    x: Matrix,
    y: Vec<usize>,
    k: usize,
}

impl Knn {
    pub fn fit(x: &Matrix, y: &[usize], k: usize) -> Self {
        Knn {
            x: x.clone(),
            y: y.to_vec(),
            k: k.clamp(1, y.len().max(1)),
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn neighbours(&self, row: &[f64]) -> Vec<usize> {
        let mut d: Vec<(f64, usize, usize)> = (0..self.x.rows())
            .map(|i| {
                let dist: f64 = self
                    .x
                    .row(i)
                    .iter()
                    .zip(row)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum();
                (dist, self.y[i], i)
            })
            .collect();
        let key = |a: &(f64, usize, usize), b: &(f64, usize, usize)| {
            a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2))
        };
        if self.k < d.len() {
            d.select_nth_unstable_by(self.k - 1, key);
            d.truncate(self.k);
        }
        d.sort_unstable_by(key);
        d.into_iter().map(|(_, _, i)| i).collect()
    }

    pub fn predict_row(&self, row: &[f64]) -> usize {
        let mut votes = [0usize; NUM_CLASSES];
        for i in self.neighbours(row) {
            votes[self.y[i]] += 1;
        }
        let best = *votes.iter().max().expect("three classes");
        votes.iter().position(|&v| v == best).expect("max exists")
    }
}
