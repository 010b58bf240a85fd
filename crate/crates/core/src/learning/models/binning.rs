use crate::learning::dataset::Matrix;

pub(crate) const MAX_BINS: usize = 256;

/// Training features mapped to at most 256 ordered bins per column.
///
/// Bin edges are training values (all distinct values when there are few,
/// evenly spaced ranks among them otherwise), so a split is "value below the
/// first edge of the right-hand bin" and only the order of values matters.
pub(crate) struct Binned {
    rows: usize,
    codes: Vec<u8>,
    edges: Vec<Vec<f64>>,
}

impl Binned {
    pub(crate) fn new(x: &Matrix) -> Self {
        let (n, d) = (x.rows(), x.cols());
        let mut codes = vec![0u8; n * d];
        let mut edges = Vec::with_capacity(d);
        let mut column = vec![0.0; n];
        for j in 0..d {
            for (i, c) in column.iter_mut().enumerate() {
                *c = x.get(i, j);
            }
            let mut uniq = column.clone();
            uniq.sort_by(f64::total_cmp);
            uniq.dedup();
            let e: Vec<f64> = if uniq.len() <= MAX_BINS {
                uniq
            } else {
                (0..MAX_BINS)
                    .map(|k| uniq[k * uniq.len() / MAX_BINS])
                    .collect()
            };
            for (i, &v) in column.iter().enumerate() {
                let b = e.partition_point(|&edge| edge <= v).saturating_sub(1);
                codes[j * n + i] = b as u8;
            }
            edges.push(e);
        }
        Binned { rows: n, codes, edges }
    }

    pub(crate) fn cols(&self) -> usize {
        self.edges.len()
    }

    pub(crate) fn column(&self, j: usize) -> &[u8] {
        &self.codes[j * self.rows..(j + 1) * self.rows]
    }

    pub(crate) fn bins(&self, j: usize) -> usize {
        self.edges[j].len()
    }

    /// Raw threshold separating bins `..=b` from `b+1..`.
    pub(crate) fn threshold(&self, j: usize, b: usize) -> f64 {
        self.edges[j][b + 1]
    }
}
