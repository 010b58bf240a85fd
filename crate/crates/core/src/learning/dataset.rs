use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{FeatureMatrix, FeatureSet, FeatureVector};
use crate::stance::{Stance, StanceAssignment};

/// `FS_t(u)` paired with `c_{t+1}(u)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub features: FeatureVector,
    pub label: Stance,
}

impl Instance {
    pub fn user(&self) -> &str {
        &self.features.user
    }

    pub fn period(&self) -> usize {
        self.features.period
    }

    pub fn current_stance(&self) -> Stance {
        self.features.current_stance
    }
}

/// One instance per vector whose user also has a vector and a stance in the
/// following period. Instances from all period pairs are pooled.
pub fn make_instances(features: &FeatureMatrix, stances: &StanceAssignment) -> Vec<Instance> {
    let active: BTreeSet<(&str, usize)> = features
        .vectors
        .iter()
        .map(|v| (v.user.as_str(), v.period))
        .collect();
    features
        .vectors
        .iter()
        .filter(|v| active.contains(&(v.user.as_str(), v.period + 1)))
        .filter_map(|v| {
            stances.get(&v.user, v.period + 1).map(|label| Instance {
                features: v.clone(),
                label,
            })
        })
        .collect()
}

/// Instances of one feature set with its column symbols.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub set_id: FeatureSet,
    pub columns: Vec<String>,
    pub instances: Vec<Instance>,
}

impl Dataset {
    pub fn new(features: &FeatureMatrix, stances: &StanceAssignment) -> Self {
        Dataset {
            set_id: features.set_id,
            columns: features.columns.clone(),
            instances: make_instances(features, stances),
        }
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }
}

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Invalid(format!(
                "{} values for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite {
                row: i / cols.max(1),
                col: i % cols.max(1),
            });
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::Invalid("ragged rows".into()));
            }
            data.extend_from_slice(r);
        }
        Matrix::new(rows.len(), cols, data)
    }

    pub fn from_instances(instances: &[Instance]) -> Result<Self> {
        let rows: Vec<&[f64]> = instances.iter().map(|i| i.features.values.as_slice()).collect();
        Matrix::from_rows(&rows)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn select(&self, indices: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        Matrix {
            rows: indices.len(),
            cols: self.cols,
            data,
        }
    }
}
