//! The five classifier families, written against a dense [`Matrix`] with
//! class indices 0..3 (A, N, P).

mod binning;
mod boosting;
mod forest;
mod gaussian_nb;
mod knn;
mod logistic;
mod tree;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::dataset::{Instance, Matrix};
use crate::error::{Error, Result};
use crate::stance::Stance;

pub use boosting::GradientBoosting;
pub use forest::RandomForest;
pub use gaussian_nb::GaussianNb;
pub use knn::Knn;
pub use logistic::LogisticRegression;
pub use tree::{ClassificationTree, TreeParams};

pub const NUM_CLASSES: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    LogisticRegression,
    #[serde(rename = "KNN")]
    Knn,
    RandomForest,
    GradientBoosting,
    NaiveBayesGaussian,
}

impl Family {
    pub const ALL: [Family; 5] = [
        Family::LogisticRegression,
        Family::Knn,
        Family::RandomForest,
        Family::GradientBoosting,
        Family::NaiveBayesGaussian,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::LogisticRegression => "LogisticRegression",
            Family::Knn => "KNN",
            Family::RandomForest => "RandomForest",
            Family::GradientBoosting => "GradientBoosting",
            Family::NaiveBayesGaussian => "NaiveBayesGaussian",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect::<String>()
            .to_ascii_lowercase();
        let fam = match key.as_str() {
            "logisticregression" | "lr" | "logistic" => Family::LogisticRegression,
            "knn" => Family::Knn,
            "randomforest" | "rf" => Family::RandomForest,
            "gradientboosting" | "gb" | "xgboost" => Family::GradientBoosting,
            "naivebayesgaussian" | "gaussiannb" | "gnb" => Family::NaiveBayesGaussian,
            _ => return Err(Error::Config(format!("unknown classifier family `{s}`"))),
        };
        Ok(fam)
    }
}

/// Size of the random feature subset tried at each forest split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaxFeatures {
    Sqrt,
    Third,
    All,
}

impl MaxFeatures {
    pub fn resolve(self, d: usize) -> usize {
        let m = match self {
            MaxFeatures::Sqrt => (d as f64).sqrt() as usize,
            MaxFeatures::Third => d / 3,
            MaxFeatures::All => d,
        };
        m.clamp(1, d.max(1))
    }
}

/// One concrete configuration of a family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family")]
pub enum Hyperparams {
    LogisticRegression {
        l2: f64,
    },
    #[serde(rename = "KNN")]
    Knn {
        k: usize,
    },
    RandomForest {
        trees: usize,
        max_depth: usize,
        max_features: MaxFeatures,
        bootstrap: bool,
    },
    GradientBoosting {
        trees: usize,
        max_depth: usize,
        shrinkage: f64,
    },
    NaiveBayesGaussian {
        var_smoothing: f64,
    },
}

impl Hyperparams {
    pub fn family(&self) -> Family {
        match self {
            Hyperparams::LogisticRegression { .. } => Family::LogisticRegression,
            Hyperparams::Knn { .. } => Family::Knn,
            Hyperparams::RandomForest { .. } => Family::RandomForest,
            Hyperparams::GradientBoosting { .. } => Family::GradientBoosting,
            Hyperparams::NaiveBayesGaussian { .. } => Family::NaiveBayesGaussian,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Hyperparams::LogisticRegression { l2 } => l2.is_finite() && l2 >= 0.0,
            Hyperparams::Knn { k } => k >= 1,
            Hyperparams::RandomForest {
                trees, max_depth, ..
            } => trees >= 1 && max_depth >= 1,
            Hyperparams::GradientBoosting {
                trees,
                max_depth,
                shrinkage,
            } => trees >= 1 && max_depth >= 1 && shrinkage > 0.0 && shrinkage.is_finite(),
            Hyperparams::NaiveBayesGaussian { var_smoothing } => {
                var_smoothing.is_finite() && var_smoothing >= 0.0
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid hyperparameters {self:?}")))
        }
    }
}

#[derive(Debug, Clone)]
pub enum FittedModel {
    LogisticRegression(LogisticRegression),
    Knn(Knn),
    RandomForest(RandomForest),
    GradientBoosting(GradientBoosting),
    NaiveBayesGaussian(GaussianNb),
}

impl FittedModel {
    pub fn predict(&self, x: &Matrix) -> Vec<usize> {
        (0..x.rows()).map(|i| self.predict_row(x.row(i))).collect()
    }

    pub fn predict_row(&self, row: &[f64]) -> usize {
        match self {
            FittedModel::LogisticRegression(m) => m.predict_row(row),
            FittedModel::Knn(m) => m.predict_row(row),
            FittedModel::RandomForest(m) => m.predict_row(row),
            FittedModel::GradientBoosting(m) => m.predict_row(row),
            FittedModel::NaiveBayesGaussian(m) => m.predict_row(row),
        }
    }

    /// Number of splits on each column, for tree families.
    pub fn split_counts(&self) -> Option<Vec<usize>> {
        match self {
            FittedModel::RandomForest(m) => Some(m.split_counts()),
            FittedModel::GradientBoosting(m) => Some(m.split_counts()),
            _ => None,
        }
    }
}

pub(crate) fn check_training(x: &Matrix, y: &[usize]) -> Result<()> {
    if x.rows() != y.len() {
        return Err(Error::Invalid(format!(
            "{} rows for {} labels",
            x.rows(),
            y.len()
        )));
    }
    let mut seen = [false; NUM_CLASSES];
    for &c in y {
        if c >= NUM_CLASSES {
            return Err(Error::Invalid(format!("class index {c}")));
        }
        seen[c] = true;
    }
    if seen.iter().filter(|&&s| s).count() < 2 {
        return Err(Error::SingleClass);
    }
    Ok(())
}

/// Fits a model. `y` holds class indices; `seed` drives any randomness.
pub fn fit(params: &Hyperparams, x: &Matrix, y: &[usize], seed: u64) -> Result<FittedModel> {
    params.validate()?;
    check_training(x, y)?;
    let model = match *params {
        Hyperparams::LogisticRegression { l2 } => {
            FittedModel::LogisticRegression(LogisticRegression::fit(x, y, l2))
        }
        Hyperparams::Knn { k } => FittedModel::Knn(Knn::fit(x, y, k)),
        Hyperparams::RandomForest {
            trees,
            max_depth,
            max_features,
            bootstrap,
        } => FittedModel::RandomForest(RandomForest::fit(
            x,
            y,
            trees,
            max_depth,
            max_features,
            bootstrap,
            seed,
        )),
        Hyperparams::GradientBoosting {
            trees,
            max_depth,
            shrinkage,
        } => FittedModel::GradientBoosting(GradientBoosting::fit(x, y, trees, max_depth, shrinkage)),
        Hyperparams::NaiveBayesGaussian { var_smoothing } => {
            FittedModel::NaiveBayesGaussian(GaussianNb::fit(x, y, var_smoothing))
        }
    };
    Ok(model)
}

/// Trains on `train` and predicts the next stance of every `eval` instance.
pub fn train_predict(
    params: &Hyperparams,
    train: &[Instance],
    eval: &[Instance],
    seed: u64,
) -> Result<Vec<Stance>> {
    if train.is_empty() {
        return Err(Error::Invalid("empty training set".into()));
    }
    let x = Matrix::from_instances(train)?;
    let y: Vec<usize> = train.iter().map(|i| i.label.index()).collect();
    let model = fit(params, &x, &y, seed)?;
    if eval.is_empty() {
        return Ok(Vec::new());
    }
    let xe = Matrix::from_instances(eval)?;
    if xe.cols() != x.cols() {
        return Err(Error::Mismatch(format!(
            "train has {} columns, eval has {}",
            x.cols(),
            xe.cols()
        )));
    }
    Ok(model
        .predict(&xe)
        .into_iter()
        .map(|c| Stance::ALL[c])
        .collect())
}

/// Index of the largest score; ties go to the smaller index.
pub(crate) fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn max_features_sizes() {
        assert_eq!(MaxFeatures::Sqrt.resolve(18), 4);
        assert_eq!(MaxFeatures::Third.resolve(18), 6);
        assert_eq!(MaxFeatures::All.resolve(18), 18);
        assert_eq!(MaxFeatures::Third.resolve(2), 1);
    }

    #[test]
    fn single_class_rejected() {
        let x = Matrix::from_rows(&[vec![0.0], vec![1.0]]).unwrap();
        for p in [
            Hyperparams::Knn { k: 1 },
            Hyperparams::LogisticRegression { l2: 1.0 },
        ] {
            assert!(matches!(fit(&p, &x, &[2, 2], 0), Err(Error::SingleClass)));
        }
    }

    #[test]
    fn family_names_round_trip() {
        for f in Family::ALL {
            assert_eq!(f.name().parse::<Family>().unwrap(), f);
        }
    }

    #[test]
    fn hyperparams_serialize_with_family_tag() {
        let p = Hyperparams::Knn { k: 7 };
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(s, r#"{"family":"KNN","k":7}"#);
    }
}
