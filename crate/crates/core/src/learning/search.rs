//! Hyperparameter spaces and random sampling from them.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::models::{Family, Hyperparams, MaxFeatures};
use crate::error::{Error, Result};

/// Inclusive integer range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "[usize; 2]", into = "[usize; 2]")]
pub struct IntRange {
    pub low: usize,
    pub high: usize,
}

impl IntRange {
    pub fn new(low: usize, high: usize) -> Result<Self> {
        if low > high {
            return Err(Error::Config(format!("empty range [{low}, {high}]")));
        }
        Ok(IntRange { low, high })
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> usize {
        rng.gen_range(self.low..=self.high)
    }
}

impl TryFrom<[usize; 2]> for IntRange {
    type Error = Error;
    fn try_from(v: [usize; 2]) -> Result<Self> {
        IntRange::new(v[0], v[1])
    }
}

impl From<IntRange> for [usize; 2] {
    fn from(r: IntRange) -> Self {
        [r.low, r.high]
    }
}

/// Log-uniform range over positive reals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 2]", into = "[f64; 2]")]
pub struct LogRange {
    pub low: f64,
    pub high: f64,
}

impl LogRange {
    pub fn new(low: f64, high: f64) -> Result<Self> {
        if !(low > 0.0 && high >= low && high.is_finite()) {
            return Err(Error::Config(format!("invalid log range [{low}, {high}]")));
        }
        Ok(LogRange { low, high })
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        if self.low == self.high {
            return self.low;
        }
        rng.gen_range(self.low.ln()..=self.high.ln()).exp()
    }
}

impl TryFrom<[f64; 2]> for LogRange {
    type Error = Error;
    fn try_from(v: [f64; 2]) -> Result<Self> {
        LogRange::new(v[0], v[1])
    }
}

impl From<LogRange> for [f64; 2] {
    fn from(r: LogRange) -> Self {
        [r.low, r.high]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LogisticSpace {
    pub l2: LogRange,
}

impl Default for LogisticSpace {
    fn default() -> Self {
        LogisticSpace {
            l2: LogRange { low: 1e-4, high: 1e2 },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KnnSpace {
    pub k: IntRange,
}

impl Default for KnnSpace {
    fn default() -> Self {
        KnnSpace {
            k: IntRange { low: 1, high: 50 },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForestSpace {
    pub trees: IntRange,
    pub max_depth: IntRange,
    pub max_features: Vec<MaxFeatures>,
    pub bootstrap: bool,
}

impl Default for ForestSpace {
    fn default() -> Self {
        ForestSpace {
            trees: IntRange { low: 50, high: 500 },
            max_depth: IntRange { low: 2, high: 20 },
            max_features: vec![MaxFeatures::Sqrt, MaxFeatures::Third, MaxFeatures::All],
            bootstrap: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoostingSpace {
    pub trees: IntRange,
    pub max_depth: IntRange,
    pub shrinkage: LogRange,
}

impl Default for BoostingSpace {
    fn default() -> Self {
        BoostingSpace {
            trees: IntRange { low: 50, high: 500 },
            max_depth: IntRange { low: 1, high: 6 },
            shrinkage: LogRange {
                low: 0.01,
                high: 0.3,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaussianNbSpace {
    pub var_smoothing: LogRange,
}

impl Default for GaussianNbSpace {
    fn default() -> Self {
        GaussianNbSpace {
            var_smoothing: LogRange {
                low: 1e-12,
                high: 1e-3,
            },
        }
    }
}

/// Search spaces of every family, as read from configuration.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchSpaces {
    pub logistic_regression: LogisticSpace,
    pub knn: KnnSpace,
    pub random_forest: ForestSpace,
    pub gradient_boosting: BoostingSpace,
    pub naive_bayes_gaussian: GaussianNbSpace,
}

impl SearchSpaces {
    pub fn spec(&self, family: Family) -> ClassifierSpec {
        let space = match family {
            Family::LogisticRegression => SearchSpace::LogisticRegression(self.logistic_regression.clone()),
            Family::Knn => SearchSpace::Knn(self.knn.clone()),
            Family::RandomForest => SearchSpace::RandomForest(self.random_forest.clone()),
            Family::GradientBoosting => SearchSpace::GradientBoosting(self.gradient_boosting.clone()),
            Family::NaiveBayesGaussian => SearchSpace::NaiveBayesGaussian(self.naive_bayes_gaussian.clone()),
        };
        ClassifierSpec { space }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SearchSpace {
    LogisticRegression(LogisticSpace),
    #[serde(rename = "KNN")]
    Knn(KnnSpace),
    RandomForest(ForestSpace),
    GradientBoosting(BoostingSpace),
    NaiveBayesGaussian(GaussianNbSpace),
}

/// A family together with the space its configurations are drawn from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierSpec {
    pub space: SearchSpace,
}

impl ClassifierSpec {
    pub fn default_for(family: Family) -> Self {
        SearchSpaces::default().spec(family)
    }

    pub fn family(&self) -> Family {
        match self.space {
            SearchSpace::LogisticRegression(_) => Family::LogisticRegression,
            SearchSpace::Knn(_) => Family::Knn,
            SearchSpace::RandomForest(_) => Family::RandomForest,
            SearchSpace::GradientBoosting(_) => Family::GradientBoosting,
            SearchSpace::NaiveBayesGaussian(_) => Family::NaiveBayesGaussian,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match &self.space {
            SearchSpace::Knn(s) if s.k.low == 0 => Err(Error::Config("knn k must be >= 1".into())),
            SearchSpace::RandomForest(s)
                if s.max_features.is_empty() || s.trees.low == 0 || s.max_depth.low == 0 =>
            {
                Err(Error::Config("random forest space is empty or degenerate".into()))
            }
            SearchSpace::GradientBoosting(s) if s.trees.low == 0 || s.max_depth.low == 0 => {
                Err(Error::Config("gradient boosting space is degenerate".into()))
            }
            _ => Ok(()),
        }
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> Hyperparams {
        match &self.space {
            SearchSpace::LogisticRegression(s) => Hyperparams::LogisticRegression { l2: s.l2.sample(rng) },
            SearchSpace::Knn(s) => Hyperparams::Knn { k: s.k.sample(rng) },
            SearchSpace::RandomForest(s) => Hyperparams::RandomForest {
                trees: s.trees.sample(rng),
                max_depth: s.max_depth.sample(rng),
                max_features: s.max_features[rng.gen_range(0..s.max_features.len())],
                bootstrap: s.bootstrap,
            },
            SearchSpace::GradientBoosting(s) => Hyperparams::GradientBoosting {
                trees: s.trees.sample(rng),
                max_depth: s.max_depth.sample(rng),
                shrinkage: s.shrinkage.sample(rng),
            },
            SearchSpace::NaiveBayesGaussian(s) => Hyperparams::NaiveBayesGaussian {
                var_smoothing: s.var_smoothing.sample(rng),
            },
        }
    }
}
