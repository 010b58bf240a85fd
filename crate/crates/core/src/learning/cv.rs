//! Nested cross-validation with random hyperparameter search.
//!
//! Outer folds estimate generalization; inside each outer-training portion an
//! inner k-fold CV scores randomly sampled configurations. The inner search
//! reads its rows through an access log that is checked against the outer
//! test fold before the fold's score is accepted.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Mutex;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dataset::{Instance, Matrix};
use super::metrics::{macro_metrics, transition_f1_matrix, MacroMetrics, TransitionMatrix};
use super::models::{fit, Family, Hyperparams};
use super::search::ClassifierSpec;
use crate::error::{Error, Result};
use crate::stance::Stance;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CvConfig {
    pub outer_k: usize,
    pub inner_k: usize,
    pub search_iters: usize,
    /// Keep all instances of a user in the same fold.
    pub group_by_user: bool,
    pub seed: u64,
}

impl Default for CvConfig {
    fn default() -> Self {
        CvConfig {
            outer_k: 10,
            inner_k: 5,
            search_iters: 500,
            group_by_user: false,
            seed: 0,
        }
    }
}

impl CvConfig {
    pub fn validate(&self) -> Result<()> {
        if self.outer_k < 2 || self.inner_k < 2 {
            return Err(Error::Config("outer_k and inner_k must be at least 2".into()));
        }
        if self.search_iters == 0 {
            return Err(Error::Config("search_iters must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldOutcome {
    pub fold: usize,
    pub hyperparameters: Hyperparams,
    pub inner_f1: f64,
    pub metrics: MacroMetrics,
    pub train_size: usize,
    pub test_size: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub split_counts: Option<Vec<usize>>,
}

/// Evidence that the inner searches never read outer test rows.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HygieneAudit {
    pub instances: usize,
    /// Outer test folds each instance appeared in; all ones when sound.
    #[serde(skip)]
    pub test_appearances: Vec<u8>,
    /// Rows read by each fold's inner search.
    pub inner_rows: Vec<usize>,
    /// Inner-search rows that were in the fold's own test set; always 0
    /// in a returned audit.
    pub overlap: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvOutcome {
    pub family: Family,
    pub folds: Vec<FoldOutcome>,
    pub mean: MacroMetrics,
    pub std: MacroMetrics,
    /// Outer-test prediction for every instance, in input order.
    pub predictions: Vec<Stance>,
    pub transition_f1: TransitionMatrix,
    pub audit: HygieneAudit,
}

/// Fold index per item: stratified by label, or whole groups kept together
/// and balanced by size when `groups` is given.
pub fn assign_folds<R: Rng>(
    labels: &[Stance],
    groups: Option<&[&str]>,
    k: usize,
    rng: &mut R,
) -> Vec<usize> {
    let mut fold = vec![0usize; labels.len()];
    if let Some(groups) = groups {
        let mut members: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
        for (i, g) in groups.iter().enumerate() {
            members.entry(g).or_default().push(i);
        }
        let mut list: Vec<Vec<usize>> = members.into_values().collect();
        list.shuffle(rng);
        list.sort_by_key(|m| std::cmp::Reverse(m.len()));
        let mut sizes = vec![0usize; k];
        for m in list {
            let target = (0..k).min_by_key(|&f| (sizes[f], f)).expect("k >= 1");
            sizes[target] += m.len();
            for i in m {
                fold[i] = target;
            }
        }
        return fold;
    }
    let mut offset = 0usize;
    for class in Stance::ALL {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        if idx.is_empty() {
            continue;
        }
        idx.shuffle(rng);
        if idx.len() < k {
            log::warn!(
                "class {class} has {} instances for {k} folds; assigning its folds at random",
                idx.len()
            );
            for i in idx {
                fold[i] = rng.gen_range(0..k);
            }
            continue;
        }
        for (j, &i) in idx.iter().enumerate() {
            fold[i] = (offset + j) % k;
        }
        offset += idx.len();
    }
    fold
}

fn mix(seed: u64, parts: &[u64]) -> u64 {
    // splitmix64 over the parts
    let mut z = seed;
    for &p in parts {
        z = z.wrapping_add(p.wrapping_mul(0x9E37_79B9_7F4A_7C15)).wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^= z >> 31;
    }
    z
}

/// Rows handed to the inner search, with a record of which were read.
struct Tracked<'a> {
    x: &'a Matrix,
    y: &'a [usize],
    read: Mutex<Vec<bool>>,
}

impl Tracked<'_> {
    fn take(&self, rows: &[usize]) -> (Matrix, Vec<usize>) {
        {
            let mut read = self.read.lock().expect("access log");
            for &r in rows {
                read[r] = true;
            }
        }
        (self.x.select(rows), rows.iter().map(|&r| self.y[r]).collect())
    }
}

/// Fails with [`Error::Leakage`] if any row read by an inner search (or, with
/// `users`, any user behind such a row) belongs to the outer test fold.
pub fn audit_fold(read: &[bool], test: &[usize], users: Option<&[&str]>) -> Result<usize> {
    let leaked: Vec<usize> = test.iter().copied().filter(|&i| read[i]).collect();
    if !leaked.is_empty() {
        return Err(Error::Leakage(format!(
            "{} outer-test instances were read by the inner search",
            leaked.len()
        )));
    }
    if let Some(users) = users {
        let test_users: BTreeSet<&str> = test.iter().map(|&i| users[i]).collect();
        let shared = (0..read.len())
            .filter(|&i| read[i] && test_users.contains(users[i]))
            .count();
        if shared > 0 {
            return Err(Error::Leakage(format!(
                "{shared} inner-search instances share a user with the outer test fold"
            )));
        }
    }
    Ok(read.iter().filter(|&&r| r).count())
}

fn labels_of(instances: &[Instance]) -> Vec<Stance> {
    instances.iter().map(|i| i.label).collect()
}

pub fn nested_cv(instances: &[Instance], spec: &ClassifierSpec, config: &CvConfig) -> Result<CvOutcome> {
    config.validate()?;
    spec.validate()?;
    let n = instances.len();
    if n < config.outer_k {
        return Err(Error::Invalid(format!(
            "{n} instances cannot fill {} outer folds",
            config.outer_k
        )));
    }
    let x = Matrix::from_instances(instances)?;
    let labels = labels_of(instances);
    let y: Vec<usize> = labels.iter().map(|s| s.index()).collect();
    let users: Vec<&str> = instances.iter().map(Instance::user).collect();
    let groups = config.group_by_user.then_some(users.as_slice());

    let mut outer_rng = ChaCha8Rng::seed_from_u64(config.seed);
    let outer = assign_folds(&labels, groups, config.outer_k, &mut outer_rng);

    let mut predictions: Vec<Option<Stance>> = vec![None; n];
    let mut appearances = vec![0u8; n];
    let mut folds = Vec::with_capacity(config.outer_k);
    let mut inner_rows = Vec::with_capacity(config.outer_k);

    for f in 0..config.outer_k {
        let test: Vec<usize> = (0..n).filter(|&i| outer[i] == f).collect();
        let train: Vec<usize> = (0..n).filter(|&i| outer[i] != f).collect();
        if test.is_empty() {
            log::warn!("outer fold {f} is empty; skipped");
            continue;
        }
        for &i in &test {
            appearances[i] += 1;
        }

        let tracked = Tracked {
            x: &x,
            y: &y,
            read: Mutex::new(vec![false; n]),
        };
        let (best, inner_f1) = inner_search(&tracked, &train, &labels, &users, spec, config, f)?;
        let read = tracked.read.into_inner().expect("access log");
        inner_rows.push(audit_fold(&read, &test, groups)?);

        let (xt, yt) = (x.select(&train), train.iter().map(|&i| y[i]).collect::<Vec<_>>());
        let model = fit(&best, &xt, &yt, mix(config.seed, &[f as u64, u64::MAX]))?;
        let pred: Vec<Stance> = model
            .predict(&x.select(&test))
            .into_iter()
            .map(|c| Stance::ALL[c])
            .collect();
        let truth: Vec<Stance> = test.iter().map(|&i| labels[i]).collect();
        let metrics = macro_metrics(&pred, &truth)?;
        for (&i, &p) in test.iter().zip(&pred) {
            predictions[i] = Some(p);
        }
        folds.push(FoldOutcome {
            fold: f,
            hyperparameters: best,
            inner_f1,
            metrics,
            train_size: train.len(),
            test_size: test.len(),
            split_counts: model.split_counts(),
        });
    }

    if appearances.iter().any(|&a| a != 1) {
        return Err(Error::Leakage(
            "an instance is not in exactly one outer test fold".into(),
        ));
    }
    let predictions: Vec<Stance> = predictions.into_iter().map(|p| p.expect("every instance tested")).collect();
    let current: Vec<Stance> = instances.iter().map(Instance::current_stance).collect();
    let transition_f1 = transition_f1_matrix(&predictions, &labels, &current)?;
    let (mean, std) = summarize(folds.iter().map(|f| f.metrics));

    Ok(CvOutcome {
        family: spec.family(),
        folds,
        mean,
        std,
        predictions,
        transition_f1,
        audit: HygieneAudit {
            instances: n,
            test_appearances: appearances,
            inner_rows,
            overlap: 0,
        },
    })
}

fn inner_search(
    data: &Tracked<'_>,
    train: &[usize],
    labels: &[Stance],
    users: &[&str],
    spec: &ClassifierSpec,
    config: &CvConfig,
    fold: usize,
) -> Result<(Hyperparams, f64)> {
    let seed = config.seed.wrapping_add(fold as u64);
    let mut candidate_rng = ChaCha8Rng::seed_from_u64(seed);
    let mut split_rng = ChaCha8Rng::seed_from_u64(seed);
    split_rng.set_stream(1);

    let train_labels: Vec<Stance> = train.iter().map(|&i| labels[i]).collect();
    let train_users: Vec<&str> = train.iter().map(|&i| users[i]).collect();
    let groups = config.group_by_user.then_some(train_users.as_slice());
    let inner = assign_folds(&train_labels, groups, config.inner_k, &mut split_rng);
    let splits: Vec<(Vec<usize>, Vec<usize>)> = (0..config.inner_k)
        .map(|g| {
            let (te, tr): (Vec<usize>, Vec<usize>) = (0..train.len()).partition(|&j| inner[j] == g);
            (
                tr.into_iter().map(|j| train[j]).collect(),
                te.into_iter().map(|j| train[j]).collect(),
            )
        })
        .filter(|(_, te): &(Vec<usize>, Vec<usize>)| !te.is_empty())
        .collect();

    let candidates: Vec<Hyperparams> = (0..config.search_iters)
        .map(|_| spec.sample(&mut candidate_rng))
        .collect();
    let scores: Vec<f64> = candidates
        .par_iter()
        .enumerate()
        .map(|(c, params)| {
            let mut total = 0.0;
            for (g, (tr, te)) in splits.iter().enumerate() {
                let (xa, ya) = data.take(tr);
                let (xb, yb) = data.take(te);
                let model = fit(params, &xa, &ya, mix(seed, &[c as u64, g as u64]))?;
                let pred: Vec<Stance> = model.predict(&xb).into_iter().map(|k| Stance::ALL[k]).collect();
                let truth: Vec<Stance> = yb.into_iter().map(|k| Stance::ALL[k]).collect();
                total += macro_metrics(&pred, &truth)?.f1;
            }
            Ok(total / splits.len() as f64)
        })
        .collect::<Result<_>>()?;

    let mut best = 0;
    for (c, &s) in scores.iter().enumerate() {
        if s > scores[best] {
            best = c;
        }
    }
    Ok((candidates[best].clone(), scores[best]))
}

/// Mean and population standard deviation of each metric.
pub(crate) fn summarize(metrics: impl Iterator<Item = MacroMetrics>) -> (MacroMetrics, MacroMetrics) {
    let all: Vec<MacroMetrics> = metrics.collect();
    let k = all.len().max(1) as f64;
    let pick: [fn(&MacroMetrics) -> f64; 4] = [|m| m.f1, |m| m.accuracy, |m| m.precision, |m| m.recall];
    let mut mean = [0.0; 4];
    let mut std = [0.0; 4];
    for (j, p) in pick.iter().enumerate() {
        mean[j] = all.iter().map(p).sum::<f64>() / k;
        std[j] = (all.iter().map(|m| (p(m) - mean[j]).powi(2)).sum::<f64>() / k).sqrt();
    }
    let make = |v: [f64; 4]| MacroMetrics {
        f1: v[0],
        accuracy: v[1],
        precision: v[2],
        recall: v[3],
    };
    (make(mean), make(std))
}
