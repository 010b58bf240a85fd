use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::index::PeriodUserIndex;
use super::quantiles::quantiles5;
use super::textual::{build_vocab, TfIdf};
use super::{assemble_union, FeatureMatrix, FeatureSet, FeatureVector, DEFAULT_VOCAB_SIZE};
use crate::corpus::{ThreadForest, TimePartition};
use crate::error::{Error, Result};
use crate::stance::period_documents;
use crate::stance::{Stance, StanceAssignment};

/// Which documents the FS0 inverse document frequency counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IdfDocuments {
    /// One document per (user, period), over all periods.
    #[default]
    UserPeriod,
    /// One document per user, all periods merged.
    User,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FeatureConfig {
    pub vocab_size: usize,
    pub idf_documents: IdfDocuments,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig {
            vocab_size: DEFAULT_VOCAB_SIZE,
            idf_documents: IdfDocuments::UserPeriod,
        }
    }
}

/// Computes feature vectors over an immutable forest and stance assignment.
///
/// Reply tallies only count replies written in the same period as the entry
/// they answer, at any depth. Deleted authors count as Neutral in stance
/// tallies; so do parents whose author has no known stance.
pub struct FeatureExtractor<'a> {
    forest: &'a ThreadForest,
    stances: &'a StanceAssignment,
    config: FeatureConfig,
    index: PeriodUserIndex,
    replies: Vec<usize>,
    replies_by_stance: Vec<[usize; 3]>,
    documents: BTreeMap<(usize, String), Vec<String>>,
    tfidf: TfIdf,
}

impl<'a> FeatureExtractor<'a> {
    pub fn new(
        forest: &'a ThreadForest,
        partition: &TimePartition,
        stances: &'a StanceAssignment,
        config: FeatureConfig,
    ) -> Result<Self> {
        let index = PeriodUserIndex::build(forest, partition);

        let n = forest.len();
        let mut replies = vec![0usize; n];
        let mut replies_by_stance = vec![[0usize; 3]; n];
        for &v in forest.topological_order().iter().rev() {
            let Some(t) = index.period_of(v) else { continue };
            for &c in forest.children(v) {
                if index.period_of(c) != Some(t) {
                    continue;
                }
                let s = author_stance(forest, stances, c, t)?;
                replies[v] += 1 + replies[c];
                let below = replies_by_stance[c];
                let acc = &mut replies_by_stance[v];
                acc[s.index()] += 1;
                for k in 0..3 {
                    acc[k] += below[k];
                }
            }
        }

        let documents = period_documents(forest, partition);
        let vocab_docs = forest
            .entries()
            .iter()
            .filter(|e| partition.period_of(e.timestamp).is_some())
            .map(|e| crate::stance::preprocess(&e.content))
            .collect::<Vec<_>>();
        let vocab = build_vocab(vocab_docs.iter().map(Vec::as_slice), config.vocab_size);
        let tfidf = match config.idf_documents {
            IdfDocuments::UserPeriod => {
                TfIdf::fit(vocab, documents.values().map(Vec::as_slice), config.vocab_size)
            }
            IdfDocuments::User => {
                let mut per_user: BTreeMap<&str, Vec<String>> = BTreeMap::new();
                for ((_, u), d) in &documents {
                    per_user.entry(u).or_default().extend(d.iter().cloned());
                }
                TfIdf::fit(vocab, per_user.values().map(Vec::as_slice), config.vocab_size)
            }
        };

        Ok(FeatureExtractor {
            forest,
            stances,
            config,
            index,
            replies,
            replies_by_stance,
            documents,
            tfidf,
        })
    }

    pub fn index(&self) -> &PeriodUserIndex {
        &self.index
    }

    pub fn tfidf(&self) -> &TfIdf {
        &self.tfidf
    }

    pub fn config(&self) -> &FeatureConfig {
        &self.config
    }

    fn current_stance(&self, user: &str, period: usize) -> Result<Stance> {
        self.stances
            .get(user, period)
            .ok_or_else(|| Error::MissingStance {
                user: user.to_owned(),
                period,
            })
    }

    fn activity(&self, user: &str, period: usize) -> Result<&super::UserActivity> {
        self.index
            .activity(user, period)
            .ok_or_else(|| Error::InactiveUser {
                user: user.to_owned(),
                period,
            })
    }

    /// Number of in-period replies (any depth) to the entry at `idx`.
    pub fn in_period_replies(&self, idx: usize) -> usize {
        self.replies[idx]
    }

    /// FS1: posts, non-auto comments, quantiles of replies per entry.
    pub fn fs1(&self, user: &str, period: usize) -> Result<FeatureVector> {
        let a = self.activity(user, period)?;
        let stance = self.current_stance(user, period)?;
        let id = a.posts.len();
        let cs = a.comments.len();
        let r: Vec<usize> = a.counted_entries().map(|i| self.replies[i]).collect();
        debug_assert_eq!(r.len(), id + cs);
        let mut v = vec![id as f64, cs as f64];
        v.extend(quantiles5(&r));
        Ok(FeatureVector::from_numeric(user, period, FeatureSet::Fs1, v, stance))
    }

    /// FS2: comments by parent stance, quantiles of replies per entry by
    /// replier stance.
    pub fn fs2(&self, user: &str, period: usize) -> Result<FeatureVector> {
        let a = self.activity(user, period)?;
        let stance = self.current_stance(user, period)?;
        let mut cs = [0usize; 3];
        for &c in &a.comments {
            cs[self.parent_stance(c, period).index()] += 1;
        }
        assert_eq!(
            cs.iter().sum::<usize>(),
            a.comments.len(),
            "CS_t must equal CS^A + CS^N + CS^P"
        );
        let mut v: Vec<f64> = cs.iter().map(|&x| x as f64).collect();
        for s in Stance::ALL {
            let r: Vec<usize> = a
                .counted_entries()
                .map(|i| self.replies_by_stance[i][s.index()])
                .collect();
            v.extend(quantiles5(&r));
        }
        Ok(FeatureVector::from_numeric(user, period, FeatureSet::Fs2, v, stance))
    }

    /// FS3: quantiles over the user's threads of in-period entries per
    /// author stance (the user's own entries included).
    pub fn fs3(&self, user: &str, period: usize) -> Result<FeatureVector> {
        let a = self.activity(user, period)?;
        let stance = self.current_stance(user, period)?;
        let mut per_stance: [Vec<usize>; 3] = Default::default();
        for &root in &a.threads {
            let mut counts = [0usize; 3];
            for &e in self.index.thread_entries(period, root) {
                counts[author_stance(self.forest, self.stances, e, period)?.index()] += 1;
            }
            for k in 0..3 {
                per_stance[k].push(counts[k]);
            }
        }
        let v: Vec<f64> = per_stance.iter().flat_map(|c| quantiles5(c)).collect();
        Ok(FeatureVector::from_numeric(user, period, FeatureSet::Fs3, v, stance))
    }

    /// FS0: TF-IDF of the vocabulary words in the user's period document.
    pub fn fs0(&self, user: &str, period: usize) -> Result<FeatureVector> {
        self.activity(user, period)?;
        let stance = self.current_stance(user, period)?;
        let v = match self.documents.get(&(period, user.to_owned())) {
            Some(doc) => self.tfidf.transform(doc),
            None => vec![0.0; self.config.vocab_size],
        };
        Ok(FeatureVector::from_numeric(user, period, FeatureSet::Fs0, v, stance))
    }

    pub fn vector(&self, user: &str, period: usize, set: FeatureSet) -> Result<FeatureVector> {
        match set {
            FeatureSet::Fs0 => self.fs0(user, period),
            FeatureSet::Fs1 => self.fs1(user, period),
            FeatureSet::Fs2 => self.fs2(user, period),
            FeatureSet::Fs3 => self.fs3(user, period),
            FeatureSet::Fs4 => assemble_union(
                &[
                    &self.fs1(user, period)?,
                    &self.fs2(user, period)?,
                    &self.fs3(user, period)?,
                ],
                FeatureSet::Fs4,
            ),
            FeatureSet::Fs5 => assemble_union(
                &[
                    &self.fs0(user, period)?,
                    &self.fs1(user, period)?,
                    &self.fs2(user, period)?,
                    &self.fs3(user, period)?,
                ],
                FeatureSet::Fs5,
            ),
        }
    }

    /// One vector per active (user, period), ordered by period then user.
    pub fn extract(&self, set: FeatureSet) -> Result<FeatureMatrix> {
        let mut vectors = Vec::new();
        for t in 0..self.index.num_periods() {
            for user in self.index.users(t) {
                let v = self.vector(user, t, set)?;
                if set == FeatureSet::Fs1 || set == FeatureSet::Fs4 {
                    // N_t = ID_t + CS_t by construction; checked on every run.
                    let a = self.activity(user, t)?;
                    assert_eq!(a.counted_entries().count(), a.posts.len() + a.comments.len());
                }
                vectors.push(v);
            }
        }
        Ok(FeatureMatrix::new(
            set,
            set.column_symbols(self.tfidf.vocabulary(), self.config.vocab_size),
            vectors,
        ))
    }

    fn parent_stance(&self, comment: usize, period: usize) -> Stance {
        let Some(p) = self.forest.parent(comment) else {
            return Stance::Neutral;
        };
        let parent = self.forest.entry(p);
        if parent.is_deleted() {
            return Stance::Neutral;
        }
        self.stances
            .get(&parent.author, period)
            .or_else(|| {
                self.index
                    .period_of(p)
                    .and_then(|tp| self.stances.get(&parent.author, tp))
            })
            .unwrap_or(Stance::Neutral)
    }
}

fn author_stance(
    forest: &ThreadForest,
    stances: &StanceAssignment,
    idx: usize,
    period: usize,
) -> Result<Stance> {
    let e = forest.entry(idx);
    if e.is_deleted() {
        return Ok(Stance::Neutral);
    }
    stances
        .get(&e.author, period)
        .ok_or_else(|| Error::MissingStance {
            user: e.author.clone(),
            period,
        })
}
