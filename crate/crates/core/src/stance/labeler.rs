use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::BufRead;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::lexicon::{HashtagCounting, HashtagLexicon};
use super::naive_bayes::{train_nb, NbModel};
use super::text::preprocess;
use super::{stance_from_probability, Stance, StanceCutoffs};
use crate::corpus::{ThreadForest, TimePartition};
use crate::error::{Error, Result};
use crate::learning::metrics::macro_metrics_over;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LabelerConfig {
    pub alpha: f64,
    pub cutoffs: StanceCutoffs,
    pub min_messages: usize,
    pub extreme_fraction: f64,
    /// Tokens with a lower document frequency are dropped from the vocabulary.
    pub min_df: usize,
    pub counting: HashtagCounting,
    pub train_fraction: f64,
}

impl Default for LabelerConfig {
    fn default() -> Self {
        LabelerConfig {
            alpha: 1.0,
            cutoffs: StanceCutoffs::default(),
            min_messages: 50,
            extreme_fraction: 0.10,
            min_df: 5,
            counting: HashtagCounting::Occurrences,
            train_fraction: 0.8,
        }
    }
}

/// Reads `{"user": .., "text": ..}` lines (also accepts `author` / `body`)
/// into messages grouped by user. Malformed lines are skipped.
pub fn parse_messages<R: BufRead>(reader: R) -> Result<BTreeMap<String, Vec<String>>> {
    let mut out: BTreeMap<String, Vec<String>> = BTreeMap::new();
    let mut skipped = 0usize;
    for line in reader.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec = serde_json::from_str::<Value>(&line).ok().and_then(|v| {
            let user = ["user", "author"]
                .iter()
                .find_map(|k| v.get(*k).and_then(Value::as_str))?
                .to_owned();
            let text = ["text", "body"]
                .iter()
                .find_map(|k| v.get(*k).and_then(Value::as_str))?
                .to_owned();
            Some((user, text))
        });
        match rec {
            Some((user, text)) => out.entry(user).or_default().push(text),
            None => skipped += 1,
        }
    }
    if skipped > 0 {
        log::warn!("skipped {skipped} malformed training messages");
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserScore {
    pub user: String,
    pub messages: usize,
    pub score: i64,
    /// Lexicon hashtags used, either section.
    pub lexicon_hits: usize,
}

pub fn score_users(
    messages: &BTreeMap<String, Vec<String>>,
    lexicon: &HashtagLexicon,
    counting: HashtagCounting,
) -> Vec<UserScore> {
    messages
        .iter()
        .map(|(user, texts)| {
            let (pro, against) = lexicon.count(texts.iter().map(String::as_str), counting);
            UserScore {
                user: user.clone(),
                messages: texts.len(),
                score: pro as i64 - against as i64,
                lexicon_hits: pro + against,
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeakLabel {
    pub user: String,
    pub score: i64,
    pub stance: Stance,
}

const MIN_ELIGIBLE: usize = 20;

/// Picks the lowest-scoring decile as Against and the highest as Pro.
///
/// Users with fewer than `min_messages` messages or no lexicon hashtags are
/// not eligible. Ties at a decile boundary go to the lexicographically
/// smaller user id. Against picks must score below zero and Pro picks above
/// zero; others are dropped.
pub fn select_weak_labels(
    users: &[UserScore],
    min_messages: usize,
    extreme_fraction: f64,
) -> Result<Vec<WeakLabel>> {
    if !(extreme_fraction > 0.0 && extreme_fraction <= 0.5) {
        return Err(Error::Config(format!(
            "extreme_fraction must lie in (0, 0.5], got {extreme_fraction}"
        )));
    }
    let mut eligible: Vec<&UserScore> = users
        .iter()
        .filter(|u| u.messages >= min_messages && u.lexicon_hits > 0)
        .collect();
    if eligible.len() < MIN_ELIGIBLE {
        return Err(Error::TooFewEligible {
            found: eligible.len(),
            required: MIN_ELIGIBLE,
        });
    }
    let k = ((eligible.len() as f64 * extreme_fraction) + 1e-9).floor() as usize;

    let mut out = Vec::with_capacity(2 * k);
    eligible.sort_by(|a, b| a.score.cmp(&b.score).then_with(|| a.user.cmp(&b.user)));
    out.extend(
        eligible[..k]
            .iter()
            .filter(|u| u.score < 0)
            .map(|u| WeakLabel {
                user: u.user.clone(),
                score: u.score,
                stance: Stance::Against,
            }),
    );
    eligible.sort_by(|a, b| b.score.cmp(&a.score).then_with(|| a.user.cmp(&b.user)));
    out.extend(
        eligible[..k]
            .iter()
            .filter(|u| u.score > 0)
            .map(|u| WeakLabel {
                user: u.user.clone(),
                score: u.score,
                stance: Stance::Pro,
            }),
    );
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NbEvaluation {
    pub train_size: usize,
    pub test_size: usize,
    pub accuracy: f64,
    pub macro_accuracy: f64,
    pub macro_f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferModel {
    pub model: NbModel,
    pub evaluation: NbEvaluation,
    pub weak_labels: Vec<WeakLabel>,
}

/// Weak-labels the training users, trains Naive Bayes on a seeded stratified
/// split and evaluates it on the held-out part (Pro iff p > 0.5).
pub fn train_transfer_model(
    messages: &BTreeMap<String, Vec<String>>,
    lexicon: &HashtagLexicon,
    config: &LabelerConfig,
    seed: u64,
) -> Result<TransferModel> {
    let scores = score_users(messages, lexicon, config.counting);
    let weak = select_weak_labels(&scores, config.min_messages, config.extreme_fraction)?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for class in [Stance::Against, Stance::Pro] {
        let mut members: Vec<&WeakLabel> = weak.iter().filter(|w| w.stance == class).collect();
        members.shuffle(&mut rng);
        let mut n_train = (members.len() as f64 * config.train_fraction).round() as usize;
        if members.len() >= 2 {
            n_train = n_train.clamp(1, members.len() - 1);
        }
        train.extend(members[..n_train].iter().copied());
        test.extend(members[n_train..].iter().copied());
    }

    let doc_of = |w: &WeakLabel| -> Vec<String> {
        messages[&w.user].iter().flat_map(|t| preprocess(t)).collect()
    };
    let train_docs: Vec<Vec<String>> = train.iter().map(|w| doc_of(w)).collect();
    let train_labels: Vec<Stance> = train.iter().map(|w| w.stance).collect();
    let model = train_nb(&train_docs, &train_labels, config.alpha, config.min_df)?;
    if model.vocabulary().is_empty() {
        log::warn!(
            "no token reaches min_df = {} in {} training documents; every user will get the prior",
            config.min_df,
            train_docs.len()
        );
    }

    let classes = [Stance::Against, Stance::Pro];
    let (predicted, truth): (Vec<Stance>, Vec<Stance>) = test
        .iter()
        .map(|w| {
            let p = model.leave_probability(&doc_of(w));
            let pred = if p > 0.5 { Stance::Pro } else { Stance::Against };
            (pred, w.stance)
        })
        .unzip();
    let evaluation = if truth.is_empty() {
        NbEvaluation {
            train_size: train.len(),
            test_size: 0,
            accuracy: f64::NAN,
            macro_accuracy: f64::NAN,
            macro_f1: f64::NAN,
        }
    } else {
        let m = macro_metrics_over(&classes, &predicted, &truth)?;
        let correct = predicted.iter().zip(&truth).filter(|(p, t)| p == t).count();
        NbEvaluation {
            train_size: train.len(),
            test_size: truth.len(),
            accuracy: correct as f64 / truth.len() as f64,
            macro_accuracy: m.accuracy,
            macro_f1: m.f1,
        }
    };

    Ok(TransferModel {
        model,
        evaluation,
        weak_labels: weak,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Labeled {
    pub probability: f64,
    pub stance: Stance,
}

/// Stance per (user, period), with the leave probability it came from.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StanceAssignment {
    map: BTreeMap<(String, usize), Labeled>,
}

impl StanceAssignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(
        &mut self,
        user: impl Into<String>,
        period: usize,
        probability: f64,
        stance: Stance,
    ) -> Result<()> {
        if !(0.0..=1.0).contains(&probability) {
            return Err(Error::Probability(probability));
        }
        let user = user.into();
        if self.map.contains_key(&(user.clone(), period)) {
            return Err(Error::Invalid(format!(
                "duplicate stance for user `{user}` in period {period}"
            )));
        }
        self.map.insert(
            (user, period),
            Labeled {
                probability,
                stance,
            },
        );
        Ok(())
    }

    /// Inserts a stance with its canonical probability (A 0, N 0.5, P 1).
    pub fn insert_stance(&mut self, user: impl Into<String>, period: usize, stance: Stance) -> Result<()> {
        let p = match stance {
            Stance::Against => 0.0,
            Stance::Neutral => 0.5,
            Stance::Pro => 1.0,
        };
        self.insert(user, period, p, stance)
    }

    pub fn get(&self, user: &str, period: usize) -> Option<Stance> {
        self.labeled(user, period).map(|l| l.stance)
    }

    pub fn labeled(&self, user: &str, period: usize) -> Option<&Labeled> {
        // BTreeMap<(String, usize)> lookups need an owned key.
        self.map.get(&(user.to_owned(), period))
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// (user, period, label) in (user, period) order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, usize, &Labeled)> {
        self.map.iter().map(|((u, p), l)| (u.as_str(), *p, l))
    }

    /// Keeps only the (user, period) pairs accepted by `keep`.
    pub fn retain(&mut self, mut keep: impl FnMut(&str, usize) -> bool) {
        self.map.retain(|(u, p), _| keep(u, *p));
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from("user\tperiod\tleave_probability\tstance\n");
        for (u, p, l) in self.iter() {
            let _ = writeln!(out, "{u}\t{p}\t{}\t{}", l.probability, l.stance);
        }
        out
    }

    /// Reads the four-column export, or three-column `user period stance`
    /// ground truth.
    pub fn from_tsv(text: &str) -> Result<Self> {
        let mut out = StanceAssignment::new();
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Invalid("empty stance file".into()))?;
        let width = header.split('\t').count();
        if width != 3 && width != 4 {
            return Err(Error::Invalid(format!("unexpected stance header `{header}`")));
        }
        for (n, line) in lines.enumerate() {
            let cols: Vec<&str> = line.split('\t').collect();
            let bad = || Error::Invalid(format!("stance file line {}: `{line}`", n + 2));
            if cols.len() != width {
                return Err(bad());
            }
            let period: usize = cols[1].parse().map_err(|_| bad())?;
            let stance: Stance = cols[width - 1].parse()?;
            if width == 4 {
                let p: f64 = cols[2].parse().map_err(|_| bad())?;
                out.insert(cols[0], period, p, stance)?;
            } else {
                out.insert_stance(cols[0], period, stance)?;
            }
        }
        Ok(out)
    }
}

/// Out-of-vocabulary token share for one period.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodOov {
    pub period: usize,
    pub users: usize,
    pub tokens: usize,
    pub oov_tokens: usize,
}

impl PeriodOov {
    pub fn rate(&self) -> f64 {
        if self.tokens == 0 {
            0.0
        } else {
            self.oov_tokens as f64 / self.tokens as f64
        }
    }
}

/// Aggregated token document per (user, period), deleted authors excluded.
pub(crate) fn period_documents(
    forest: &ThreadForest,
    partition: &TimePartition,
) -> BTreeMap<(usize, String), Vec<String>> {
    let mut docs: BTreeMap<(usize, String), Vec<(i64, usize)>> = BTreeMap::new();
    for (i, e) in forest.entries().iter().enumerate() {
        if e.is_deleted() {
            continue;
        }
        if let Some(p) = partition.period_of(e.timestamp) {
            docs.entry((p, e.author.clone()))
                .or_default()
                .push((e.timestamp, i));
        }
    }
    docs.into_iter()
        .map(|(k, mut list)| {
            list.sort_unstable();
            let tokens = list
                .iter()
                .flat_map(|&(_, i)| preprocess(&forest.entry(i).content))
                .collect();
            (k, tokens)
        })
        .collect()
}

/// Scores every user active in each period and maps the leave probability
/// to a stance. Also reports per-period OOV rates.
pub fn label_period_users(
    model: &NbModel,
    forest: &ThreadForest,
    partition: &TimePartition,
    cutoffs: StanceCutoffs,
) -> Result<(StanceAssignment, Vec<PeriodOov>)> {
    let mut out = StanceAssignment::new();
    let mut oov: Vec<PeriodOov> = (0..partition.num_periods())
        .map(|period| PeriodOov {
            period,
            users: 0,
            tokens: 0,
            oov_tokens: 0,
        })
        .collect();
    for ((period, user), tokens) in period_documents(forest, partition) {
        let p = model.leave_probability(&tokens);
        out.insert(user, period, p, stance_from_probability(p, cutoffs)?)?;
        let o = &mut oov[period];
        o.users += 1;
        o.tokens += tokens.len();
        o.oov_tokens += model.oov_count(&tokens);
    }
    Ok((out, oov))
}
