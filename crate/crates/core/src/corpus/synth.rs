//! Seeded synthetic forum with a planted stance dynamic.
//!
//! Each period every user holds a stance. Threads get a tone; a handful of
//! users sharing that tone write its core entries, and the remaining active
//! users drop into threads picked uniformly at random. With probability
//! `homophily` a user's next stance is the majority author stance of the
//! entries in the threads they took part in (ties keep the current stance);
//! otherwise it is drawn uniformly. `homophily = 0` gives stances with no
//! signal at all.
//!
//! A companion tweet corpus carries lexicon hashtags for weak labeling.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Entry, TimePartition};
use crate::error::{Error, Result};
use crate::stance::{HashtagLexicon, Stance, StanceAssignment};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub users: usize,
    pub periods: usize,
    /// Unix time of the first cutoff.
    pub start: i64,
    pub period_seconds: i64,
    pub threads_per_period: usize,
    /// Probability that a user writes anything in a period.
    pub activity: f64,
    pub core_entries_min: usize,
    pub core_entries_max: usize,
    pub max_threads_per_user: usize,
    pub max_entries_per_visit: usize,
    pub homophily: f64,
    /// Probability that a reply answers the thread root rather than an
    /// earlier reply.
    pub root_reply: f64,
    pub words_per_entry: usize,
    pub tweet_users: usize,
    pub tweets_per_user: usize,
    pub hashtag_rate: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            users: 300,
            periods: 8,
            start: 1_451_606_400,
            period_seconds: 30 * 86_400,
            threads_per_period: 60,
            activity: 0.85,
            core_entries_min: 4,
            core_entries_max: 6,
            max_threads_per_user: 2,
            max_entries_per_visit: 2,
            homophily: 0.9,
            root_reply: 0.5,
            words_per_entry: 12,
            tweet_users: 400,
            tweets_per_user: 60,
            hashtag_rate: 0.3,
        }
    }
}

impl SynthConfig {
    fn validate(&self) -> Result<()> {
        for p in [self.activity, self.homophily, self.root_reply, self.hashtag_rate] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Probability(p));
            }
        }
        if self.users == 0 || self.periods == 0 || self.period_seconds < 2 {
            return Err(Error::Config(
                "synthetic corpus needs users, periods and a period length".into(),
            ));
        }
        if self.core_entries_min > self.core_entries_max
            || self.max_threads_per_user == 0
            || self.max_entries_per_visit == 0
        {
            return Err(Error::Config("inconsistent thread size bounds".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticCorpus {
    pub entries: Vec<Entry>,
    pub partition: TimePartition,
    /// Stance of every user who wrote something in a period.
    pub ground_truth: StanceAssignment,
    /// Stance of every user in every period, active or not.
    pub trajectories: BTreeMap<String, Vec<Stance>>,
    /// Weak-labeling corpus: messages by user.
    pub tweets: BTreeMap<String, Vec<String>>,
}

impl SyntheticCorpus {
    pub fn write_entries<W: Write>(&self, mut out: W) -> Result<()> {
        for e in &self.entries {
            serde_json::to_writer(&mut out, e)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn write_tweets<W: Write>(&self, mut out: W) -> Result<()> {
        for (user, texts) in &self.tweets {
            for t in texts {
                serde_json::to_writer(&mut out, &serde_json::json!({ "user": user, "text": t }))?;
                out.write_all(b"\n")?;
            }
        }
        Ok(())
    }
}

const AGAINST_WORDS: [&str; 16] = [
    "remain", "europe", "market", "union", "erasmus", "cooperation", "trade", "investment",
    "solidarity", "continent", "integration", "partnership", "membership", "neighbours",
    "referendum", "economy",
];
const PRO_WORDS: [&str; 16] = [
    "sovereignty", "borders", "control", "independence", "parliament", "immigration", "freedom",
    "brussels", "bureaucracy", "fishing", "laws", "taxpayers", "democracy", "leave", "deal",
    "referendum",
];
const NEUTRAL_WORDS: [&str; 12] = [
    "weather", "football", "question", "anyone", "thinking", "news", "watch", "interesting",
    "debate", "opinion", "article", "people",
];
const SHARED_WORDS: [&str; 16] = [
    "britain", "government", "vote", "country", "week", "time", "year", "today", "really",
    "think", "thread", "point", "good", "issue", "party", "politics",
];

fn stance_words(s: Stance) -> &'static [&'static str] {
    match s {
        Stance::Against => &AGAINST_WORDS,
        Stance::Neutral => &NEUTRAL_WORDS,
        Stance::Pro => &PRO_WORDS,
    }
}

fn text_for(rng: &mut ChaCha8Rng, stance: Stance, words: usize) -> String {
    (0..words)
        .map(|_| {
            let pool = if rng.gen_bool(0.5) {
                stance_words(stance)
            } else {
                &SHARED_WORDS[..]
            };
            *pool.choose(rng).expect("non-empty pool")
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn uniform_stance(rng: &mut ChaCha8Rng) -> Stance {
    Stance::ALL[rng.gen_range(0..3)]
}

pub fn generate_synthetic_corpus(config: &SynthConfig, seed: u64) -> Result<SyntheticCorpus> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let partition = TimePartition::uniform(config.start, config.period_seconds, config.periods)?;
    let names: Vec<String> = (0..config.users).map(|i| format!("user{i:04}")).collect();

    let mut stance: Vec<Stance> = (0..config.users).map(|_| uniform_stance(&mut rng)).collect();
    let mut trajectories: Vec<Vec<Stance>> = vec![Vec::with_capacity(config.periods); config.users];
    let mut ground_truth = StanceAssignment::new();
    let mut entries = Vec::new();
    let mut next_id = 0usize;

    for t in 0..config.periods {
        for (u, s) in stance.iter().enumerate() {
            trajectories[u].push(*s);
        }
        let active: Vec<usize> = (0..config.users)
            .filter(|_| rng.gen_bool(config.activity))
            .collect();
        let mut by_stance: [Vec<usize>; 3] = Default::default();
        for &u in &active {
            by_stance[stance[u].index()].push(u);
        }

        // Thread authorship: root and core by the tone's holders, then visitors.
        let mut threads: Vec<Vec<usize>> = Vec::new();
        if !active.is_empty() {
            for _ in 0..config.threads_per_period {
                let tone = uniform_stance(&mut rng);
                let pool = if by_stance[tone.index()].is_empty() {
                    &active
                } else {
                    &by_stance[tone.index()]
                };
                let core = rng.gen_range(config.core_entries_min..=config.core_entries_max);
                let authors: Vec<usize> = (0..=core)
                    .map(|_| *pool.choose(&mut rng).expect("non-empty pool"))
                    .collect();
                threads.push(authors);
            }
        }
        if !threads.is_empty() {
            let thread_ids: Vec<usize> = (0..threads.len()).collect();
            for &u in &active {
                let visits = rng.gen_range(1..=config.max_threads_per_user.min(threads.len()));
                for &th in thread_ids.choose_multiple(&mut rng, visits) {
                    let k = rng.gen_range(1..=config.max_entries_per_visit);
                    threads[th].extend(std::iter::repeat_n(u, k));
                }
            }
        }

        let mut engaged: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); config.users];
        let mut tallies: Vec<[usize; 3]> = Vec::with_capacity(threads.len());
        let period_start = config.start + t as i64 * config.period_seconds;
        for (th, authors) in threads.iter_mut().enumerate() {
            authors[1..].shuffle(&mut rng);
            let base = period_start + rng.gen_range(0..config.period_seconds / 2);
            let step = ((config.period_seconds / 2) / (authors.len() as i64 + 1)).max(1);
            let mut ids: Vec<String> = Vec::with_capacity(authors.len());
            let mut counts = [0usize; 3];
            for (k, &a) in authors.iter().enumerate() {
                let id = format!("s{next_id:07}");
                next_id += 1;
                let parent = if k == 0 {
                    None
                } else if rng.gen_bool(config.root_reply) {
                    Some(ids[0].as_str())
                } else {
                    Some(ids[rng.gen_range(0..k)].as_str())
                };
                let text = text_for(&mut rng, stance[a], config.words_per_entry);
                entries.push(Entry::new(
                    id.clone(),
                    names[a].clone(),
                    text,
                    base + k as i64 * step,
                    parent,
                ));
                ids.push(id);
                counts[stance[a].index()] += 1;
                engaged[a].insert(th);
            }
            tallies.push(counts);
        }

        for u in 0..config.users {
            if !engaged[u].is_empty() {
                ground_truth.insert_stance(names[u].clone(), t, stance[u])?;
            }
        }

        let mut next = stance.clone();
        for u in 0..config.users {
            let keep = rng.gen_bool(config.homophily);
            next[u] = if engaged[u].is_empty() {
                if keep {
                    stance[u]
                } else {
                    uniform_stance(&mut rng)
                }
            } else if keep {
                let mut total = [0usize; 3];
                for &th in &engaged[u] {
                    for k in 0..3 {
                        total[k] += tallies[th][k];
                    }
                }
                majority(total, stance[u])
            } else {
                uniform_stance(&mut rng)
            };
        }
        stance = next;
    }

    let tweets = generate_tweets(config, &mut rng);
    Ok(SyntheticCorpus {
        entries,
        partition,
        ground_truth,
        trajectories: names.into_iter().zip(trajectories).collect(),
        tweets,
    })
}

/// Stance with the largest count; the current stance wins ties it is part of,
/// otherwise the lowest index does.
pub(crate) fn majority(counts: [usize; 3], current: Stance) -> Stance {
    let best = *counts.iter().max().expect("three counts");
    if counts[current.index()] == best {
        return current;
    }
    Stance::ALL[counts.iter().position(|&c| c == best).expect("max exists")]
}

fn generate_tweets(config: &SynthConfig, rng: &mut ChaCha8Rng) -> BTreeMap<String, Vec<String>> {
    let lexicon = HashtagLexicon::default();
    let pro: Vec<&String> = lexicon.pro().iter().collect();
    let against: Vec<&String> = lexicon.against().iter().collect();
    let mut out = BTreeMap::new();
    for i in 0..config.tweet_users {
        let s = uniform_stance(rng);
        let n = rng.gen_range(config.tweets_per_user / 2..=config.tweets_per_user * 3 / 2);
        let texts = (0..n)
            .map(|_| {
                let mut t = text_for(rng, s, config.words_per_entry);
                if rng.gen_bool(config.hashtag_rate) {
                    let tags = match s {
                        Stance::Pro => &pro,
                        Stance::Against => &against,
                        Stance::Neutral if rng.gen_bool(0.5) => &pro,
                        Stance::Neutral => &against,
                    };
                    t.push_str(" #");
                    t.push_str(tags.choose(rng).expect("non-empty lexicon"));
                }
                t
            })
            .collect();
        out.insert(format!("tweeter{i:04}"), texts);
    }
    out
}
