//! Random toy forums and naive full-scan recomputations of the relational
//! feature sets, shared by the acceptance and oracle tests.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::Rng;
use stancecast::corpus::{Entry, TimePartition, DELETED_AUTHOR};
use stancecast::stance::{Stance, StanceAssignment};

pub struct Toy {
    pub entries: Vec<Entry>,
    pub partition: TimePartition,
    pub stances: StanceAssignment,
}

const USERS: [&str; 7] = ["ann", "bob", "cy", "dee", "eve", "fay", "gus"];

/// Up to `max_nodes` entries over three periods, with deleted authors,
/// orphans, auto-comments and a tail of entries past the last cutoff.
pub fn random_toy<R: Rng>(rng: &mut R, max_nodes: usize) -> Toy {
    let n = rng.gen_range(1..=max_nodes);
    let mut entries: Vec<Entry> = Vec::with_capacity(n);
    let mut ts = 0i64;
    for i in 0..n {
        ts += rng.gen_range(0..6);
        let author = if rng.gen_bool(0.1) {
            DELETED_AUTHOR.to_owned()
        } else {
            USERS[rng.gen_range(0..USERS.len())].to_owned()
        };
        let parent = if i == 0 || rng.gen_bool(0.2) {
            None
        } else if rng.gen_bool(0.05) {
            Some(format!("gone{i}"))
        } else {
            Some(entries[rng.gen_range(0..i)].id.clone())
        };
        entries.push(Entry::new(format!("e{i}"), author, "", ts, parent.as_deref()));
    }
    let span = ts.max(3);
    let partition = TimePartition::new(vec![0, span / 3, 2 * span / 3, span * 9 / 10 + 1]).unwrap();

    let mut stances = StanceAssignment::new();
    for e in &entries {
        if e.author == DELETED_AUTHOR {
            continue;
        }
        if let Some(t) = partition.period_of(e.timestamp) {
            if stances.get(&e.author, t).is_none() {
                let s = Stance::ALL[rng.gen_range(0..3)];
                stances.insert_stance(e.author.clone(), t, s).unwrap();
            }
        }
    }
    Toy {
        entries,
        partition,
        stances,
    }
}

pub fn quantiles(values: &[usize]) -> Vec<f64> {
    if values.is_empty() {
        return vec![0.0; 5];
    }
    let mut v = values.to_vec();
    v.sort_unstable();
    let last = (v.len() - 1) as f64;
    [0.0, 0.25, 0.5, 0.75, 1.0]
        .iter()
        .map(|q| {
            let pos = q * last;
            let below = v[pos.floor() as usize] as f64;
            let above = v[pos.ceil() as usize] as f64;
            below + (pos - pos.floor()) * (above - below)
        })
        .collect()
}

fn slot(s: Stance) -> usize {
    match s {
        Stance::Against => 0,
        Stance::Neutral => 1,
        Stance::Pro => 2,
    }
}

/// Numeric FS1, FS2, FS3 of one user-period, plus N_t.
#[derive(Debug, Clone)]
pub struct NaiveRow {
    pub fs1: Vec<f64>,
    pub fs2: Vec<f64>,
    pub fs3: Vec<f64>,
    pub n_t: usize,
}

/// Recomputes the relational features by scanning the whole entry list for
/// every quantity.
pub fn naive_features(toy: &Toy) -> BTreeMap<(String, usize), NaiveRow> {
    let by_id: HashMap<&str, &Entry> = toy.entries.iter().map(|e| (e.id.as_str(), e)).collect();
    let period = |e: &Entry| toy.partition.period_of(e.timestamp);
    let parent = |e: &Entry| e.parent_id.as_deref().and_then(|p| by_id.get(p).copied());
    let root = |e: &Entry| {
        let mut cur = e;
        while let Some(p) = parent(cur) {
            cur = p;
        }
        cur.id.clone()
    };
    let stance_of = |e: &Entry, t: usize| {
        if e.author == DELETED_AUTHOR {
            Stance::Neutral
        } else {
            toy.stances.get(&e.author, t).expect("every active author is labeled")
        }
    };
    // Replies to `e` in its period: entries whose whole chain up to `e`
    // stays in that period.
    let replies = |e: &Entry| -> [usize; 4] {
        let t = period(e);
        let mut out = [0usize; 4];
        for x in &toy.entries {
            if x.id == e.id || period(x) != t {
                continue;
            }
            let mut cur = x;
            let mut reached = false;
            while let Some(p) = parent(cur) {
                if p.id == e.id {
                    reached = true;
                    break;
                }
                if period(p) != t {
                    break;
                }
                cur = p;
            }
            if reached {
                out[3] += 1;
                out[slot(stance_of(x, t.unwrap()))] += 1;
            }
        }
        out
    };

    let mut active: BTreeSet<(String, usize)> = BTreeSet::new();
    for e in &toy.entries {
        if let (false, Some(t)) = (e.author == DELETED_AUTHOR, period(e)) {
            active.insert((e.author.clone(), t));
        }
    }

    let mut out = BTreeMap::new();
    for (user, t) in active {
        let mine: Vec<&Entry> = toy
            .entries
            .iter()
            .filter(|e| e.author == user && period(e) == Some(t))
            .collect();
        let mut id = 0;
        let mut cs = 0;
        let mut cs_by = [0usize; 3];
        let mut counted: Vec<&Entry> = Vec::new();
        for e in &mine {
            if e.parent_id.is_none() {
                id += 1;
                counted.push(e);
                continue;
            }
            let p = parent(e);
            if p.is_some_and(|p| p.author == user) {
                continue;
            }
            cs += 1;
            counted.push(e);
            let ps = match p {
                None => Stance::Neutral,
                Some(p) if p.author == DELETED_AUTHOR => Stance::Neutral,
                Some(p) => toy
                    .stances
                    .get(&p.author, t)
                    .or_else(|| period(p).and_then(|tp| toy.stances.get(&p.author, tp)))
                    .unwrap_or(Stance::Neutral),
            };
            cs_by[slot(ps)] += 1;
        }
        let r: Vec<[usize; 4]> = counted.iter().map(|e| replies(e)).collect();
        let mut fs1 = vec![id as f64, cs as f64];
        fs1.extend(quantiles(&r.iter().map(|x| x[3]).collect::<Vec<_>>()));
        let mut fs2: Vec<f64> = cs_by.iter().map(|&x| x as f64).collect();
        for k in 0..3 {
            fs2.extend(quantiles(&r.iter().map(|x| x[k]).collect::<Vec<_>>()));
        }

        let threads: BTreeSet<String> = mine.iter().map(|e| root(e)).collect();
        let mut per: [Vec<usize>; 3] = Default::default();
        for th in &threads {
            let mut c = [0usize; 3];
            for x in &toy.entries {
                if period(x) == Some(t) && &root(x) == th {
                    c[slot(stance_of(x, t))] += 1;
                }
            }
            for k in 0..3 {
                per[k].push(c[k]);
            }
        }
        let fs3: Vec<f64> = per.iter().flat_map(|c| quantiles(c)).collect();
        let n_t = mine
            .iter()
            .filter(|e| !parent(e).is_some_and(|p| p.author == user))
            .count();
        out.insert((user, t), NaiveRow { fs1, fs2, fs3, n_t });
    }
    out
}

/// Leaves of every thread, keyed by root id, by direct scan.
pub fn naive_leaves(entries: &[Entry]) -> BTreeMap<String, usize> {
    let ids: BTreeSet<&str> = entries.iter().map(|e| e.id.as_str()).collect();
    let by_id: HashMap<&str, &Entry> = entries.iter().map(|e| (e.id.as_str(), e)).collect();
    let has_child: BTreeSet<&str> = entries
        .iter()
        .filter_map(|e| e.parent_id.as_deref())
        .filter(|p| ids.contains(p))
        .collect();
    let mut out: BTreeMap<String, usize> = BTreeMap::new();
    for e in entries {
        let mut cur = e;
        while let Some(p) = cur.parent_id.as_deref().and_then(|p| by_id.get(p)) {
            cur = p;
        }
        let slot = out.entry(cur.id.clone()).or_default();
        if !has_child.contains(e.id.as_str()) {
            *slot += 1;
        }
    }
    out
}
