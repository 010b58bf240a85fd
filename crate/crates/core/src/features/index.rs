use std::collections::{BTreeMap, BTreeSet};

use crate::corpus::{ThreadForest, TimePartition};

/// What one user authored in one period, as forest indices.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct UserActivity {
    /// Genuine thread roots.
    pub posts: Vec<usize>,
    /// Comments (orphans included) whose parent is not the user's own entry.
    pub comments: Vec<usize>,
    /// Replies to the user's own entries.
    pub auto_comments: Vec<usize>,
    /// Roots of every thread the user wrote in.
    pub threads: BTreeSet<usize>,
}

impl UserActivity {
    /// The N_t(u) entries: posts and non-auto comments.
    pub fn counted_entries(&self) -> impl Iterator<Item = usize> + '_ {
        self.posts.iter().chain(&self.comments).copied()
    }
}

/// Per-period activity of every non-deleted author, plus the in-period
/// members of every thread.
#[derive(Debug, Clone)]
pub struct PeriodUserIndex {
    users: Vec<BTreeMap<String, UserActivity>>,
    thread_entries: Vec<BTreeMap<usize, Vec<usize>>>,
    period_of: Vec<Option<usize>>,
}

impl PeriodUserIndex {
    pub fn build(forest: &ThreadForest, partition: &TimePartition) -> Self {
        let k = partition.num_periods();
        let mut users: Vec<BTreeMap<String, UserActivity>> = vec![BTreeMap::new(); k];
        let mut thread_entries: Vec<BTreeMap<usize, Vec<usize>>> = vec![BTreeMap::new(); k];
        let period_of: Vec<Option<usize>> = forest
            .entries()
            .iter()
            .map(|e| partition.period_of(e.timestamp))
            .collect();

        for (i, e) in forest.entries().iter().enumerate() {
            let Some(t) = period_of[i] else { continue };
            let root = forest.thread_root(i);
            thread_entries[t].entry(root).or_default().push(i);
            if e.is_deleted() {
                continue;
            }
            let a = users[t].entry(e.author.clone()).or_default();
            a.threads.insert(root);
            if forest.is_post(i) {
                a.posts.push(i);
            } else {
                let auto = forest
                    .parent(i)
                    .is_some_and(|p| forest.entry(p).author == e.author);
                if auto {
                    a.auto_comments.push(i);
                } else {
                    a.comments.push(i);
                }
            }
        }

        PeriodUserIndex {
            users,
            thread_entries,
            period_of,
        }
    }

    pub fn num_periods(&self) -> usize {
        self.users.len()
    }

    pub fn activity(&self, user: &str, period: usize) -> Option<&UserActivity> {
        self.users.get(period)?.get(user)
    }

    pub fn is_active(&self, user: &str, period: usize) -> bool {
        self.activity(user, period).is_some()
    }

    /// Active users of a period, sorted.
    pub fn users(&self, period: usize) -> impl Iterator<Item = &str> {
        self.users[period].keys().map(String::as_str)
    }

    /// In-period entries of the thread rooted at `root`.
    pub fn thread_entries(&self, period: usize, root: usize) -> &[usize] {
        self.thread_entries[period]
            .get(&root)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn period_of(&self, idx: usize) -> Option<usize> {
        self.period_of[idx]
    }
}
