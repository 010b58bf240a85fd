//! Descriptive statistics of an ingested corpus.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::corpus::ThreadForest;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonthCount {
    /// `YYYY-MM` in UTC.
    pub month: String,
    pub posts: usize,
    pub comments: usize,
}

/// Authors split by what they wrote. Deleted accounts are left out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RoleBreakdown {
    pub initiator_only: usize,
    pub both: usize,
    pub commenter_only: usize,
}

impl RoleBreakdown {
    pub fn total(&self) -> usize {
        self.initiator_only + self.both + self.commenter_only
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusProfile {
    pub entries: usize,
    pub posts: usize,
    /// Entries that name a parent, orphans included.
    pub comments: usize,
    pub comment_share: f64,
    pub authors: usize,
    pub monthly: Vec<MonthCount>,
    pub roles: RoleBreakdown,
    /// `(m, fraction of authors with at least m messages)`, one step per
    /// distinct message count.
    pub ccdf: Vec<(usize, f64)>,
}

pub fn profile_corpus(forest: &ThreadForest) -> CorpusProfile {
    let mut monthly: BTreeMap<String, (usize, usize)> = BTreeMap::new();
    let mut per_author: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
    let mut posts = 0;
    for e in forest.entries() {
        let is_comment = e.parent_id.is_some();
        let month = chrono::DateTime::from_timestamp(e.timestamp, 0)
            .map(|d| d.format("%Y-%m").to_string())
            .unwrap_or_else(|| "invalid".into());
        let slot = monthly.entry(month).or_default();
        if is_comment {
            slot.1 += 1;
        } else {
            slot.0 += 1;
            posts += 1;
        }
        if !e.is_deleted() {
            let a = per_author.entry(e.author.as_str()).or_default();
            if is_comment {
                a.1 += 1;
            } else {
                a.0 += 1;
            }
        }
    }
    let mut roles = RoleBreakdown::default();
    let mut counts: Vec<usize> = Vec::with_capacity(per_author.len());
    for &(p, c) in per_author.values() {
        match (p > 0, c > 0) {
            (true, false) => roles.initiator_only += 1,
            (true, true) => roles.both += 1,
            _ => roles.commenter_only += 1,
        }
        counts.push(p + c);
    }
    counts.sort_unstable();
    let users = counts.len() as f64;
    let mut ccdf = Vec::new();
    let mut i = 0;
    while i < counts.len() {
        let m = counts[i];
        ccdf.push((m, (counts.len() - i) as f64 / users));
        while i < counts.len() && counts[i] == m {
            i += 1;
        }
    }
    let entries = forest.len();
    CorpusProfile {
        entries,
        posts,
        comments: entries - posts,
        comment_share: if entries == 0 {
            0.0
        } else {
            (entries - posts) as f64 / entries as f64
        },
        authors: per_author.len(),
        monthly: monthly
            .into_iter()
            .map(|(month, (posts, comments))| MonthCount {
                month,
                posts,
                comments,
            })
            .collect(),
        roles,
        ccdf,
    }
}

impl CorpusProfile {
    pub fn monthly_tsv(&self) -> String {
        let mut out = String::from("month\tposts\tcomments\n");
        for m in &self.monthly {
            let _ = writeln!(out, "{}\t{}\t{}", m.month, m.posts, m.comments);
        }
        out
    }

    pub fn roles_tsv(&self) -> String {
        let r = self.roles;
        format!(
            "role\tauthors\ninitiator_only\t{}\nboth\t{}\ncommenter_only\t{}\n",
            r.initiator_only, r.both, r.commenter_only
        )
    }

    pub fn ccdf_tsv(&self) -> String {
        let mut out = String::from("messages\tfraction_at_least\n");
        for (m, f) in &self.ccdf {
            let _ = writeln!(out, "{m}\t{f}");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Entry, DELETED_AUTHOR};

    #[test]
    fn shares_roles_and_ccdf() {
        let mut entries = vec![Entry::new("p", "a", "", 0, None)];
        for k in 0..9 {
            let author = if k == 0 { "a" } else { "b" };
            entries.push(Entry::new(format!("c{k}"), author, "", 10 + k, Some("p")));
        }
        entries.push(Entry::new("q", "c", "", 2_700_000, None));
        entries.push(Entry::new("d", DELETED_AUTHOR, "", 2_700_001, Some("q")));
        let p = profile_corpus(&ThreadForest::build(entries));
        assert_eq!(p.entries, 12);
        assert_eq!(p.posts, 2);
        assert_eq!(p.comments, 10);
        assert_eq!(p.roles, RoleBreakdown { initiator_only: 1, both: 1, commenter_only: 1 });
        assert_eq!(p.roles.total(), p.authors);
        assert_eq!(p.ccdf, vec![(1, 1.0), (2, 2.0 / 3.0), (8, 1.0 / 3.0)]);
        assert_eq!(p.monthly.len(), 2);
        assert_eq!(p.monthly[0].month, "1970-01");
    }

    #[test]
    fn ninety_one_percent_comments() {
        let mut entries = Vec::new();
        for t in 0..9 {
            entries.push(Entry::new(format!("p{t}"), "op", "", t, None));
            for k in 0..10 {
                entries.push(Entry::new(format!("p{t}c{k}"), "x", "", t, Some(&format!("p{t}"))));
            }
        }
        // 9 posts and 91 comments.
        entries.push(Entry::new("z0", "x", "", 1, Some("p0")));
        let p = profile_corpus(&ThreadForest::build(entries));
        assert!((p.comment_share - 0.91).abs() < 1e-12);
    }

    #[test]
    fn single_user_ccdf_has_one_step() {
        let p = profile_corpus(&ThreadForest::build(vec![
            Entry::new("a", "u", "", 0, None),
            Entry::new("b", "u", "", 1, Some("a")),
        ]));
        assert_eq!(p.ccdf, vec![(2, 1.0)]);
    }
}
