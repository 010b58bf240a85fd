use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::entry::Entry;
use crate::error::{Error, Result};

/// A root-to-leaf path through one thread, as entry ids.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Diffusion {
    pub entries: Vec<String>,
}

impl Diffusion {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForestDiagnostics {
    /// Comments whose parent is not in the corpus, promoted to roots.
    pub orphans: Vec<String>,
    /// Entries whose parent links formed a cycle, promoted to roots.
    pub cycle_entries: Vec<String>,
    /// Entries whose timestamp was raised to their parent's.
    pub clamped: usize,
    /// Duplicate ids dropped while building (first one wins).
    pub duplicates: usize,
}

/// The reconstructed set of discussion threads.
///
/// Entries are stored sorted by id so internal indices do not depend on input
/// order. Timestamps are repaired on construction: a child is never earlier
/// than its parent. The forest is immutable once built.
#[derive(Debug, Clone)]
pub struct ThreadForest {
    entries: Vec<Entry>,
    index: HashMap<String, usize>,
    parent: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
    roots: Vec<usize>,
    thread: Vec<usize>,
    orphan: Vec<bool>,
    subtree: Vec<usize>,
    order: Vec<usize>,
    diagnostics: ForestDiagnostics,
}

const UNSEEN: u8 = 0;
const ON_PATH: u8 = 1;
const DONE: u8 = 2;

impl ThreadForest {
    pub fn build(entries: Vec<Entry>) -> Self {
        let mut diagnostics = ForestDiagnostics::default();

        let mut seen = HashSet::new();
        let mut entries: Vec<Entry> = entries
            .into_iter()
            .filter(|e| {
                let fresh = seen.insert(e.id.clone());
                if !fresh {
                    diagnostics.duplicates += 1;
                }
                fresh
            })
            .collect();
        entries.sort_by(|a, b| a.id.cmp(&b.id));

        let index: HashMap<String, usize> = entries
            .iter()
            .enumerate()
            .map(|(i, e)| (e.id.clone(), i))
            .collect();
        let n = entries.len();

        let mut orphan = vec![false; n];
        let mut parent: Vec<Option<usize>> = entries
            .iter()
            .enumerate()
            .map(|(i, e)| {
                let pid = e.parent_id.as_deref()?;
                match resolve_parent(&index, pid) {
                    Some(p) => Some(p),
                    None => {
                        orphan[i] = true;
                        None
                    }
                }
            })
            .collect();

        // Cut cycles: every entry on a cycle becomes a flagged root.
        let mut state = vec![UNSEEN; n];
        let mut path: Vec<usize> = Vec::new();
        for start in 0..n {
            if state[start] != UNSEEN {
                continue;
            }
            path.clear();
            let mut cur = Some(start);
            while let Some(v) = cur {
                match state[v] {
                    DONE => break,
                    ON_PATH => {
                        let at = path.iter().position(|&p| p == v).unwrap_or(0);
                        for &c in &path[at..] {
                            orphan[c] = true;
                            diagnostics.cycle_entries.push(entries[c].id.clone());
                        }
                        for &c in &path[at..] {
                            parent[c] = None;
                        }
                        break;
                    }
                    _ => {
                        state[v] = ON_PATH;
                        path.push(v);
                        cur = parent[v];
                    }
                }
            }
            for &v in &path {
                state[v] = DONE;
            }
        }
        if !diagnostics.cycle_entries.is_empty() {
            diagnostics.cycle_entries.sort();
            log::warn!(
                "parent links formed cycles; {} entries promoted to orphan roots",
                diagnostics.cycle_entries.len()
            );
        }

        let mut children = vec![Vec::new(); n];
        let mut roots = Vec::new();
        for (i, p) in parent.iter().enumerate() {
            match p {
                Some(p) => children[*p].push(i),
                None => roots.push(i),
            }
        }

        // Parents precede children in `order`; repair timestamps along it.
        let mut order = Vec::with_capacity(n);
        let mut thread = vec![usize::MAX; n];
        for &r in &roots {
            thread[r] = r;
            order.push(r);
        }
        let mut head = 0;
        while head < order.len() {
            let v = order[head];
            head += 1;
            for &c in &children[v] {
                thread[c] = thread[v];
                order.push(c);
            }
        }
        debug_assert_eq!(order.len(), n);
        for &v in &order {
            if let Some(p) = parent[v] {
                let pt = entries[p].timestamp;
                if entries[v].timestamp < pt {
                    entries[v].timestamp = pt;
                    diagnostics.clamped += 1;
                }
            }
        }

        let key = |i: &usize| (entries[*i].timestamp, entries[*i].id.clone());
        for list in children.iter_mut() {
            list.sort_by_key(key);
        }
        roots.sort_by_key(key);

        let mut subtree = vec![0usize; n];
        for &v in order.iter().rev() {
            if let Some(p) = parent[v] {
                subtree[p] += 1 + subtree[v];
            }
        }

        diagnostics.orphans = (0..n)
            .filter(|&i| orphan[i] && entries[i].parent_id.is_some())
            .filter(|&i| !diagnostics.cycle_entries.contains(&entries[i].id))
            .map(|i| entries[i].id.clone())
            .collect();

        ThreadForest {
            entries,
            index,
            parent,
            children,
            roots,
            thread,
            orphan,
            subtree,
            order,
            diagnostics,
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn diagnostics(&self) -> &ForestDiagnostics {
        &self.diagnostics
    }

    /// Entries with repaired timestamps, sorted by id.
    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    pub fn entry(&self, idx: usize) -> &Entry {
        &self.entries[idx]
    }

    pub fn get(&self, id: &str) -> Option<&Entry> {
        self.index.get(id).map(|&i| &self.entries[i])
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    fn require(&self, id: &str) -> Result<usize> {
        self.index_of(id)
            .ok_or_else(|| Error::UnknownEntry(id.to_owned()))
    }

    /// Root ids ordered by (timestamp, id).
    pub fn roots(&self) -> impl Iterator<Item = &str> + '_ {
        self.roots.iter().map(|&i| self.entries[i].id.as_str())
    }

    pub fn root_indices(&self) -> &[usize] {
        &self.roots
    }

    pub fn children(&self, idx: usize) -> &[usize] {
        &self.children[idx]
    }

    pub fn children_of(&self, id: &str) -> Result<Vec<&str>> {
        let i = self.require(id)?;
        Ok(self.children[i]
            .iter()
            .map(|&c| self.entries[c].id.as_str())
            .collect())
    }

    pub fn parent(&self, idx: usize) -> Option<usize> {
        self.parent[idx]
    }

    pub fn is_root(&self, idx: usize) -> bool {
        self.parent[idx].is_none()
    }

    /// Roots whose entry claimed a parent that is missing (or cyclic).
    pub fn is_orphan(&self, idx: usize) -> bool {
        self.orphan[idx]
    }

    /// A genuine post: a root that never had a parent.
    pub fn is_post(&self, idx: usize) -> bool {
        self.is_root(idx) && !self.orphan[idx]
    }

    pub fn is_leaf(&self, idx: usize) -> bool {
        self.children[idx].is_empty()
    }

    /// Index of the root of the thread containing `idx`.
    pub fn thread_root(&self, idx: usize) -> usize {
        self.thread[idx]
    }

    /// All entries, parents before children.
    pub fn topological_order(&self) -> &[usize] {
        &self.order
    }

    /// Number of descendants (direct or indirect replies), the entry excluded.
    pub fn descendants(&self, idx: usize) -> usize {
        self.subtree[idx]
    }

    pub fn subtree_reply_count(&self, id: &str) -> Result<usize> {
        Ok(self.subtree[self.require(id)?])
    }

    /// Every index in the thread rooted at `root`, in pre-order.
    pub fn thread_members(&self, root: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.subtree[root] + 1);
        let mut stack = vec![root];
        while let Some(v) = stack.pop() {
            out.push(v);
            stack.extend(self.children[v].iter().rev());
        }
        out
    }

    /// One diffusion per leaf of the thread rooted at `root`, in child order.
    pub fn extract_diffusions(&self, root: &str) -> Result<Vec<Diffusion>> {
        let r = self.require(root)?;
        if !self.is_root(r) {
            return Err(Error::NotARoot(root.to_owned()));
        }
        let mut out = Vec::new();
        let mut path: Vec<usize> = Vec::new();
        // (node, depth) with depth = length of path before the node.
        let mut stack = vec![(r, 0usize)];
        while let Some((v, depth)) = stack.pop() {
            path.truncate(depth);
            path.push(v);
            if self.children[v].is_empty() {
                out.push(Diffusion {
                    entries: path.iter().map(|&i| self.entries[i].id.clone()).collect(),
                });
            } else {
                for &c in self.children[v].iter().rev() {
                    stack.push((c, depth + 1));
                }
            }
        }
        Ok(out)
    }
}

// Reddit dumps prefix parent ids with a kind tag (`t1_`, `t3_`).
fn resolve_parent(index: &HashMap<String, usize>, pid: &str) -> Option<usize> {
    if let Some(&p) = index.get(pid) {
        return Some(p);
    }
    let b = pid.as_bytes();
    if b.len() > 3 && b[0] == b't' && b[1].is_ascii_digit() && b[2] == b'_' {
        return index.get(&pid[3..]).copied();
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn figure_one() -> Vec<Entry> {
        vec![
            Entry::new("n0", "a", "post", 0, None),
            Entry::new("n1", "b", "c1", 10, Some("n0")),
            Entry::new("n2", "c", "c2", 20, Some("n0")),
            Entry::new("n3", "d", "c3", 30, Some("n1")),
            Entry::new("n4", "e", "c4", 40, Some("n3")),
            Entry::new("n5", "f", "c5", 50, Some("n3")),
        ]
    }

    #[test]
    fn figure_one_shape() {
        let f = ThreadForest::build(figure_one());
        assert_eq!(f.roots().collect::<Vec<_>>(), vec!["n0"]);
        assert_eq!(f.children_of("n0").unwrap(), vec!["n1", "n2"]);
        assert_eq!(f.children_of("n1").unwrap(), vec!["n3"]);
        assert_eq!(f.children_of("n3").unwrap(), vec!["n4", "n5"]);
        assert!(f.children_of("n2").unwrap().is_empty());
    }

    #[test]
    fn figure_one_diffusions() {
        let f = ThreadForest::build(figure_one());
        let d: Vec<Vec<String>> = f
            .extract_diffusions("n0")
            .unwrap()
            .into_iter()
            .map(|d| d.entries)
            .collect();
        assert_eq!(
            d,
            vec![
                vec!["n0", "n1", "n3", "n4"],
                vec!["n0", "n1", "n3", "n5"],
                vec!["n0", "n2"],
            ]
        );
    }

    #[test]
    fn figure_one_reply_counts() {
        let f = ThreadForest::build(figure_one());
        assert_eq!(f.subtree_reply_count("n1").unwrap(), 3);
        assert_eq!(f.subtree_reply_count("n0").unwrap(), 5);
        for leaf in ["n2", "n4", "n5"] {
            assert_eq!(f.subtree_reply_count(leaf).unwrap(), 0);
        }
        assert!(matches!(
            f.subtree_reply_count("zz"),
            Err(Error::UnknownEntry(_))
        ));
    }

    #[test]
    fn single_post() {
        let f = ThreadForest::build(vec![Entry::new("p", "u", "", 5, None)]);
        assert_eq!(f.root_indices().len(), 1);
        assert!(f.children(0).is_empty());
        let d = f.extract_diffusions("p").unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].len(), 1);
    }

    #[test]
    fn unknown_parent_becomes_flagged_orphan() {
        let f = ThreadForest::build(vec![
            Entry::new("p", "u", "", 5, None),
            Entry::new("c", "v", "", 6, Some("gone")),
        ]);
        assert_eq!(f.root_indices().len(), 2);
        let c = f.index_of("c").unwrap();
        assert!(f.is_root(c) && f.is_orphan(c) && !f.is_post(c));
        assert!(f.is_post(f.index_of("p").unwrap()));
        assert_eq!(f.diagnostics().orphans, vec!["c".to_owned()]);
    }

    #[test]
    fn kind_prefixed_parent_ids_resolve() {
        let f = ThreadForest::build(vec![
            Entry::new("abc", "u", "", 5, None),
            Entry::new("def", "v", "", 6, Some("t3_abc")),
        ]);
        assert_eq!(f.children_of("abc").unwrap(), vec!["def"]);
    }

    #[test]
    fn cycles_are_cut() {
        let f = ThreadForest::build(vec![
            Entry::new("a", "u", "", 1, Some("b")),
            Entry::new("b", "u", "", 2, Some("a")),
            Entry::new("c", "u", "", 3, Some("a")),
            Entry::new("s", "u", "", 3, Some("s")),
        ]);
        assert_eq!(
            f.diagnostics().cycle_entries,
            vec!["a".to_owned(), "b".to_owned(), "s".to_owned()]
        );
        assert!(f.diagnostics().orphans.is_empty());
        for id in ["a", "b", "s"] {
            let i = f.index_of(id).unwrap();
            assert!(f.is_root(i) && f.is_orphan(i));
        }
        assert_eq!(f.children_of("a").unwrap(), vec!["c"]);
    }

    #[test]
    fn timestamps_are_clamped() {
        let f = ThreadForest::build(vec![
            Entry::new("p", "u", "", 100, None),
            Entry::new("c", "v", "", 50, Some("p")),
            Entry::new("d", "v", "", 70, Some("c")),
        ]);
        assert_eq!(f.get("c").unwrap().timestamp, 100);
        assert_eq!(f.get("d").unwrap().timestamp, 100);
        assert_eq!(f.diagnostics().clamped, 2);
        for d in f.extract_diffusions("p").unwrap() {
            let ts: Vec<i64> = d.entries.iter().map(|i| f.get(i).unwrap().timestamp).collect();
            assert!(ts.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn child_order_breaks_ties_by_id() {
        let f = ThreadForest::build(vec![
            Entry::new("p", "u", "", 0, None),
            Entry::new("z", "v", "", 5, Some("p")),
            Entry::new("b", "v", "", 5, Some("p")),
            Entry::new("a", "v", "", 7, Some("p")),
        ]);
        assert_eq!(f.children_of("p").unwrap(), vec!["b", "z", "a"]);
    }

    #[test]
    fn diffusions_of_a_comment_is_an_error() {
        let f = ThreadForest::build(figure_one());
        assert!(matches!(f.extract_diffusions("n3"), Err(Error::NotARoot(_))));
        assert!(matches!(
            f.extract_diffusions("nope"),
            Err(Error::UnknownEntry(_))
        ));
    }

    #[test]
    fn perfect_binary_tree_paths() {
        // depth 3 => 15 nodes, 8 leaves; brute-force: every leaf has a unique
        // root path of 4 nodes.
        let mut entries = vec![Entry::new("0", "u", "", 0, None)];
        for i in 1..15usize {
            let p = (i - 1) / 2;
            entries.push(Entry::new(i.to_string(), "u", "", i as i64, Some(&p.to_string())));
        }
        let f = ThreadForest::build(entries);
        let d = f.extract_diffusions("0").unwrap();
        assert_eq!(d.len(), 8);
        assert!(d.iter().all(|d| d.len() == 4));
        let mut leaves: Vec<&str> = d.iter().map(|d| d.entries[3].as_str()).collect();
        leaves.sort();
        leaves.dedup();
        assert_eq!(leaves.len(), 8);
    }
}
