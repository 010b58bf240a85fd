use rand::seq::index::sample;
use rand::Rng;

use super::binning::{Binned, MAX_BINS};
use super::NUM_CLASSES;

#[derive(Debug, Clone, Copy)]
pub(crate) enum Node {
    Leaf(usize),
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

/// Nodes plus leaf payloads; rows go left when `value < threshold`.
#[derive(Debug, Clone)]
pub(crate) struct Tree<L> {
    nodes: Vec<Node>,
    leaves: Vec<L>,
}

impl<L> Tree<L> {
    pub(crate) fn leaf(&self, row: &[f64]) -> &L {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                Node::Leaf(l) => return &self.leaves[l],
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if row[feature] < threshold { left } else { right },
            }
        }
    }

    pub(crate) fn add_split_counts(&self, counts: &mut [usize]) {
        for n in &self.nodes {
            if let Node::Split { feature, .. } = n {
                counts[*feature] += 1;
            }
        }
    }

    pub(crate) fn root_split(&self) -> Option<(usize, f64)> {
        match self.nodes.first()? {
            Node::Split {
                feature, threshold, ..
            } => Some((*feature, *threshold)),
            Node::Leaf(_) => None,
        }
    }

    pub(crate) fn node_count(&self) -> usize {
        self.nodes.len()
    }

    fn push_leaf(&mut self, value: L) -> usize {
        self.leaves.push(value);
        self.nodes.push(Node::Leaf(self.leaves.len() - 1));
        self.nodes.len() - 1
    }

    fn reserve_split(&mut self) -> usize {
        self.nodes.push(Node::Leaf(usize::MAX));
        self.nodes.len() - 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeParams {
    pub max_depth: usize,
    /// Features drawn at random for each split.
    pub max_features: usize,
}

/// Gini CART tree predicting a class index.
#[derive(Debug, Clone)]
pub struct ClassificationTree(pub(crate) Tree<usize>);

impl ClassificationTree {
    pub fn predict_row(&self, row: &[f64]) -> usize {
        *self.0.leaf(row)
    }

    /// Feature and threshold of the first split, if any.
    pub fn root_split(&self) -> Option<(usize, f64)> {
        self.0.root_split()
    }

    pub fn node_count(&self) -> usize {
        self.0.node_count()
    }
}

/// Rows are given as (possibly repeated) sample indices into `binned`.
pub(crate) fn grow_classifier<R: Rng>(
    binned: &Binned,
    y: &[usize],
    mut samples: Vec<u32>,
    params: TreeParams,
    rng: &mut R,
) -> ClassificationTree {
    let mut tree = Tree {
        nodes: Vec::new(),
        leaves: Vec::new(),
    };
    let mut hist = vec![[0u32; NUM_CLASSES]; MAX_BINS];
    grow_class_node(binned, y, &mut samples, 0, params, rng, &mut tree, &mut hist);
    ClassificationTree(tree)
}

fn majority(counts: &[u32; NUM_CLASSES]) -> usize {
    let best = *counts.iter().max().expect("classes");
    counts.iter().position(|&c| c == best).expect("max")
}

fn sum_sq_over_n(c: &[u32; NUM_CLASSES], n: u32) -> f64 {
    if n == 0 {
        return 0.0;
    }
    c.iter().map(|&x| (x as f64) * (x as f64)).sum::<f64>() / n as f64
}

#[allow(clippy::too_many_arguments)]
fn grow_class_node<R: Rng>(
    binned: &Binned,
    y: &[usize],
    samples: &mut [u32],
    depth: usize,
    params: TreeParams,
    rng: &mut R,
    tree: &mut Tree<usize>,
    hist: &mut [[u32; NUM_CLASSES]],
) -> usize {
    let mut counts = [0u32; NUM_CLASSES];
    for &s in samples.iter() {
        counts[y[s as usize]] += 1;
    }
    let n = samples.len() as u32;
    let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
    if depth >= params.max_depth || n < 2 || pure {
        return tree.push_leaf(majority(&counts));
    }

    let d = binned.cols();
    let m = params.max_features.clamp(1, d);
    let parent = sum_sq_over_n(&counts, n);
    let mut best: Option<(f64, usize, usize)> = None;
    // Like common CART implementations, keep drawing features past
    // `max_features` until one admits a valid split.
    let mut visited = 0;
    for j in sample(rng, d, d).into_iter() {
        if visited >= m && best.is_some() {
            break;
        }
        let bins = binned.bins(j);
        if bins < 2 {
            continue;
        }
        visited += 1;
        let col = binned.column(j);
        for h in hist[..bins].iter_mut() {
            *h = [0; NUM_CLASSES];
        }
        for &s in samples.iter() {
            hist[col[s as usize] as usize][y[s as usize]] += 1;
        }
        let mut left = [0u32; NUM_CLASSES];
        let mut nl = 0u32;
        for (b, h) in hist[..bins - 1].iter().enumerate() {
            let hn: u32 = h.iter().sum();
            if hn == 0 {
                continue;
            }
            for c in 0..NUM_CLASSES {
                left[c] += h[c];
            }
            nl += hn;
            if nl == n {
                break;
            }
            let right = [counts[0] - left[0], counts[1] - left[1], counts[2] - left[2]];
            let score = sum_sq_over_n(&left, nl) + sum_sq_over_n(&right, n - nl);
            if score > parent + 1e-12 && best.is_none_or(|(s, _, _)| score > s) {
                best = Some((score, j, b));
            }
        }
    }
    let Some((_, feature, bin)) = best else {
        return tree.push_leaf(majority(&counts));
    };

    let col = binned.column(feature);
    let mut split = 0;
    for i in 0..samples.len() {
        if (col[samples[i] as usize] as usize) <= bin {
            samples.swap(i, split);
            split += 1;
        }
    }
    let at = tree.reserve_split();
    let (l, r) = samples.split_at_mut(split);
    let left = grow_class_node(binned, y, l, depth + 1, params, rng, tree, hist);
    let right = grow_class_node(binned, y, r, depth + 1, params, rng, tree, hist);
    tree.nodes[at] = Node::Split {
        feature,
        threshold: binned.threshold(feature, bin),
        left,
        right,
    };
    at
}

pub(crate) const LEAF_L2: f64 = 1.0;
pub(crate) const MIN_CHILD_HESSIAN: f64 = 1.0;

/// Second-order regression tree for boosting: leaf value `-G / (H + 1)`.
pub(crate) fn grow_regressor(
    binned: &Binned,
    grad: &[f64],
    hess: &[f64],
    max_depth: usize,
) -> Tree<f64> {
    let mut tree = Tree {
        nodes: Vec::new(),
        leaves: Vec::new(),
    };
    let mut samples: Vec<u32> = (0..grad.len() as u32).collect();
    let mut hist = vec![(0.0f64, 0.0f64); MAX_BINS];
    grow_reg_node(binned, grad, hess, &mut samples, 0, max_depth, &mut tree, &mut hist);
    tree
}

#[allow(clippy::too_many_arguments)]
fn grow_reg_node(
    binned: &Binned,
    grad: &[f64],
    hess: &[f64],
    samples: &mut [u32],
    depth: usize,
    max_depth: usize,
    tree: &mut Tree<f64>,
    hist: &mut [(f64, f64)],
) -> usize {
    let (g, h) = samples.iter().fold((0.0, 0.0), |(g, h), &s| {
        (g + grad[s as usize], h + hess[s as usize])
    });
    let leaf_value = -g / (h + LEAF_L2);
    if depth >= max_depth || samples.len() < 2 {
        return tree.push_leaf(leaf_value);
    }
    let parent = g * g / (h + LEAF_L2);
    let mut best: Option<(f64, usize, usize)> = None;
    for j in 0..binned.cols() {
        let bins = binned.bins(j);
        if bins < 2 {
            continue;
        }
        let col = binned.column(j);
        for e in hist[..bins].iter_mut() {
            *e = (0.0, 0.0);
        }
        for &s in samples.iter() {
            let e = &mut hist[col[s as usize] as usize];
            e.0 += grad[s as usize];
            e.1 += hess[s as usize];
        }
        let (mut gl, mut hl) = (0.0, 0.0);
        for (b, &(bg, bh)) in hist[..bins - 1].iter().enumerate() {
            if bh == 0.0 && bg == 0.0 {
                continue;
            }
            gl += bg;
            hl += bh;
            let (gr, hr) = (g - gl, h - hl);
            if hl < MIN_CHILD_HESSIAN || hr < MIN_CHILD_HESSIAN {
                continue;
            }
            let gain = gl * gl / (hl + LEAF_L2) + gr * gr / (hr + LEAF_L2) - parent;
            if gain > 1e-12 && best.is_none_or(|(s, _, _)| gain > s) {
                best = Some((gain, j, b));
            }
        }
    }
    let Some((_, feature, bin)) = best else {
        return tree.push_leaf(leaf_value);
    };
    let col = binned.column(feature);
    let mut split = 0;
    for i in 0..samples.len() {
        if (col[samples[i] as usize] as usize) <= bin {
            samples.swap(i, split);
            split += 1;
        }
    }
    if split == 0 || split == samples.len() {
        return tree.push_leaf(leaf_value);
    }
    let at = tree.reserve_split();
    let (l, r) = samples.split_at_mut(split);
    let left = grow_reg_node(binned, grad, hess, l, depth + 1, max_depth, tree, hist);
    let right = grow_reg_node(binned, grad, hess, r, depth + 1, max_depth, tree, hist);
    tree.nodes[at] = Node::Split {
        feature,
        threshold: binned.threshold(feature, bin),
        left,
        right,
    };
    at
}
