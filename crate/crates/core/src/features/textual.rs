use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

/// The `size` most frequent tokens by total occurrences, ties broken
/// lexicographically. Returns fewer when the corpus has fewer distinct tokens.
pub fn build_vocab<'a, I>(documents: I, size: usize) -> Vec<String>
where
    I: IntoIterator<Item = &'a [String]>,
{
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for doc in documents {
        for t in doc {
            *counts.entry(t.as_str()).or_default() += 1;
        }
    }
    let mut ranked: Vec<(&str, usize)> = counts.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    if ranked.len() < size {
        log::warn!(
            "only {} distinct tokens for a {size}-word vocabulary; padding with zero columns",
            ranked.len()
        );
    }
    ranked
        .into_iter()
        .take(size)
        .map(|(w, _)| w.to_owned())
        .collect()
}

/// Raw term frequency times smoothed inverse document frequency,
/// `idf = ln((1 + D) / (1 + df)) + 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TfIdf {
    vocabulary: Vec<String>,
    idf: Vec<f64>,
    width: usize,
    documents: usize,
}

impl TfIdf {
    /// `width` is the output length; vocabularies shorter than it are padded
    /// with zero columns.
    pub fn fit<'a, I>(vocabulary: Vec<String>, documents: I, width: usize) -> Self
    where
        I: IntoIterator<Item = &'a [String]>,
    {
        let index: HashMap<&str, usize> = vocabulary
            .iter()
            .enumerate()
            .map(|(i, w)| (w.as_str(), i))
            .collect();
        let mut df = vec![0usize; vocabulary.len()];
        let mut n_docs = 0usize;
        for doc in documents {
            n_docs += 1;
            let seen: HashSet<usize> = doc.iter().filter_map(|t| index.get(t.as_str()).copied()).collect();
            for i in seen {
                df[i] += 1;
            }
        }
        let d = n_docs as f64;
        let idf = df
            .iter()
            .map(|&f| ((1.0 + d) / (1.0 + f as f64)).ln() + 1.0)
            .collect();
        TfIdf {
            vocabulary,
            idf,
            width,
            documents: n_docs,
        }
    }

    pub fn vocabulary(&self) -> &[String] {
        &self.vocabulary
    }

    pub fn idf(&self) -> &[f64] {
        &self.idf
    }

    pub fn documents(&self) -> usize {
        self.documents
    }

    pub fn transform(&self, tokens: &[String]) -> Vec<f64> {
        let mut tf: HashMap<&str, usize> = HashMap::new();
        for t in tokens {
            *tf.entry(t.as_str()).or_default() += 1;
        }
        let mut out = vec![0.0; self.width];
        for (i, w) in self.vocabulary.iter().enumerate().take(self.width) {
            if let Some(&c) = tf.get(w.as_str()) {
                out[i] = c as f64 * self.idf[i];
            }
        }
        out
    }
}
