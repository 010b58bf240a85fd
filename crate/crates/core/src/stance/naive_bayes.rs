use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::Stance;
use crate::error::{Error, Result};

const AGAINST: usize = 0;
const PRO: usize = 1;

/// Binary (Against / Pro) multinomial Naive Bayes with additive smoothing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "NbModelRepr", into = "NbModelRepr")]
pub struct NbModel {
    vocabulary: Vec<String>,
    word_index: HashMap<String, usize>,
    /// Indexed [Against, Pro].
    log_prior: [f64; 2],
    log_likelihood: [Vec<f64>; 2],
    smoothing_alpha: f64,
}

#[derive(Serialize, Deserialize)]
struct NbModelRepr {
    vocabulary: Vec<String>,
    log_prior: [f64; 2],
    log_likelihood: [Vec<f64>; 2],
    smoothing_alpha: f64,
}

impl From<NbModelRepr> for NbModel {
    fn from(r: NbModelRepr) -> Self {
        let word_index = index_of(&r.vocabulary);
        NbModel {
            vocabulary: r.vocabulary,
            word_index,
            log_prior: r.log_prior,
            log_likelihood: r.log_likelihood,
            smoothing_alpha: r.smoothing_alpha,
        }
    }
}

impl From<NbModel> for NbModelRepr {
    fn from(m: NbModel) -> Self {
        NbModelRepr {
            vocabulary: m.vocabulary,
            log_prior: m.log_prior,
            log_likelihood: m.log_likelihood,
            smoothing_alpha: m.smoothing_alpha,
        }
    }
}

fn index_of(vocab: &[String]) -> HashMap<String, usize> {
    vocab
        .iter()
        .enumerate()
        .map(|(i, w)| (w.clone(), i))
        .collect()
}

fn class_slot(label: Stance) -> Result<usize> {
    match label {
        Stance::Against => Ok(AGAINST),
        Stance::Pro => Ok(PRO),
        Stance::Neutral => Err(Error::Invalid(
            "Naive Bayes training labels must be Pro or Against".into(),
        )),
    }
}

/// Trains on one token document per user.
///
/// The vocabulary keeps every token whose document frequency is at least
/// `min_df`, sorted lexicographically.
pub fn train_nb(
    documents: &[Vec<String>],
    labels: &[Stance],
    alpha: f64,
    min_df: usize,
) -> Result<NbModel> {
    if documents.len() != labels.len() {
        return Err(Error::Invalid(format!(
            "{} documents but {} labels",
            documents.len(),
            labels.len()
        )));
    }
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::Config(format!("smoothing alpha must be positive, got {alpha}")));
    }
    let slots = labels
        .iter()
        .map(|&l| class_slot(l))
        .collect::<Result<Vec<_>>>()?;
    let mut n_docs = [0usize; 2];
    for &s in &slots {
        n_docs[s] += 1;
    }
    if n_docs[AGAINST] == 0 {
        return Err(Error::EmptyClass("Against".into()));
    }
    if n_docs[PRO] == 0 {
        return Err(Error::EmptyClass("Pro".into()));
    }

    let mut df: BTreeMap<&str, usize> = BTreeMap::new();
    for doc in documents {
        let distinct: HashSet<&str> = doc.iter().map(String::as_str).collect();
        for w in distinct {
            *df.entry(w).or_default() += 1;
        }
    }
    let vocabulary: Vec<String> = df
        .into_iter()
        .filter(|&(_, n)| n >= min_df.max(1))
        .map(|(w, _)| w.to_owned())
        .collect();
    let word_index = index_of(&vocabulary);
    let v = vocabulary.len();

    let mut counts = [vec![0.0f64; v], vec![0.0f64; v]];
    for (doc, &s) in documents.iter().zip(&slots) {
        for w in doc {
            if let Some(&i) = word_index.get(w) {
                counts[s][i] += 1.0;
            }
        }
    }

    let n = documents.len() as f64;
    let log_prior = [
        (n_docs[AGAINST] as f64 / n).ln(),
        (n_docs[PRO] as f64 / n).ln(),
    ];
    let log_likelihood = counts.map(|c| {
        let total: f64 = c.iter().sum::<f64>() + alpha * v as f64;
        c.iter().map(|&x| ((x + alpha) / total).ln()).collect()
    });

    Ok(NbModel {
        vocabulary,
        word_index,
        log_prior,
        log_likelihood,
        smoothing_alpha: alpha,
    })
}

impl NbModel {
    pub fn vocabulary(&self) -> &[String] {
        &self.vocabulary
    }

    pub fn smoothing_alpha(&self) -> f64 {
        self.smoothing_alpha
    }

    /// (log P(Against), log P(Pro)).
    pub fn log_prior(&self) -> (f64, f64) {
        (self.log_prior[AGAINST], self.log_prior[PRO])
    }

    pub fn log_likelihood(&self, class: Stance, word: &str) -> Option<f64> {
        let slot = class_slot(class).ok()?;
        self.word_index
            .get(word)
            .map(|&i| self.log_likelihood[slot][i])
    }

    pub fn contains(&self, word: &str) -> bool {
        self.word_index.contains_key(word)
    }

    /// Posterior probability of Pro. Out-of-vocabulary tokens are ignored;
    /// an empty document returns the Pro prior.
    pub fn leave_probability<S: AsRef<str>>(&self, tokens: &[S]) -> f64 {
        let mut score = self.log_prior;
        for t in tokens {
            if let Some(&i) = self.word_index.get(t.as_ref()) {
                score[AGAINST] += self.log_likelihood[AGAINST][i];
                score[PRO] += self.log_likelihood[PRO][i];
            }
        }
        let m = score[AGAINST].max(score[PRO]);
        let lse = m + ((score[AGAINST] - m).exp() + (score[PRO] - m).exp()).ln();
        (score[PRO] - lse).exp().clamp(0.0, 1.0)
    }

    /// Number of tokens outside the vocabulary.
    pub fn oov_count<S: AsRef<str>>(&self, tokens: &[S]) -> usize {
        tokens
            .iter()
            .filter(|t| !self.word_index.contains_key(t.as_ref()))
            .count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn doc(s: &str) -> Vec<String> {
        s.split_whitespace().map(str::to_owned).collect()
    }

    fn toy() -> NbModel {
        train_nb(
            &[doc("a a"), doc("b b")],
            &[Stance::Pro, Stance::Against],
            1.0,
            1,
        )
        .unwrap()
    }

    #[test]
    fn toy_likelihoods() {
        let m = toy();
        assert_eq!(m.vocabulary(), &["a".to_owned(), "b".to_owned()]);
        let p = |c, w| m.log_likelihood(c, w).unwrap().exp();
        assert!((p(Stance::Pro, "a") - 0.75).abs() < 1e-12);
        assert!((p(Stance::Pro, "b") - 0.25).abs() < 1e-12);
        assert!((p(Stance::Against, "b") - 0.75).abs() < 1e-12);
        let (la, lp) = m.log_prior();
        assert!((la - 0.5f64.ln()).abs() < 1e-12 && (lp - 0.5f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn toy_posterior() {
        assert!((toy().leave_probability(&["a"]) - 0.75).abs() < 1e-12);
    }

    #[test]
    fn empty_document_returns_prior() {
        let m = train_nb(
            &[doc("x"), doc("x"), doc("x"), doc("y"), doc("y")],
            &[Stance::Pro, Stance::Pro, Stance::Pro, Stance::Against, Stance::Against],
            1.0,
            1,
        )
        .unwrap();
        assert!((m.leave_probability::<&str>(&[]) - 0.6).abs() < 1e-12);
        assert!((m.leave_probability(&["never-seen"]) - 0.6).abs() < 1e-12);
    }

    #[test]
    fn symmetric_model_is_indifferent() {
        let m = train_nb(
            &[doc("a b"), doc("b a")],
            &[Stance::Pro, Stance::Against],
            1.0,
            1,
        )
        .unwrap();
        for d in [vec!["a"], vec!["b", "b", "a"], vec![]] {
            assert!((m.leave_probability(&d) - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn large_alpha_flattens_likelihoods() {
        let m = train_nb(
            &[doc("a a a b"), doc("b b b a")],
            &[Stance::Pro, Stance::Against],
            1e9,
            1,
        )
        .unwrap();
        let pa = m.log_likelihood(Stance::Pro, "a").unwrap().exp();
        assert!((pa - 0.5).abs() < 1e-6);
    }

    #[test]
    fn rare_words_are_cut() {
        let docs = vec![doc("a b"), doc("a"), doc("a c")];
        let m = train_nb(
            &docs,
            &[Stance::Pro, Stance::Against, Stance::Pro],
            1.0,
            2,
        )
        .unwrap();
        assert_eq!(m.vocabulary(), &["a".to_owned()]);
    }

    #[test]
    fn errors() {
        assert!(matches!(
            train_nb(&[doc("a")], &[Stance::Pro], 1.0, 1),
            Err(Error::EmptyClass(_))
        ));
        assert!(train_nb(&[doc("a")], &[Stance::Neutral], 1.0, 1).is_err());
        assert!(train_nb(&[doc("a"), doc("b")], &[Stance::Pro, Stance::Against], 0.0, 1).is_err());
    }

    #[test]
    fn serde_round_trip_restores_index() {
        let m = toy();
        let back: NbModel = serde_json::from_str(&serde_json::to_string(&m).unwrap()).unwrap();
        assert_eq!(back, m);
        assert!((back.leave_probability(&["a"]) - 0.75).abs() < 1e-12);
    }

    /// Explicit product of per-token likelihoods, normalized.
    fn brute_force_posterior(
        docs: &[Vec<String>],
        labels: &[Stance],
        alpha: f64,
        query: &[String],
    ) -> f64 {
        let mut vocab: Vec<&String> = docs.iter().flatten().collect();
        vocab.sort();
        vocab.dedup();
        let mut joint = [0.0f64; 2];
        for (slot, class) in [(0, Stance::Against), (1, Stance::Pro)] {
            let class_docs: Vec<&Vec<String>> = docs
                .iter()
                .zip(labels)
                .filter(|(_, &l)| l == class)
                .map(|(d, _)| d)
                .collect();
            let prior = class_docs.len() as f64 / docs.len() as f64;
            let total: usize = class_docs.iter().map(|d| d.len()).sum();
            let mut p = prior;
            for q in query {
                if !vocab.contains(&q) {
                    continue;
                }
                let count = class_docs
                    .iter()
                    .map(|d| d.iter().filter(|w| *w == q).count())
                    .sum::<usize>();
                p *= (count as f64 + alpha) / (total as f64 + alpha * vocab.len() as f64);
            }
            joint[slot] = p;
        }
        joint[1] / (joint[0] + joint[1])
    }

    fn small_doc() -> impl Strategy<Value = Vec<String>> {
        prop::collection::vec(0u8..10, 0..=5)
            .prop_map(|ws| ws.into_iter().map(|w| format!("w{w}")).collect())
    }

    proptest! {
        #[test]
        fn posterior_matches_brute_force(
            docs in prop::collection::vec(small_doc(), 2..8),
            flips in prop::collection::vec(any::<bool>(), 8),
            query in small_doc(),
            alpha in 0.1f64..3.0,
        ) {
            let mut labels: Vec<Stance> = docs
                .iter()
                .zip(&flips)
                .map(|(_, &f)| if f { Stance::Pro } else { Stance::Against })
                .collect();
            labels[0] = Stance::Pro;
            labels[1] = Stance::Against;
            let m = train_nb(&docs, &labels, alpha, 1).unwrap();
            let got = m.leave_probability(&query);
            let want = brute_force_posterior(&docs, &labels, alpha, &query);
            prop_assert!((got - want).abs() < 1e-9, "{got} vs {want}");
        }

        #[test]
        fn likelihoods_normalize(docs in prop::collection::vec(small_doc(), 2..8)) {
            let labels: Vec<Stance> = (0..docs.len())
                .map(|i| if i % 2 == 0 { Stance::Pro } else { Stance::Against })
                .collect();
            let m = train_nb(&docs, &labels, 1.0, 1).unwrap();
            let (la, lp) = m.log_prior();
            prop_assert!((la.exp() + lp.exp() - 1.0).abs() < 1e-9);
            if !m.vocabulary().is_empty() {
                for c in [Stance::Pro, Stance::Against] {
                    let s: f64 = m
                        .vocabulary()
                        .iter()
                        .map(|w| m.log_likelihood(c, w).unwrap().exp())
                        .sum();
                    prop_assert!((s - 1.0).abs() < 1e-9);
                }
            }
        }
    }
}
