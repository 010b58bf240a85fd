//! Per-user, per-period stance labels from text.
//!
//! Weak labels come from hashtag usage on a training corpus; a multinomial
//! Naive Bayes model learned from them scores each user's aggregated text in
//! every period, and the leave probability is cut into Against / Neutral / Pro.

mod labeler;
mod lexicon;
mod naive_bayes;
pub mod porter;
mod stopwords;
mod text;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use labeler::{
    label_period_users, parse_messages, score_users, select_weak_labels, train_transfer_model,
    LabelerConfig, Labeled, NbEvaluation, PeriodOov, StanceAssignment, TransferModel, UserScore,
    WeakLabel,
};
pub use lexicon::{leave_score, HashtagCounting, HashtagLexicon};
pub use naive_bayes::{train_nb, NbModel};
pub(crate) use labeler::period_documents;
pub use stopwords::STOPWORDS;
pub use text::{extract_hashtags, preprocess};

/// A user's position in one period. Index order is Against, Neutral, Pro.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Stance {
    #[serde(rename = "A")]
    Against,
    #[serde(rename = "N")]
    Neutral,
    #[serde(rename = "P")]
    Pro,
}

impl Stance {
    pub const ALL: [Stance; 3] = [Stance::Against, Stance::Neutral, Stance::Pro];

    pub fn index(self) -> usize {
        match self {
            Stance::Against => 0,
            Stance::Neutral => 1,
            Stance::Pro => 2,
        }
    }

    pub fn from_index(i: usize) -> Option<Stance> {
        Stance::ALL.get(i).copied()
    }

    pub fn code(self) -> &'static str {
        match self {
            Stance::Against => "A",
            Stance::Neutral => "N",
            Stance::Pro => "P",
        }
    }

    pub fn one_hot(self) -> [f64; 3] {
        let mut v = [0.0; 3];
        v[self.index()] = 1.0;
        v
    }
}

impl fmt::Display for Stance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for Stance {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "A" | "a" | "Against" => Ok(Stance::Against),
            "N" | "n" | "Neutral" => Ok(Stance::Neutral),
            "P" | "p" | "Pro" => Ok(Stance::Pro),
            other => Err(Error::Invalid(format!("unknown stance `{other}`"))),
        }
    }
}

/// Leave-probability cutoffs. Probabilities equal to either bound map to
/// Neutral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StanceCutoffs {
    pub low: f64,
    pub high: f64,
}

impl Default for StanceCutoffs {
    fn default() -> Self {
        StanceCutoffs {
            low: 0.25,
            high: 0.75,
        }
    }
}

pub fn stance_from_probability(p: f64, cutoffs: StanceCutoffs) -> Result<Stance> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Probability(p));
    }
    Ok(if p < cutoffs.low {
        Stance::Against
    } else if p > cutoffs.high {
        Stance::Pro
    } else {
        Stance::Neutral
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn cutoff_examples() {
        let c = StanceCutoffs::default();
        assert_eq!(stance_from_probability(0.10, c).unwrap(), Stance::Against);
        assert_eq!(stance_from_probability(0.80, c).unwrap(), Stance::Pro);
        assert_eq!(stance_from_probability(0.25, c).unwrap(), Stance::Neutral);
        assert_eq!(stance_from_probability(0.75, c).unwrap(), Stance::Neutral);
        assert!(stance_from_probability(1.5, c).is_err());
        assert!(stance_from_probability(-0.1, c).is_err());
        assert!(stance_from_probability(f64::NAN, c).is_err());
    }

    #[test]
    fn codes_round_trip() {
        for s in Stance::ALL {
            assert_eq!(s.code().parse::<Stance>().unwrap(), s);
            assert_eq!(Stance::from_index(s.index()), Some(s));
            assert_eq!(serde_json::to_string(&s).unwrap(), format!("\"{}\"", s.code()));
        }
    }

    proptest! {
        #[test]
        fn mapping_is_monotone(a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let c = StanceCutoffs::default();
            let order = |s: Stance| match s {
                Stance::Against => 0,
                Stance::Neutral => 1,
                Stance::Pro => 2,
            };
            let s1 = stance_from_probability(lo, c).unwrap();
            let s2 = stance_from_probability(hi, c).unwrap();
            prop_assert!(order(s1) <= order(s2));
        }
    }
}
