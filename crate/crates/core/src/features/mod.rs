//! The FS0..FS5 descriptions of one user in one period.
//!
//! Every vector ends with a 3-slot one-hot of the user's current stance
//! (A, N, P). Symbolic counts treat that one-hot as a single feature.

mod export;
mod index;
mod quantiles;
mod relational;
mod textual;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stance::Stance;

pub use export::FeatureMatrix;
pub use index::{PeriodUserIndex, UserActivity};
pub use quantiles::quantiles5;
pub use relational::{FeatureConfig, FeatureExtractor, IdfDocuments};
pub use textual::{build_vocab, TfIdf};

pub const DEFAULT_VOCAB_SIZE: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FeatureSet {
    #[serde(rename = "FS0")]
    Fs0,
    #[serde(rename = "FS1")]
    Fs1,
    #[serde(rename = "FS2")]
    Fs2,
    #[serde(rename = "FS3")]
    Fs3,
    #[serde(rename = "FS4")]
    Fs4,
    #[serde(rename = "FS5")]
    Fs5,
}

const FS1_NUMERIC: usize = 7;
const FS2_NUMERIC: usize = 18;
const FS3_NUMERIC: usize = 15;

impl FeatureSet {
    pub const ALL: [FeatureSet; 6] = [
        FeatureSet::Fs0,
        FeatureSet::Fs1,
        FeatureSet::Fs2,
        FeatureSet::Fs3,
        FeatureSet::Fs4,
        FeatureSet::Fs5,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FeatureSet::Fs0 => "FS0",
            FeatureSet::Fs1 => "FS1",
            FeatureSet::Fs2 => "FS2",
            FeatureSet::Fs3 => "FS3",
            FeatureSet::Fs4 => "FS4",
            FeatureSet::Fs5 => "FS5",
        }
    }

    /// Numeric slots before the stance one-hot.
    pub fn numeric_len(self, vocab_size: usize) -> usize {
        let relational = FS1_NUMERIC + FS2_NUMERIC + FS3_NUMERIC;
        match self {
            FeatureSet::Fs0 => vocab_size,
            FeatureSet::Fs1 => FS1_NUMERIC,
            FeatureSet::Fs2 => FS2_NUMERIC,
            FeatureSet::Fs3 => FS3_NUMERIC,
            FeatureSet::Fs4 => relational,
            FeatureSet::Fs5 => vocab_size + relational,
        }
    }

    /// Length of the numeric vector, one-hot included.
    pub fn dimension(self, vocab_size: usize) -> usize {
        self.numeric_len(vocab_size) + 3
    }

    /// Feature count with the current stance counted once.
    pub fn symbolic_count(self, vocab_size: usize) -> usize {
        self.numeric_len(vocab_size) + 1
    }

    /// Column symbols, one per numeric slot.
    pub fn column_symbols(self, vocab: &[String], vocab_size: usize) -> Vec<String> {
        let stance = Stance::ALL.map(|s| format!("c_t={s}"));
        let mut cols = match self {
            FeatureSet::Fs0 => fs0_symbols(vocab, vocab_size),
            FeatureSet::Fs1 => fs1_symbols(),
            FeatureSet::Fs2 => fs2_symbols(),
            FeatureSet::Fs3 => fs3_symbols(),
            FeatureSet::Fs4 => [fs1_symbols(), fs2_symbols(), fs3_symbols()].concat(),
            FeatureSet::Fs5 => [
                fs0_symbols(vocab, vocab_size),
                fs1_symbols(),
                fs2_symbols(),
                fs3_symbols(),
            ]
            .concat(),
        };
        cols.extend(stance);
        cols
    }
}

fn fs0_symbols(vocab: &[String], vocab_size: usize) -> Vec<String> {
    (0..vocab_size)
        .map(|i| match vocab.get(i) {
            Some(w) => format!("tfidf({w})"),
            None => format!("tfidf(<pad{i}>)"),
        })
        .collect()
}

fn fs1_symbols() -> Vec<String> {
    let mut v = vec!["ID_t".to_owned(), "CS_t".to_owned()];
    v.extend((1..=5).map(|q| format!("R_t^{q}")));
    v
}

fn fs2_symbols() -> Vec<String> {
    let mut v: Vec<String> = Stance::ALL.iter().map(|s| format!("CS_t^{s}")).collect();
    for s in Stance::ALL {
        v.extend((1..=5).map(|q| format!("R_t^{{{s}{q}}}")));
    }
    v
}

fn fs3_symbols() -> Vec<String> {
    let mut v = Vec::new();
    for s in Stance::ALL {
        v.extend((1..=5).map(|q| format!("UP_t^{{{s}{q}}}")));
    }
    v
}

impl fmt::Display for FeatureSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FeatureSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FeatureSet::ALL
            .into_iter()
            .find(|fs| fs.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Invalid(format!("unknown feature set `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub user: String,
    pub period: usize,
    pub set_id: FeatureSet,
    pub values: Vec<f64>,
    pub current_stance: Stance,
}

impl FeatureVector {
    pub(crate) fn from_numeric(
        user: &str,
        period: usize,
        set_id: FeatureSet,
        mut numeric: Vec<f64>,
        current_stance: Stance,
    ) -> Self {
        numeric.extend(current_stance.one_hot());
        FeatureVector {
            user: user.to_owned(),
            period,
            set_id,
            values: numeric,
            current_stance,
        }
    }

    /// Values without the trailing stance one-hot.
    pub fn numeric(&self) -> &[f64] {
        &self.values[..self.values.len() - 3]
    }
}

/// Concatenates constituent vectors into FS4 (FS1, FS2, FS3) or FS5 (FS0,
/// FS1, FS2, FS3), keeping a single copy of the stance one-hot.
pub fn assemble_union(parts: &[&FeatureVector], target: FeatureSet) -> Result<FeatureVector> {
    let expected: &[FeatureSet] = match target {
        FeatureSet::Fs4 => &[FeatureSet::Fs1, FeatureSet::Fs2, FeatureSet::Fs3],
        FeatureSet::Fs5 => &[
            FeatureSet::Fs0,
            FeatureSet::Fs1,
            FeatureSet::Fs2,
            FeatureSet::Fs3,
        ],
        other => {
            return Err(Error::Invalid(format!("{other} is not a union feature set")));
        }
    };
    let got: Vec<FeatureSet> = parts.iter().map(|p| p.set_id).collect();
    if got != expected {
        return Err(Error::Mismatch(format!(
            "{target} needs {expected:?}, got {got:?}"
        )));
    }
    let first = parts[0];
    for p in &parts[1..] {
        if p.user != first.user || p.period != first.period || p.current_stance != first.current_stance {
            return Err(Error::Mismatch(format!(
                "({}, {}) vs ({}, {})",
                first.user, first.period, p.user, p.period
            )));
        }
    }
    let numeric: Vec<f64> = parts
        .iter()
        .flat_map(|p| p.numeric().iter().copied())
        .collect();
    Ok(FeatureVector::from_numeric(
        &first.user,
        first.period,
        target,
        numeric,
        first.current_stance,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symbolic_counts() {
        let v = DEFAULT_VOCAB_SIZE;
        assert_eq!(FeatureSet::Fs1.symbolic_count(v), 8);
        assert_eq!(FeatureSet::Fs2.symbolic_count(v), 19);
        assert_eq!(FeatureSet::Fs3.symbolic_count(v), 16);
        assert_eq!(FeatureSet::Fs0.symbolic_count(v), 101);
        assert_eq!(FeatureSet::Fs4.symbolic_count(v), 41);
        assert_eq!(FeatureSet::Fs5.symbolic_count(v), 141);
        let dims: Vec<usize> = FeatureSet::ALL.iter().map(|s| s.dimension(v)).collect();
        assert_eq!(dims, vec![103, 10, 21, 18, 43, 143]);
    }

    #[test]
    fn column_symbols_match_dimensions() {
        let vocab = vec!["brexit".to_owned()];
        for s in FeatureSet::ALL {
            let cols = s.column_symbols(&vocab, DEFAULT_VOCAB_SIZE);
            assert_eq!(cols.len(), s.dimension(DEFAULT_VOCAB_SIZE), "{s}");
        }
        let fs2 = FeatureSet::Fs2.column_symbols(&vocab, 100);
        assert_eq!(fs2[0], "CS_t^A");
        assert_eq!(fs2[3], "R_t^{A1}");
        assert_eq!(FeatureSet::Fs3.column_symbols(&vocab, 100)[13], "UP_t^{P4}");
        assert_eq!(FeatureSet::Fs1.column_symbols(&vocab, 100)[4], "R_t^3");
        assert_eq!(FeatureSet::Fs0.column_symbols(&vocab, 100)[0], "tfidf(brexit)");
    }

    fn fv(set: FeatureSet, period: usize, n: usize) -> FeatureVector {
        FeatureVector::from_numeric("u", period, set, vec![1.0; n], Stance::Pro)
    }

    #[test]
    fn unions() {
        let (a, b, c, d) = (
            fv(FeatureSet::Fs0, 1, 100),
            fv(FeatureSet::Fs1, 1, 7),
            fv(FeatureSet::Fs2, 1, 18),
            fv(FeatureSet::Fs3, 1, 15),
        );
        let fs4 = assemble_union(&[&b, &c, &d], FeatureSet::Fs4).unwrap();
        assert_eq!(fs4.values.len(), 43);
        assert_eq!(&fs4.values[40..], &[0.0, 0.0, 1.0]);
        let fs5 = assemble_union(&[&a, &b, &c, &d], FeatureSet::Fs5).unwrap();
        assert_eq!(fs5.values.len(), 143);
    }

    #[test]
    fn union_of_different_periods_fails() {
        let b = fv(FeatureSet::Fs1, 1, 7);
        let c = fv(FeatureSet::Fs2, 2, 18);
        let d = fv(FeatureSet::Fs3, 1, 15);
        assert!(matches!(
            assemble_union(&[&b, &c, &d], FeatureSet::Fs4),
            Err(Error::Mismatch(_))
        ));
        assert!(assemble_union(&[&b, &d, &c], FeatureSet::Fs4).is_err());
        assert!(assemble_union(&[&b], FeatureSet::Fs1).is_err());
    }

    #[test]
    fn names_parse() {
        for s in FeatureSet::ALL {
            assert_eq!(s.name().parse::<FeatureSet>().unwrap(), s);
        }
        assert!("FS9".parse::<FeatureSet>().is_err());
    }
}
