use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{FeatureSet, FeatureVector};
use crate::error::{Error, Result};
use crate::stance::Stance;

/// All vectors of one feature set, with column symbols.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    pub set_id: FeatureSet,
    pub columns: Vec<String>,
    pub vectors: Vec<FeatureVector>,
}

impl FeatureMatrix {
    pub fn new(set_id: FeatureSet, columns: Vec<String>, vectors: Vec<FeatureVector>) -> Self {
        debug_assert!(vectors.iter().all(|v| v.values.len() == columns.len()));
        FeatureMatrix {
            set_id,
            columns,
            vectors,
        }
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.columns.len()
    }

    /// `user  period  set_id  f_0 ... f_{d-1}`, values in shortest
    /// round-trip form.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("user\tperiod\tset_id");
        for i in 0..self.columns.len() {
            let _ = write!(out, "\tf_{i}");
        }
        out.push('\n');
        for v in &self.vectors {
            let _ = write!(out, "{}\t{}\t{}", v.user, v.period, v.set_id);
            for x in &v.values {
                let _ = write!(out, "\t{x}");
            }
            out.push('\n');
        }
        out
    }

    /// `column  symbol` per position.
    pub fn schema_tsv(&self) -> String {
        let mut out = String::from("column\tsymbol\n");
        for (i, s) in self.columns.iter().enumerate() {
            let _ = writeln!(out, "f_{i}\t{s}");
        }
        out
    }

    /// Reads a matrix back from [`to_tsv`](Self::to_tsv) and
    /// [`schema_tsv`](Self::schema_tsv) output.
    pub fn from_tsv(data: &str, schema: &str) -> Result<Self> {
        let columns: Vec<String> = schema
            .lines()
            .skip(1)
            .filter(|l| !l.trim().is_empty())
            .map(|l| {
                l.split_once('\t')
                    .map(|(_, s)| s.to_owned())
                    .ok_or_else(|| Error::Invalid(format!("bad schema line `{l}`")))
            })
            .collect::<Result<_>>()?;
        let mut lines = data.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Invalid("empty feature table".into()))?;
        let width = header.split('\t').count();
        if width != columns.len() + 3 {
            return Err(Error::Mismatch(format!(
                "table has {} value columns, schema has {}",
                width.saturating_sub(3),
                columns.len()
            )));
        }
        let mut vectors = Vec::new();
        let mut set_id = None;
        for (n, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let bad = || Error::Invalid(format!("feature table row {}", n + 2));
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != width {
                return Err(bad());
            }
            let period: usize = fields[1].parse().map_err(|_| bad())?;
            let set: FeatureSet = fields[2].parse()?;
            if *set_id.get_or_insert(set) != set {
                return Err(Error::Mismatch("mixed feature sets in one table".into()));
            }
            let values: Vec<f64> = fields[3..]
                .iter()
                .map(|f| f.parse::<f64>().map_err(|_| bad()))
                .collect::<Result<_>>()?;
            let hot = &values[values.len() - 3..];
            let stance = hot
                .iter()
                .position(|&x| x == 1.0)
                .filter(|_| hot.iter().sum::<f64>() == 1.0)
                .ok_or_else(bad)?;
            vectors.push(FeatureVector {
                user: fields[0].to_owned(),
                period,
                set_id: set,
                values,
                current_stance: Stance::from_index(stance).ok_or_else(bad)?,
            });
        }
        let set_id = match set_id {
            Some(s) => s,
            None => FeatureSet::ALL
                .into_iter()
                .find(|s| {
                    columns
                        .first()
                        .is_some_and(|c| s.column_symbols(&[], 0).first() == Some(c))
                })
                .unwrap_or(FeatureSet::Fs1),
        };
        Ok(FeatureMatrix {
            set_id,
            columns,
            vectors,
        })
    }
}
