use std::collections::BTreeSet;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::entry::Entry;
use crate::error::{Error, Result};

/// Strictly increasing cutoffs `o_0 < o_1 < ... < o_K` defining the K
/// half-open periods `[o_j, o_{j+1})`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<i64>", into = "Vec<i64>")]
pub struct TimePartition {
    cutoffs: Vec<i64>,
}

impl TryFrom<Vec<i64>> for TimePartition {
    type Error = Error;

    fn try_from(cutoffs: Vec<i64>) -> Result<Self> {
        TimePartition::new(cutoffs)
    }
}

impl From<TimePartition> for Vec<i64> {
    fn from(p: TimePartition) -> Self {
        p.cutoffs
    }
}

/// Start dates of the fifteen Brexit-timeline periods plus the dataset end.
pub const BREXIT_TIMELINE: [&str; 16] = [
    "2015-11-16",
    "2016-06-25",
    "2016-07-14",
    "2016-12-08",
    "2017-01-27",
    "2017-03-30",
    "2017-06-20",
    "2018-07-09",
    "2018-09-22",
    "2018-11-16",
    "2018-11-26",
    "2019-01-16",
    "2019-03-15",
    "2019-03-22",
    "2019-03-30",
    "2019-04-05",
];

impl TimePartition {
    pub fn new(cutoffs: Vec<i64>) -> Result<Self> {
        if cutoffs.is_empty() {
            return Err(Error::Partition("empty cutoff list".into()));
        }
        if cutoffs.len() < 2 {
            return Err(Error::Partition(
                "at least two cutoffs are needed to define a period".into(),
            ));
        }
        if let Some(w) = cutoffs.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::Partition(format!(
                "cutoffs must be strictly increasing ({} >= {})",
                w[0], w[1]
            )));
        }
        Ok(TimePartition { cutoffs })
    }

    /// Cutoffs from ISO-8601 dates (UTC midnight) or RFC 3339 timestamps.
    pub fn from_iso_dates<S: AsRef<str>>(dates: &[S]) -> Result<Self> {
        let cutoffs = dates
            .iter()
            .map(|d| {
                let d = d.as_ref();
                NaiveDate::parse_from_str(d, "%Y-%m-%d")
                    .map(|day| day.and_hms_opt(0, 0, 0).unwrap().and_utc().timestamp())
                    .or_else(|_| chrono::DateTime::parse_from_rfc3339(d).map(|t| t.timestamp()))
                    .map_err(|e| Error::Partition(format!("bad date `{d}`: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        TimePartition::new(cutoffs)
    }

    pub fn brexit_timeline() -> Self {
        TimePartition::from_iso_dates(&BREXIT_TIMELINE).expect("static dates are valid")
    }

    /// `count` periods of `length` seconds starting at `start`.
    pub fn uniform(start: i64, length: i64, count: usize) -> Result<Self> {
        if length <= 0 {
            return Err(Error::Partition("period length must be positive".into()));
        }
        TimePartition::new((0..=count as i64).map(|k| start + k * length).collect())
    }

    pub fn cutoffs(&self) -> &[i64] {
        &self.cutoffs
    }

    pub fn num_periods(&self) -> usize {
        self.cutoffs.len() - 1
    }

    pub fn period_of(&self, timestamp: i64) -> Option<usize> {
        if timestamp < self.cutoffs[0] || timestamp >= *self.cutoffs.last().unwrap() {
            return None;
        }
        // Index of the last cutoff <= timestamp.
        Some(self.cutoffs.partition_point(|&c| c <= timestamp) - 1)
    }

    pub fn to_iso_dates(&self) -> Vec<String> {
        self.cutoffs
            .iter()
            .map(|&c| {
                chrono::DateTime::from_timestamp(c, 0)
                    .map(|d| d.format("%Y-%m-%d").to_string())
                    .unwrap_or_else(|| c.to_string())
            })
            .collect()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeriodAssignment {
    /// Entry ids per period.
    pub periods: Vec<BTreeSet<String>>,
    /// Entries before `o_0` or at/after `o_K`.
    pub discarded: usize,
}

pub fn partition_periods(entries: &[Entry], partition: &TimePartition) -> PeriodAssignment {
    let mut out = PeriodAssignment {
        periods: vec![BTreeSet::new(); partition.num_periods()],
        discarded: 0,
    };
    for e in entries {
        match partition.period_of(e.timestamp) {
            Some(p) => {
                out.periods[p].insert(e.id.clone());
            }
            None => out.discarded += 1,
        }
    }
    out
}
