use std::collections::HashSet;
use std::io::BufRead;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::Result;

/// Reserved author for entries whose author was deleted or removed.
///
/// These entries stay in the forest so reply counts are right, but they
/// never produce feature instances.
pub const DELETED_AUTHOR: &str = "[deleted]";

pub fn is_deleted_author(author: &str) -> bool {
    author == DELETED_AUTHOR
}

/// One post or comment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Entry {
    pub id: String,
    pub author: String,
    #[serde(rename = "body")]
    pub content: String,
    #[serde(rename = "created_utc")]
    pub timestamp: i64,
    pub parent_id: Option<String>,
}

impl Entry {
    pub fn new(
        id: impl Into<String>,
        author: impl Into<String>,
        content: impl Into<String>,
        timestamp: i64,
        parent_id: Option<&str>,
    ) -> Self {
        Entry {
            id: id.into(),
            author: author.into(),
            content: content.into(),
            timestamp,
            parent_id: parent_id.map(str::to_owned),
        }
    }

    pub fn is_deleted(&self) -> bool {
        is_deleted_author(&self.author)
    }
}

#[derive(Debug, Default, Clone)]
pub struct ParseReport {
    pub entries: Vec<Entry>,
    pub malformed: usize,
    pub duplicates: usize,
}

impl ParseReport {
    pub fn warnings(&self) -> usize {
        self.malformed + self.duplicates
    }
}

/// Parses line-delimited JSON records.
///
/// Malformed records (bad JSON, missing id/author/created_utc) are counted and
/// skipped. A duplicate id keeps the first record. Empty, `[deleted]` and
/// `[removed]` authors map to [`DELETED_AUTHOR`].
pub fn parse_entries<R: BufRead>(reader: R) -> Result<ParseReport> {
    let mut report = ParseReport::default();
    let mut seen = HashSet::new();
    for line in reader.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        match parse_record(&line) {
            Some(entry) => {
                if seen.insert(entry.id.clone()) {
                    report.entries.push(entry);
                } else {
                    log::warn!("duplicate entry id `{}` ignored", entry.id);
                    report.duplicates += 1;
                }
            }
            None => report.malformed += 1,
        }
    }
    Ok(report)
}

fn parse_record(line: &str) -> Option<Entry> {
    let value: Value = serde_json::from_str(line).ok()?;
    let obj = value.as_object()?;

    let id = scalar_string(obj.get("id")?)?;
    if id.is_empty() {
        return None;
    }
    let author = match obj.get("author")? {
        Value::Null => DELETED_AUTHOR.to_owned(),
        v => {
            let a = v.as_str()?.trim();
            if a.is_empty() || a == "[deleted]" || a == "[removed]" {
                DELETED_AUTHOR.to_owned()
            } else {
                a.to_owned()
            }
        }
    };
    let content = ["body", "text", "selftext"]
        .iter()
        .find_map(|k| obj.get(*k).and_then(Value::as_str))
        .unwrap_or_default()
        .to_owned();
    let timestamp = timestamp_of(obj.get("created_utc")?)?;
    let parent_id = match obj.get("parent_id") {
        None | Some(Value::Null) => None,
        Some(v) => Some(scalar_string(v)?).filter(|p| !p.is_empty()),
    };

    Some(Entry {
        id,
        author,
        content,
        timestamp,
        parent_id,
    })
}

fn scalar_string(v: &Value) -> Option<String> {
    match v {
        Value::String(s) => Some(s.clone()),
        Value::Number(n) => Some(n.to_string()),
        _ => None,
    }
}

// Dumps in the wild carry integers, floats or numeric strings here.
fn timestamp_of(v: &Value) -> Option<i64> {
    match v {
        Value::Number(n) => n.as_i64().or_else(|| n.as_f64().map(|f| f as i64)),
        Value::String(s) => s
            .parse::<i64>()
            .ok()
            .or_else(|| s.parse::<f64>().ok().map(|f| f as i64)),
        _ => None,
    }
}
