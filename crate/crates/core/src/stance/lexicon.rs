use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::text::extract_hashtags;
use crate::error::{Error, Result};

const DEFAULT_PRO: [&str; 19] = [
    "voteleave",
    "inorout",
    "voteout",
    "takecontrol",
    "borisjohnson",
    "lexit",
    "independenceday",
    "ivotedleave",
    "projectfear",
    "britain",
    "boris",
    "go",
    "projecthope",
    "takebackcontrol",
    "labourleave",
    "no2eu",
    "betteroffout",
    "june23",
    "democracy",
];

const DEFAULT_AGAINST: [&str; 9] = [
    "strongerin",
    "intogether",
    "infor",
    "votein",
    "libdems",
    "voting",
    "incrowd",
    "bremain",
    "greenerin",
];

/// How a user's hashtags are tallied for the leave score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HashtagCounting {
    #[default]
    Occurrences,
    Distinct,
}

/// Disjoint sets of lowercase hashtags (stored without `#`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HashtagLexicon {
    pro: BTreeSet<String>,
    against: BTreeSet<String>,
}

impl Default for HashtagLexicon {
    fn default() -> Self {
        HashtagLexicon::new(DEFAULT_PRO, DEFAULT_AGAINST).expect("default lists are disjoint")
    }
}

fn normalize(tag: &str) -> String {
    tag.trim().trim_start_matches('#').to_lowercase()
}

impl HashtagLexicon {
    pub fn new<I, J, S, T>(pro: I, against: J) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        J: IntoIterator<Item = T>,
        S: AsRef<str>,
        T: AsRef<str>,
    {
        let pro: BTreeSet<String> = pro.into_iter().map(|s| normalize(s.as_ref())).collect();
        let against: BTreeSet<String> =
            against.into_iter().map(|s| normalize(s.as_ref())).collect();
        if pro.is_empty() || against.is_empty() {
            return Err(Error::Invalid("lexicon sections must be non-empty".into()));
        }
        if let Some(tag) = pro.intersection(&against).next() {
            return Err(Error::Invalid(format!(
                "hashtag #{tag} appears in both lexicon sections"
            )));
        }
        Ok(HashtagLexicon { pro, against })
    }

    pub fn pro(&self) -> &BTreeSet<String> {
        &self.pro
    }

    pub fn against(&self) -> &BTreeSet<String> {
        &self.against
    }

    pub fn swapped(&self) -> Self {
        HashtagLexicon {
            pro: self.against.clone(),
            against: self.pro.clone(),
        }
    }

    /// Parses the two-section text format:
    ///
    /// ```text
    /// [pro]
    /// #voteleave
    /// [against]
    /// #strongerin
    /// ```
    pub fn parse(text: &str) -> Result<Self> {
        let mut pro = Vec::new();
        let mut against = Vec::new();
        let mut section: Option<&mut Vec<String>> = None;
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            match line.to_ascii_lowercase().as_str() {
                "[pro]" => section = Some(&mut pro),
                "[against]" => section = Some(&mut against),
                _ => match section.as_deref_mut() {
                    Some(list) => list.push(line.to_owned()),
                    None => {
                        return Err(Error::Invalid(format!(
                            "lexicon line {}: hashtag outside a [pro]/[against] section",
                            n + 1
                        )))
                    }
                },
            }
        }
        HashtagLexicon::new(pro, against)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("[pro]\n");
        for t in &self.pro {
            let _ = writeln!(out, "#{t}");
        }
        out.push_str("[against]\n");
        for t in &self.against {
            let _ = writeln!(out, "#{t}");
        }
        out
    }

    /// (pro hits, against hits) over a user's raw documents.
    pub fn count<'a, I>(&self, documents: I, counting: HashtagCounting) -> (usize, usize)
    where
        I: IntoIterator<Item = &'a str>,
    {
        let tags = documents.into_iter().flat_map(extract_hashtags);
        let tags: Vec<String> = match counting {
            HashtagCounting::Occurrences => tags.collect(),
            HashtagCounting::Distinct => tags.collect::<BTreeSet<_>>().into_iter().collect(),
        };
        let pro = tags.iter().filter(|t| self.pro.contains(*t)).count();
        let against = tags.iter().filter(|t| self.against.contains(*t)).count();
        (pro, against)
    }
}

/// Pro-hashtag count minus against-hashtag count over the user's raw texts.
pub fn leave_score<'a, I>(documents: I, lexicon: &HashtagLexicon, counting: HashtagCounting) -> i64
where
    I: IntoIterator<Item = &'a str>,
{
    let (pro, against) = lexicon.count(documents, counting);
    pro as i64 - against as i64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_file_matches_defaults() {
        let text = include_str!("../../data/lexicon.txt");
        assert_eq!(HashtagLexicon::parse(text).unwrap(), HashtagLexicon::default());
    }

    #[test]
    fn default_lists() {
        let lex = HashtagLexicon::default();
        assert_eq!(lex.pro().len(), 19);
        assert_eq!(lex.against().len(), 9);
        assert!(lex.pro().contains("takebackcontrol"));
        assert!(lex.against().contains("bremain"));
    }

    #[test]
    fn score_examples() {
        let lex = HashtagLexicon::default();
        let occ = HashtagCounting::Occurrences;
        assert_eq!(
            leave_score(["#voteleave #VoteOut", "#lexit #strongerin"], &lex, occ),
            2
        );
        assert_eq!(leave_score(["nothing to see #cats"], &lex, occ), 0);
        assert_eq!(
            leave_score(["#bremain #votein #voteleave #boris"], &lex, occ),
            0
        );
    }

    #[test]
    fn distinct_counting() {
        let lex = HashtagLexicon::default();
        let docs = ["#voteleave #voteleave #voteleave #strongerin"];
        assert_eq!(leave_score(docs, &lex, HashtagCounting::Occurrences), 2);
        assert_eq!(leave_score(docs, &lex, HashtagCounting::Distinct), 0);
    }

    #[test]
    fn antisymmetric_under_swap() {
        let lex = HashtagLexicon::default();
        let docs = ["#voteleave #go #go #bremain", "#libdems x #june23"];
        let occ = HashtagCounting::Occurrences;
        assert_eq!(
            leave_score(docs, &lex, occ),
            -leave_score(docs, &lex.swapped(), occ)
        );
    }

    #[test]
    fn file_format_round_trip() {
        let lex = HashtagLexicon::default();
        assert_eq!(HashtagLexicon::parse(&lex.to_text()).unwrap(), lex);
    }

    #[test]
    fn rejects_overlap_and_empty() {
        assert!(HashtagLexicon::parse("[pro]\n#a\n[against]\n#A\n").is_err());
        assert!(HashtagLexicon::parse("[pro]\n#a\n").is_err());
        assert!(HashtagLexicon::parse("#a\n[pro]\n").is_err());
    }
}
