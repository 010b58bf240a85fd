use std::sync::OnceLock;

use regex::Regex;
use unicode_normalization::char::is_combining_mark;
use unicode_normalization::UnicodeNormalization;

use super::porter;
use super::stopwords::is_stopword;

fn url_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?i)\b(?:https?://|www\.)\S*").unwrap())
}

fn tag_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"[#@][\w']*").unwrap())
}

fn hashtag_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"#(\w+)").unwrap())
}

/// Lowercased hashtags (without `#`) in order of occurrence.
pub fn extract_hashtags(text: &str) -> Vec<String> {
    hashtag_re()
        .captures_iter(text)
        .map(|c| c[1].to_lowercase())
        .collect()
}

/// Lowercase, strip URLs, hashtags, mentions, diacritics and punctuation,
/// drop stopwords, then Porter-stem. Rare-word filtering is a vocabulary
/// concern and is not applied here.
pub fn preprocess(text: &str) -> Vec<String> {
    let text = url_re().replace_all(text, " ");
    let text = tag_re().replace_all(&text, " ");
    let folded: String = text
        .to_lowercase()
        .nfd()
        .filter(|c| !is_combining_mark(*c))
        .collect();
    folded
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty() && !is_stopword(t))
        .map(porter::stem)
        .collect()
}
