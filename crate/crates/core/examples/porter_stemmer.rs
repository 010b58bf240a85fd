//! Text preprocessing: lowercasing, tokenizing, stop-word removal and
//! Porter stemming.
//!
//! cargo run --example porter_stemmer -- "Some text to preprocess"

use stancecast::stance::{extract_hashtags, porter::stem, preprocess};

fn main() {
    let text = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "The negotiations were generalizing happily about #VoteLeave and relational hopefulness".into());
    println!("input:    {text}");
    println!("hashtags: {:?}", extract_hashtags(&text));
    println!("tokens:   {:?}", preprocess(&text));
    for w in ["caresses", "ponies", "agreed", "hopping", "relational", "generalization", "electricity", "adjustable"] {
        println!("  {w:<16} {}", stem(w));
    }
}
