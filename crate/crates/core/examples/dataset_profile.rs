//! Monthly volume, author roles and the activity CCDF of a dump, or of a
//! synthetic forum when no path is given.
//!
//! cargo run --release --example dataset_profile -- [dump.jsonl]

use std::fs::File;
use std::io::BufReader;

use stancecast::corpus::{generate_synthetic_corpus, parse_entries, SynthConfig, ThreadForest};
use stancecast::pipeline::profile_corpus;

fn main() -> stancecast::Result<()> {
    let entries = match std::env::args().nth(1) {
        Some(path) => parse_entries(BufReader::new(File::open(path)?))?.entries,
        None => generate_synthetic_corpus(&SynthConfig::default(), 1)?.entries,
    };
    let forest = ThreadForest::build(entries);
    let p = profile_corpus(&forest);
    println!(
        "{} entries: {} posts, {} comments ({:.1}% comments), {} authors",
        p.entries,
        p.posts,
        p.comments,
        100.0 * p.comment_share,
        p.authors
    );
    let r = &p.roles;
    let total = r.total().max(1) as f64;
    println!(
        "roles: initiator only {:.1}%, both {:.1}%, commenter only {:.1}%",
        100.0 * r.initiator_only as f64 / total,
        100.0 * r.both as f64 / total,
        100.0 * r.commenter_only as f64 / total
    );
    print!("\nmonthly volume\n{}", p.monthly_tsv());
    println!("\nactivity CCDF (first rows)");
    for line in p.ccdf_tsv().lines().take(10) {
        println!("{line}");
    }
    Ok(())
}
