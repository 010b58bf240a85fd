//! Rebuilds threads from a flat JSON-lines dump and prints their diffusions.
//!
//! cargo run --example thread_forest -- [dump.jsonl]
//!
//! Without an argument a small built-in dump is used; it includes an orphan
//! and a comment whose timestamp precedes its parent.

use std::fs::File;
use std::io::{BufRead, BufReader, Cursor};

use stancecast::corpus::{parse_entries, ThreadForest};

const SAMPLE: &str = r#"{"id": "t3_a", "author": "ann", "body": "Should we leave?", "created_utc": 100, "parent_id": null}
{"id": "t1_b", "author": "bob", "body": "Yes", "created_utc": 110, "parent_id": "t3_a"}
{"id": "t1_c", "author": "cy", "body": "No way", "created_utc": 105, "parent_id": "t1_b"}
{"id": "t1_d", "author": "ann", "body": "Why not?", "created_utc": 130, "parent_id": "t1_c"}
{"id": "t1_e", "author": "[deleted]", "body": "[removed]", "created_utc": 140, "parent_id": "t3_a"}
{"id": "t1_f", "author": "dee", "body": "lost context", "created_utc": 150, "parent_id": "t1_zz"}
not json at all
"#;

fn main() -> stancecast::Result<()> {
    let reader: Box<dyn BufRead> = match std::env::args().nth(1) {
        Some(path) => Box::new(BufReader::new(File::open(&path)?)),
        None => Box::new(Cursor::new(SAMPLE)),
    };
    let parsed = parse_entries(reader)?;
    println!("{} entries, {} malformed lines skipped", parsed.entries.len(), parsed.malformed);

    let forest = ThreadForest::build(parsed.entries);
    let d = forest.diagnostics();
    println!(
        "{} threads, orphans {:?}, {} clamped timestamps",
        forest.root_indices().len(),
        d.orphans,
        d.clamped
    );
    for root in forest.roots().take(20) {
        let idx = forest.index_of(root).expect("root exists");
        println!("\n{root}: {} replies", forest.descendants(idx));
        for diffusion in forest.extract_diffusions(root)? {
            println!("  {}", diffusion.entries.join(" -> "));
        }
    }
    Ok(())
}
