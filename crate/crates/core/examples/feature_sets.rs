//! Extracts FS0..FS5 from a synthetic forum and prints one user's vectors.
//!
//! cargo run --release --example feature_sets -- [seed]

use stancecast::corpus::{generate_synthetic_corpus, SynthConfig, ThreadForest};
use stancecast::features::{FeatureConfig, FeatureExtractor, FeatureSet};

fn main() -> stancecast::Result<()> {
    let seed = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(5);
    let corpus = generate_synthetic_corpus(
        &SynthConfig {
            users: 120,
            periods: 3,
            threads_per_period: 25,
            tweet_users: 0,
            ..SynthConfig::default()
        },
        seed,
    )?;
    let forest = ThreadForest::build(corpus.entries.clone());
    let extractor = FeatureExtractor::new(
        &forest,
        &corpus.partition,
        &corpus.ground_truth,
        FeatureConfig::default(),
    )?;
    for set in FeatureSet::ALL {
        let m = extractor.extract(set)?;
        println!(
            "{set}: {} features ({} columns with the one-hot), {} user-periods",
            set.symbolic_count(extractor.config().vocab_size),
            m.dimension(),
            m.len()
        );
    }

    let sample = extractor.index().users(1).next().expect("someone is active");
    println!("\n{sample} in period 1:");
    for set in [FeatureSet::Fs1, FeatureSet::Fs2, FeatureSet::Fs3] {
        let v = extractor.vector(sample, 1, set)?;
        let cols = set.column_symbols(extractor.tfidf().vocabulary(), extractor.config().vocab_size);
        let shown: Vec<String> = cols.iter().zip(&v.values).map(|(c, x)| format!("{c}={x}")).collect();
        println!("  {set}: {}", shown.join(" "));
    }
    let fs0 = extractor.fs0(sample, 1)?;
    let top: Vec<String> = extractor
        .tfidf()
        .vocabulary()
        .iter()
        .zip(fs0.numeric())
        .filter(|(_, &x)| x > 0.0)
        .take(8)
        .map(|(w, x)| format!("{w}={x:.2}"))
        .collect();
    println!("  FS0 (non-zero, first 8): {}", top.join(" "));
    Ok(())
}
