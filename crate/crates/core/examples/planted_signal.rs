//! Planted-signal experiment: on a synthetic forum where the next stance is
//! the majority stance of the threads a user joined, thread composition (FS3)
//! should predict far better than activity counts (FS1).
//!
//! cargo run --release --example planted_signal -- [users] [search_iters] [seed]

use std::time::Instant;

use stancecast::corpus::{generate_synthetic_corpus, SynthConfig, ThreadForest};
use stancecast::features::{FeatureConfig, FeatureExtractor, FeatureSet};
use stancecast::learning::{evaluate, ClassifierSpec, CvConfig, Dataset, Family};

fn main() -> stancecast::Result<()> {
    let args: Vec<u64> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let users = args.first().copied().unwrap_or(2000) as usize;
    let search_iters = args.get(1).copied().unwrap_or(3) as usize;
    let seed = args.get(2).copied().unwrap_or(7);

    let config = SynthConfig {
        users,
        periods: 6,
        threads_per_period: users / 5,
        homophily: 1.0,
        ..SynthConfig::default()
    };
    let started = Instant::now();
    let corpus = generate_synthetic_corpus(&config, seed)?;
    let forest = ThreadForest::build(corpus.entries.clone());
    let extractor = FeatureExtractor::new(
        &forest,
        &corpus.partition,
        &corpus.ground_truth,
        FeatureConfig::default(),
    )?;
    let datasets = [FeatureSet::Fs1, FeatureSet::Fs3]
        .into_iter()
        .map(|set| Ok(Dataset::new(&extractor.extract(set)?, &corpus.ground_truth)))
        .collect::<stancecast::Result<Vec<_>>>()?;
    println!(
        "{} entries, {} instances per feature set ({:.1?})",
        forest.len(),
        datasets[0].len(),
        started.elapsed()
    );

    let specs = [Family::RandomForest, Family::GradientBoosting].map(ClassifierSpec::default_for);
    let cv = CvConfig {
        search_iters,
        seed,
        ..CvConfig::default()
    };
    let report = evaluate(&datasets, &specs, &cv, false)?;
    for r in &report.results {
        println!(
            "{:<18} {}  macro-F1 {:.3} ± {:.3}",
            r.family.name(),
            r.feature_set,
            r.macro_f1.mean,
            r.macro_f1.std
        );
    }
    println!("total {:.1?}", started.elapsed());
    Ok(())
}
