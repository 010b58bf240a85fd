//! Nested cross-validation on a synthetic forum whose stances carry no
//! signal: every family should land near the 1/3 chance level.
//!
//! cargo run --release --example nested_cv -- [seed] [search_iters]

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use stancecast::corpus::{generate_synthetic_corpus, SynthConfig, ThreadForest};
use stancecast::features::{FeatureConfig, FeatureExtractor, FeatureSet};
use stancecast::learning::{nested_cv, ClassifierSpec, CvConfig, Dataset, Family};

fn main() -> stancecast::Result<()> {
    let args: Vec<u64> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let seed = args.first().copied().unwrap_or(1);
    let search_iters = args.get(1).copied().unwrap_or(20) as usize;

    let config = SynthConfig {
        users: 360,
        periods: 5,
        threads_per_period: 72,
        homophily: 0.0,
        ..SynthConfig::default()
    };
    let corpus = generate_synthetic_corpus(&config, seed)?;
    let forest = ThreadForest::build(corpus.entries.clone());
    let fx = FeatureExtractor::new(&forest, &corpus.partition, &corpus.ground_truth, FeatureConfig::default())?;
    let mut data = Dataset::new(&fx.extract(FeatureSet::Fs4)?, &corpus.ground_truth);
    data.instances.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    data.instances.truncate(1000);
    println!("{} instances of {}", data.len(), data.set_id);

    let cv = CvConfig {
        search_iters,
        seed,
        ..CvConfig::default()
    };
    for family in Family::ALL {
        let started = Instant::now();
        let out = nested_cv(&data.instances, &ClassifierSpec::default_for(family), &cv)?;
        println!(
            "{:<18} macro-F1 {:.3} ± {:.3}  accuracy {:.3}  ({:.1?})",
            family.name(),
            out.mean.f1,
            out.std.f1,
            out.mean.accuracy,
            started.elapsed()
        );
    }
    Ok(())
}
