//! The whole staged pipeline in a temporary directory: synthesize a forum,
//! ingest, profile, label, extract features, evaluate and report. Running a
//! stage twice reuses its cached artifacts.
//!
//! cargo run --release --example pipeline -- [seed]

use stancecast::corpus::SynthConfig;
use stancecast::features::FeatureSet;
use stancecast::learning::Family;
use stancecast::pipeline::{run_stage, LabelSource, PipelineConfig, Stage};

fn main() -> stancecast::Result<()> {
    let seed = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(11);
    let dir = tempfile::tempdir()?;

    let mut bootstrap = PipelineConfig::with_seed(seed);
    bootstrap.output_dir = dir.path().to_path_buf();
    bootstrap.synth = SynthConfig {
        users: 300,
        periods: 4,
        threads_per_period: 60,
        ..SynthConfig::default()
    };
    println!("synth: {}", run_stage(Stage::Synth, &bootstrap)?.summary);

    let mut config = PipelineConfig::load(&dir.path().join("synth/pipeline.toml"))?;
    config.labeler.source = LabelSource::Model;
    config.learning.families = vec![Family::LogisticRegression, Family::RandomForest];
    config.learning.feature_sets = vec![FeatureSet::Fs1, FeatureSet::Fs3, FeatureSet::Fs4];
    config.learning.outer_k = 5;
    config.learning.inner_k = 3;
    config.learning.search_iters = 4;

    for stage in [Stage::Ingest, Stage::Profile, Stage::Label, Stage::Features, Stage::Evaluate] {
        let out = run_stage(stage, &config)?;
        println!("{stage}: {}", out.summary);
    }
    let again = run_stage(Stage::Features, &config)?;
    println!("features again: reused = {}", again.reused);
    print!("\n{}", run_stage(Stage::Report, &config)?.summary);
    Ok(())
}
