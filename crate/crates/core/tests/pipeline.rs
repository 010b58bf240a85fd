//! Stage caching, artifact handling and CLI exit codes.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};

use stancecast::corpus::SynthConfig;
use stancecast::features::FeatureSet;
use stancecast::learning::Family;
use stancecast::pipeline::{load_report, run_stage, LabelSource, PipelineConfig, Stage};
use stancecast::Error;

fn small_synth(dir: &Path, seed: u64) -> PipelineConfig {
    let mut c = PipelineConfig::with_seed(seed);
    c.output_dir = dir.to_path_buf();
    c.synth = SynthConfig {
        users: 90,
        periods: 3,
        threads_per_period: 18,
        tweet_users: 120,
        ..SynthConfig::default()
    };
    run_stage(Stage::Synth, &c).unwrap();
    let mut run = PipelineConfig::load(&dir.join("synth/pipeline.toml")).unwrap();
    run.learning.families = vec![Family::Knn, Family::NaiveBayesGaussian];
    run.learning.feature_sets = vec![FeatureSet::Fs1, FeatureSet::Fs3];
    run.learning.outer_k = 3;
    run.learning.inner_k = 2;
    run.learning.search_iters = 2;
    run
}

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_stancecast"));
    c.env("STANCECAST_LOG", "error").stdout(Stdio::null()).stderr(Stdio::null());
    c
}

#[test]
fn second_run_reuses_every_stage() {
    let tmp = tempfile::tempdir().unwrap();
    let config = small_synth(tmp.path(), 1);
    let stages = [Stage::Ingest, Stage::Profile, Stage::Label, Stage::Features, Stage::Evaluate];
    for s in stages {
        assert!(!run_stage(s, &config).unwrap().reused, "{s} ran from scratch");
    }
    let report = fs::read(config.output_dir.join("report.json")).unwrap();
    for s in stages {
        assert!(run_stage(s, &config).unwrap().reused, "{s} should be cached");
    }
    assert_eq!(fs::read(config.output_dir.join("report.json")).unwrap(), report);
}

#[test]
fn seed_change_invalidates_labeling_and_downstream() {
    let tmp = tempfile::tempdir().unwrap();
    let mut config = small_synth(tmp.path(), 2);
    config.labeler.source = LabelSource::Model;
    for s in [Stage::Ingest, Stage::Label, Stage::Features, Stage::Evaluate] {
        run_stage(s, &config).unwrap();
    }
    config.seed += 1;
    assert!(run_stage(Stage::Ingest, &config).unwrap().reused);
    assert!(!run_stage(Stage::Label, &config).unwrap().reused);
    assert!(!run_stage(Stage::Features, &config).unwrap().reused, "upstream key changed");
    assert!(!run_stage(Stage::Evaluate, &config).unwrap().reused);
    assert_eq!(load_report(&config.output_dir).unwrap().seed, config.seed);
}

#[test]
fn edited_input_invalidates_ingest() {
    let tmp = tempfile::tempdir().unwrap();
    let config = small_synth(tmp.path(), 3);
    run_stage(Stage::Ingest, &config).unwrap();
    let input = config.input.clone().unwrap();
    let mut text = fs::read_to_string(&input).unwrap();
    text.push_str("{\"id\": \"extra\", \"author\": \"late\", \"body\": \"hi\", \"created_utc\": 1451606500, \"parent_id\": null}\n");
    fs::write(&input, text).unwrap();
    let out = run_stage(Stage::Ingest, &config).unwrap();
    assert!(!out.reused);
}

#[test]
fn evaluate_before_features_names_the_missing_stage() {
    let tmp = tempfile::tempdir().unwrap();
    let config = small_synth(tmp.path(), 4);
    run_stage(Stage::Ingest, &config).unwrap();
    match run_stage(Stage::Evaluate, &config) {
        Err(Error::MissingArtifact(path, stage)) => {
            assert_eq!(stage, "features");
            assert!(path.ends_with("features_FS1.tsv"));
        }
        other => panic!("expected a missing artifact, got {other:?}"),
    }
    assert!(!config.output_dir.join("report.json").exists());
}

#[test]
fn profile_counts_match_the_corpus() {
    let tmp = tempfile::tempdir().unwrap();
    let config = small_synth(tmp.path(), 5);
    run_stage(Stage::Ingest, &config).unwrap();
    run_stage(Stage::Profile, &config).unwrap();
    let p: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(config.output_dir.join("profile.json")).unwrap()).unwrap();
    let lines = fs::read_to_string(config.input.as_ref().unwrap()).unwrap().lines().count();
    assert_eq!(p["entries"].as_u64().unwrap() as usize, lines);
    assert_eq!(
        p["posts"].as_u64().unwrap() + p["comments"].as_u64().unwrap(),
        p["entries"].as_u64().unwrap()
    );
    let roles = &p["roles"];
    let total: u64 = ["initiator_only", "both", "commenter_only"].iter().map(|k| roles[k].as_u64().unwrap()).sum();
    assert_eq!(total, p["authors"].as_u64().unwrap());
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("pipeline.toml");
    fs::write(&path, body).unwrap();
    path
}

#[test]
fn cli_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let missing = bin().args(["--config", "/nonexistent/pipeline.toml", "ingest"]).status().unwrap();
    assert_eq!(missing.code(), Some(2));

    let no_seed = write_config(tmp.path(), "input = \"x.jsonl\"\n");
    assert_eq!(bin().arg("-c").arg(&no_seed).arg("ingest").status().unwrap().code(), Some(2));

    let bad = write_config(tmp.path(), "seed = 1\n[learning]\nouter_k = 1\n");
    assert_eq!(bin().arg("-c").arg(&bad).arg("evaluate").status().unwrap().code(), Some(2));

    let ok = write_config(
        tmp.path(),
        "seed = 3\n[synth]\nusers = 40\nperiods = 2\nthreads_per_period = 8\ntweet_users = 10\n",
    );
    assert_eq!(bin().arg("-c").arg(&ok).arg("synth").status().unwrap().code(), Some(0));
    let generated = tmp.path().join("out/synth/pipeline.toml");
    assert!(generated.is_file());

    let early = bin().stderr(Stdio::piped()).arg("-c").arg(&generated).arg("evaluate").output().unwrap();
    assert_eq!(early.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&early.stderr).contains("features"));

    assert_eq!(bin().arg("-c").arg(&generated).arg("ingest").status().unwrap().code(), Some(0));
    let overridden = bin()
        .arg("-c")
        .arg(&generated)
        .args(["--seed", "9", "--output-dir"])
        .arg(tmp.path().join("other"))
        .arg("ingest")
        .status()
        .unwrap();
    assert_eq!(overridden.code(), Some(0));
    assert!(tmp.path().join("other/corpus.json").is_file());
}
