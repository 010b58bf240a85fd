//! The pipeline stages and their on-disk artifacts.
//!
//! Every stage writes its outputs through temporary files renamed into
//! place, then a `<stage>.key` file holding a SHA-256 over the stage's
//! configuration, its inputs and the upstream key. A rerun whose key matches
//! reuses the artifacts.

use std::collections::BTreeMap;
use std::fmt;
use std::fs::{self, File};
use std::io::{BufReader, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::json;
use sha2::{Digest, Sha256};
use tempfile::NamedTempFile;

use super::config::{require_file, LabelSource, PipelineConfig};
use super::profile::profile_corpus;
use crate::corpus::{
    generate_synthetic_corpus, parse_entries, partition_periods, Entry, ForestDiagnostics,
    ThreadForest, TimePartition,
};
use crate::error::{Error, Result};
use crate::features::{FeatureExtractor, FeatureMatrix, FeatureSet};
use crate::learning::{evaluate, Dataset, EvaluationReport};
use crate::stance::{
    label_period_users, parse_messages, train_transfer_model, Stance, StanceAssignment,
};

pub const CORPUS: &str = "corpus.json";
pub const INGEST_DIAGNOSTICS: &str = "ingest_diagnostics.json";
pub const PROFILE_SUMMARY: &str = "profile.json";
pub const PROFILE_MONTHLY: &str = "profile_monthly.tsv";
pub const PROFILE_ROLES: &str = "profile_roles.tsv";
pub const PROFILE_CCDF: &str = "profile_ccdf.tsv";
pub const STANCES: &str = "stances.tsv";
pub const LABEL_REPORT: &str = "label_report.json";
pub const NB_MODEL: &str = "nb_model.json";
pub const VOCABULARY: &str = "vocabulary.tsv";
pub const REPORT: &str = "report.json";
pub const REPORT_BARS: &str = "report_bars.tsv";
pub const REPORT_TRANSITIONS: &str = "report_transitions.tsv";
pub const SYNTH_DIR: &str = "synth";

pub fn features_file(set: FeatureSet) -> String {
    format!("features_{set}.tsv")
}

pub fn schema_file(set: FeatureSet) -> String {
    format!("features_{set}.schema.tsv")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Ingest,
    Profile,
    Label,
    Features,
    Evaluate,
    Synth,
    Report,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Ingest => "ingest",
            Stage::Profile => "profile",
            Stage::Label => "label",
            Stage::Features => "features",
            Stage::Evaluate => "evaluate",
            Stage::Synth => "synth",
            Stage::Report => "report",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StageOutcome {
    pub stage: Stage,
    /// True when cached artifacts were kept.
    pub reused: bool,
    pub outputs: Vec<PathBuf>,
    /// Short human-readable account of the run.
    pub summary: String,
}

/// The ingested corpus as stored on disk.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorpusArtifact {
    pub cutoffs: Vec<i64>,
    pub entries: Vec<Entry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestDiagnostics {
    pub entries: usize,
    pub malformed_lines: usize,
    pub duplicate_ids: usize,
    pub orphans: usize,
    pub cycle_entries: usize,
    pub clamped_timestamps: usize,
    pub outside_periods: usize,
    pub entries_per_period: Vec<usize>,
    pub forest: ForestDiagnostics,
}

pub fn run_stage(stage: Stage, config: &PipelineConfig) -> Result<StageOutcome> {
    config.validate()?;
    match stage {
        Stage::Ingest => ingest(config),
        Stage::Profile => profile(config),
        Stage::Label => label(config),
        Stage::Features => features(config),
        Stage::Evaluate => evaluate_stage(config),
        Stage::Synth => synth(config),
        Stage::Report => report(config),
    }
}

/// Writes every file to a temporary sibling first and renames them into
/// place only once all were written.
pub(crate) fn commit(files: Vec<(PathBuf, Vec<u8>)>) -> Result<Vec<PathBuf>> {
    let mut staged = Vec::with_capacity(files.len());
    for (path, data) in files {
        let dir = path.parent().unwrap_or_else(|| Path::new("."));
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut tmp = NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
        tmp.write_all(&data).map_err(|e| Error::io(&path, e))?;
        tmp.as_file().sync_all().map_err(|e| Error::io(&path, e))?;
        staged.push((path, tmp));
    }
    let mut out = Vec::with_capacity(staged.len());
    for (path, tmp) in staged {
        tmp.persist(&path).map_err(|e| Error::io(&path, e.error))?;
        out.push(path);
    }
    Ok(out)
}

fn digest_file(path: &Path) -> Result<String> {
    let mut f = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut h = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    loop {
        let n = f.read(&mut buf).map_err(|e| Error::io(path, e))?;
        if n == 0 {
            break;
        }
        h.update(&buf[..n]);
    }
    Ok(hex::encode(h.finalize()))
}

fn stage_key(stage: Stage, material: serde_json::Value) -> Result<String> {
    let text = serde_json::to_string(&json!({ "stage": stage.name(), "material": material }))?;
    Ok(hex::encode(Sha256::digest(text.as_bytes())))
}

fn key_path(dir: &Path, stage: Stage) -> PathBuf {
    dir.join(format!("{}.key", stage.name()))
}

fn read_key(dir: &Path, stage: Stage) -> Option<String> {
    fs::read_to_string(key_path(dir, stage)).ok().map(|s| s.trim().to_owned())
}

/// Key of a finished upstream stage, or the error naming what is missing.
fn upstream_key(dir: &Path, stage: Stage, artifact: &str) -> Result<String> {
    let path = dir.join(artifact);
    match read_key(dir, stage) {
        Some(k) if path.is_file() => Ok(k),
        _ => Err(Error::MissingArtifact(path, stage.name())),
    }
}

fn is_cached(dir: &Path, stage: Stage, key: &str, outputs: &[PathBuf]) -> bool {
    read_key(dir, stage).as_deref() == Some(key) && outputs.iter().all(|p| p.is_file())
}

fn finish(
    dir: &Path,
    stage: Stage,
    key: &str,
    files: Vec<(PathBuf, Vec<u8>)>,
    summary: String,
) -> Result<StageOutcome> {
    let kp = key_path(dir, stage);
    if kp.exists() {
        fs::remove_file(&kp).map_err(|e| Error::io(&kp, e))?;
    }
    let outputs = commit(files)?;
    commit(vec![(kp, format!("{key}\n").into_bytes())])?;
    log::info!("{stage}: {summary}");
    Ok(StageOutcome {
        stage,
        reused: false,
        outputs,
        summary,
    })
}

fn reused(stage: Stage, outputs: Vec<PathBuf>) -> StageOutcome {
    log::info!("{stage}: configuration unchanged, reusing cached artifacts");
    StageOutcome {
        stage,
        reused: true,
        outputs,
        summary: "up to date".into(),
    }
}

fn json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut v = serde_json::to_vec_pretty(value)?;
    v.push(b'\n');
    Ok(v)
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Loads the ingested corpus from an output directory.
pub fn load_corpus(dir: &Path) -> Result<(ThreadForest, TimePartition)> {
    let path = dir.join(CORPUS);
    if !path.is_file() {
        return Err(Error::MissingArtifact(path, Stage::Ingest.name()));
    }
    let file = File::open(&path).map_err(|e| Error::io(&path, e))?;
    let artifact: CorpusArtifact = serde_json::from_reader(BufReader::new(file))?;
    Ok((
        ThreadForest::build(artifact.entries),
        TimePartition::new(artifact.cutoffs)?,
    ))
}

fn ingest(config: &PipelineConfig) -> Result<StageOutcome> {
    let input = require_file(config.input.as_ref(), "input")?;
    let partition = config.partition()?;
    let dir = &config.output_dir;
    let key = stage_key(
        Stage::Ingest,
        json!({ "input": digest_file(&input)?, "cutoffs": partition.cutoffs() }),
    )?;
    let outputs = vec![dir.join(CORPUS), dir.join(INGEST_DIAGNOSTICS)];
    if is_cached(dir, Stage::Ingest, &key, &outputs) {
        return Ok(reused(Stage::Ingest, outputs));
    }

    let file = File::open(&input).map_err(|e| Error::io(&input, e))?;
    let parsed = parse_entries(BufReader::new(file))?;
    let malformed = parsed.malformed;
    let duplicates = parsed.duplicates;
    let forest = ThreadForest::build(parsed.entries);
    let assignment = partition_periods(forest.entries(), &partition);
    let d = forest.diagnostics().clone();
    let diagnostics = IngestDiagnostics {
        entries: forest.len(),
        malformed_lines: malformed,
        duplicate_ids: duplicates + d.duplicates,
        orphans: d.orphans.len(),
        cycle_entries: d.cycle_entries.len(),
        clamped_timestamps: d.clamped,
        outside_periods: assignment.discarded,
        entries_per_period: period_entry_counts(&forest, &partition),
        forest: d,
    };
    let summary = format!(
        "{} entries, {} orphans, {} duplicates, {} clamped timestamps, {} outside the periods",
        diagnostics.entries,
        diagnostics.orphans,
        diagnostics.duplicate_ids,
        diagnostics.clamped_timestamps,
        diagnostics.outside_periods
    );
    let artifact = CorpusArtifact {
        cutoffs: partition.cutoffs().to_vec(),
        entries: forest.entries().to_vec(),
    };
    finish(
        dir,
        Stage::Ingest,
        &key,
        vec![
            (outputs[0].clone(), serde_json::to_vec(&artifact)?),
            (outputs[1].clone(), json_bytes(&diagnostics)?),
        ],
        summary,
    )
}

fn period_entry_counts(forest: &ThreadForest, partition: &TimePartition) -> Vec<usize> {
    let mut counts = vec![0; partition.num_periods()];
    for e in forest.entries() {
        if let Some(p) = partition.period_of(e.timestamp) {
            counts[p] += 1;
        }
    }
    counts
}

fn profile(config: &PipelineConfig) -> Result<StageOutcome> {
    let dir = &config.output_dir;
    let upstream = upstream_key(dir, Stage::Ingest, CORPUS)?;
    let key = stage_key(Stage::Profile, json!({ "upstream": upstream }))?;
    let outputs = vec![
        dir.join(PROFILE_SUMMARY),
        dir.join(PROFILE_MONTHLY),
        dir.join(PROFILE_ROLES),
        dir.join(PROFILE_CCDF),
    ];
    if is_cached(dir, Stage::Profile, &key, &outputs) {
        return Ok(reused(Stage::Profile, outputs));
    }
    let (forest, _) = load_corpus(dir)?;
    let p = profile_corpus(&forest);
    let summary = format!(
        "{} entries, {:.1}% comments, {} authors ({} initiator-only, {} both, {} commenter-only)",
        p.entries,
        100.0 * p.comment_share,
        p.authors,
        p.roles.initiator_only,
        p.roles.both,
        p.roles.commenter_only
    );
    finish(
        dir,
        Stage::Profile,
        &key,
        vec![
            (outputs[0].clone(), json_bytes(&p)?),
            (outputs[1].clone(), p.monthly_tsv().into_bytes()),
            (outputs[2].clone(), p.roles_tsv().into_bytes()),
            (outputs[3].clone(), p.ccdf_tsv().into_bytes()),
        ],
        summary,
    )
}

fn stance_counts(stances: &StanceAssignment) -> BTreeMap<String, usize> {
    let mut c: BTreeMap<String, usize> = Stance::ALL.iter().map(|s| (s.to_string(), 0)).collect();
    for (_, _, l) in stances.iter() {
        *c.entry(l.stance.to_string()).or_default() += 1;
    }
    c
}

fn label(config: &PipelineConfig) -> Result<StageOutcome> {
    let dir = &config.output_dir;
    let section = &config.labeler;
    // Validate the stage's own inputs before looking at artifacts.
    let (source_material, source_path) = match section.source {
        LabelSource::Model => {
            let p = require_file(section.training_input.as_ref(), "labeler.training_input")?;
            let lex = match &section.lexicon {
                Some(l) => Some(digest_file(&require_file(Some(l), "labeler.lexicon")?)?),
                None => None,
            };
            (json!({ "training": digest_file(&p)?, "lexicon": lex }), p)
        }
        LabelSource::GroundTruth => {
            let p = require_file(section.ground_truth.as_ref(), "labeler.ground_truth")?;
            (json!({ "ground_truth": digest_file(&p)? }), p)
        }
    };
    let upstream = upstream_key(dir, Stage::Ingest, CORPUS)?;
    let key = stage_key(
        Stage::Label,
        json!({
            "upstream": upstream,
            "source": section.source,
            "inputs": source_material,
            "params": section.params,
            "seed": config.seed,
        }),
    )?;
    let mut outputs = vec![dir.join(STANCES), dir.join(LABEL_REPORT)];
    if section.source == LabelSource::Model {
        outputs.push(dir.join(NB_MODEL));
    }
    if is_cached(dir, Stage::Label, &key, &outputs) {
        return Ok(reused(Stage::Label, outputs));
    }

    let (forest, partition) = load_corpus(dir)?;
    match section.source {
        LabelSource::Model => {
            let file = File::open(&source_path).map_err(|e| Error::io(&source_path, e))?;
            let messages = parse_messages(BufReader::new(file))?;
            let lexicon = config.lexicon()?;
            let transfer = train_transfer_model(&messages, &lexicon, &section.params, config.seed)?;
            let (stances, oov) =
                label_period_users(&transfer.model, &forest, &partition, section.params.cutoffs)?;
            let weak: BTreeMap<String, usize> =
                transfer
                    .weak_labels
                    .iter()
                    .fold(BTreeMap::new(), |mut m, w| {
                        *m.entry(w.stance.to_string()).or_default() += 1;
                        m
                    });
            let oov_report: Vec<_> = oov
                .iter()
                .map(|o| json!({ "period": o.period, "users": o.users, "tokens": o.tokens, "oov_tokens": o.oov_tokens, "oov_rate": o.rate() }))
                .collect();
            let report = json!({
                "source": "model",
                "training_users": messages.len(),
                "weak_labels": weak,
                "evaluation": transfer.evaluation,
                "vocabulary": transfer.model.vocabulary().len(),
                "assigned": stance_counts(&stances),
                "oov": oov_report,
            });
            let summary = format!(
                "{} user-periods labeled; held-out macro-accuracy {:.3} on {} weak labels",
                stances.len(),
                transfer.evaluation.macro_accuracy,
                transfer.weak_labels.len()
            );
            finish(
                dir,
                Stage::Label,
                &key,
                vec![
                    (outputs[0].clone(), stances.to_tsv().into_bytes()),
                    (outputs[1].clone(), json_bytes(&report)?),
                    (outputs[2].clone(), json_bytes(&transfer.model)?),
                ],
                summary,
            )
        }
        LabelSource::GroundTruth => {
            let stances = StanceAssignment::from_tsv(&read_text(&source_path)?)?;
            let report = json!({ "source": "ground_truth", "assigned": stance_counts(&stances) });
            let summary = format!("{} user-periods read from ground truth", stances.len());
            finish(
                dir,
                Stage::Label,
                &key,
                vec![
                    (outputs[0].clone(), stances.to_tsv().into_bytes()),
                    (outputs[1].clone(), json_bytes(&report)?),
                ],
                summary,
            )
        }
    }
}

fn features(config: &PipelineConfig) -> Result<StageOutcome> {
    let dir = &config.output_dir;
    let upstream = upstream_key(dir, Stage::Label, STANCES)?;
    let sets = &config.learning.feature_sets;
    let key = stage_key(
        Stage::Features,
        json!({ "upstream": upstream, "features": config.features, "sets": sets }),
    )?;
    let mut outputs = vec![dir.join(VOCABULARY)];
    for &s in sets {
        outputs.push(dir.join(features_file(s)));
        outputs.push(dir.join(schema_file(s)));
    }
    if is_cached(dir, Stage::Features, &key, &outputs) {
        return Ok(reused(Stage::Features, outputs));
    }
    let (forest, partition) = load_corpus(dir)?;
    let stances = StanceAssignment::from_tsv(&read_text(&dir.join(STANCES))?)?;
    let extractor = FeatureExtractor::new(&forest, &partition, &stances, config.features.clone())?;
    let tfidf = extractor.tfidf();
    let mut vocab = String::from("word\tidf\n");
    for (w, idf) in tfidf.vocabulary().iter().zip(tfidf.idf()) {
        vocab.push_str(&format!("{w}\t{idf}\n"));
    }
    let mut files = vec![(outputs[0].clone(), vocab.into_bytes())];
    let mut rows = 0;
    for &s in sets {
        let m = extractor.extract(s)?;
        rows = m.len();
        files.push((dir.join(features_file(s)), m.to_tsv().into_bytes()));
        let mut schema = m.schema_tsv();
        schema.push_str(&format!("# idf_documents\t{:?}\n", config.features.idf_documents));
        files.push((dir.join(schema_file(s)), schema.into_bytes()));
    }
    let summary = format!("{} feature sets, {rows} user-period vectors each", sets.len());
    finish(dir, Stage::Features, &key, files, summary)
}

/// Reads the feature matrix of one set from an output directory.
pub fn load_features(dir: &Path, set: FeatureSet) -> Result<FeatureMatrix> {
    let data = dir.join(features_file(set));
    if !data.is_file() {
        return Err(Error::MissingArtifact(data, Stage::Features.name()));
    }
    let schema: String = read_text(&dir.join(schema_file(set)))?
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| format!("{l}\n"))
        .collect();
    let mut m = FeatureMatrix::from_tsv(&read_text(&data)?, &schema)?;
    m.set_id = set;
    Ok(m)
}

fn evaluate_stage(config: &PipelineConfig) -> Result<StageOutcome> {
    let dir = &config.output_dir;
    let first = config.learning.feature_sets[0];
    let upstream = upstream_key(dir, Stage::Features, &features_file(first))?;
    let key = stage_key(
        Stage::Evaluate,
        json!({ "upstream": upstream, "learning": config.learning, "seed": config.seed }),
    )?;
    let outputs = vec![
        dir.join(REPORT),
        dir.join(REPORT_BARS),
        dir.join(REPORT_TRANSITIONS),
    ];
    if is_cached(dir, Stage::Evaluate, &key, &outputs) {
        return Ok(reused(Stage::Evaluate, outputs));
    }
    let stances = StanceAssignment::from_tsv(&read_text(&dir.join(STANCES))?)?;
    let datasets = config
        .learning
        .feature_sets
        .iter()
        .map(|&s| Ok(Dataset::new(&load_features(dir, s)?, &stances)))
        .collect::<Result<Vec<_>>>()?;
    let report = evaluate(
        &datasets,
        &config.specs(),
        &config.cv_config(),
        config.learning.per_transition,
    )?;
    let summary = format!(
        "{} results over {} instances per feature set",
        report.results.len(),
        datasets.first().map_or(0, Dataset::len)
    );
    finish(
        dir,
        Stage::Evaluate,
        &key,
        vec![
            (outputs[0].clone(), json_bytes(&report)?),
            (outputs[1].clone(), report.bars_tsv().into_bytes()),
            (outputs[2].clone(), report.transitions_tsv().into_bytes()),
        ],
        summary,
    )
}

pub fn load_report(dir: &Path) -> Result<EvaluationReport> {
    let path = dir.join(REPORT);
    if !path.is_file() {
        return Err(Error::MissingArtifact(path, Stage::Evaluate.name()));
    }
    Ok(serde_json::from_str(&read_text(&path)?)?)
}

/// Re-renders the TSVs from `report.json` and returns a plain-text table.
fn report(config: &PipelineConfig) -> Result<StageOutcome> {
    let dir = &config.output_dir;
    let r = load_report(dir)?;
    let mut table = format!(
        "{:<20} {:<4} {:>7} {:>8} {:>8} {:>8} {:>8}\n",
        "family", "set", "period", "F1", "F1 sd", "acc", "inst"
    );
    for e in &r.results {
        table.push_str(&format!(
            "{:<20} {:<4} {:>7} {:>8.3} {:>8.3} {:>8.3} {:>8}\n",
            e.family.name(),
            e.feature_set.name(),
            e.period.map_or_else(|| "all".into(), |t| t.to_string()),
            e.macro_f1.mean,
            e.macro_f1.std,
            e.macro_accuracy.mean,
            e.instances
        ));
    }
    let outputs = commit(vec![
        (dir.join(REPORT_BARS), r.bars_tsv().into_bytes()),
        (dir.join(REPORT_TRANSITIONS), r.transitions_tsv().into_bytes()),
    ])?;
    Ok(StageOutcome {
        stage: Stage::Report,
        reused: false,
        outputs,
        summary: table,
    })
}

fn synth(config: &PipelineConfig) -> Result<StageOutcome> {
    let dir = config.output_dir.join(SYNTH_DIR);
    let key = stage_key(Stage::Synth, json!({ "synth": config.synth, "seed": config.seed }))?;
    let outputs = vec![
        dir.join("entries.jsonl"),
        dir.join("tweets.jsonl"),
        dir.join("ground_truth.tsv"),
        dir.join("pipeline.toml"),
    ];
    if is_cached(&dir, Stage::Synth, &key, &outputs) {
        return Ok(reused(Stage::Synth, outputs));
    }
    let corpus = generate_synthetic_corpus(&config.synth, config.seed)?;
    let mut entries = Vec::new();
    corpus.write_entries(&mut entries)?;
    let mut tweets = Vec::new();
    corpus.write_tweets(&mut tweets)?;

    let mut run = config.clone();
    run.input = Some(PathBuf::from("entries.jsonl"));
    run.output_dir = PathBuf::from("run");
    run.cutoffs = Some(
        corpus
            .partition
            .cutoffs()
            .iter()
            .map(|&c| {
                chrono::DateTime::from_timestamp(c, 0)
                    .map(|d| d.to_rfc3339())
                    .unwrap_or_else(|| c.to_string())
            })
            .collect(),
    );
    run.labeler.source = LabelSource::GroundTruth;
    run.labeler.ground_truth = Some(PathBuf::from("ground_truth.tsv"));
    run.labeler.training_input = Some(PathBuf::from("tweets.jsonl"));
    run.labeler.lexicon = None;
    let summary = format!(
        "{} entries over {} periods, {} labeled user-periods, {} tweet authors",
        corpus.entries.len(),
        corpus.partition.num_periods(),
        corpus.ground_truth.len(),
        corpus.tweets.len()
    );
    finish(
        &dir,
        Stage::Synth,
        &key,
        vec![
            (outputs[0].clone(), entries),
            (outputs[1].clone(), tweets),
            (outputs[2].clone(), corpus.ground_truth.to_tsv().into_bytes()),
            (outputs[3].clone(), run.to_toml()?.into_bytes()),
        ],
        summary,
    )
}
