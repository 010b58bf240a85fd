use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::corpus::{SynthConfig, TimePartition};
use crate::error::{Error, Result};
use crate::features::{FeatureConfig, FeatureSet};
use crate::learning::{ClassifierSpec, CvConfig, Family, SearchSpaces};
use crate::stance::{HashtagLexicon, LabelerConfig};

/// Where per-period stances come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelSource {
    /// Naive Bayes transfer model trained on a weakly labeled corpus.
    #[default]
    Model,
    /// A `user  period  [leave_probability]  stance` table, e.g. from `synth`.
    GroundTruth,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct LabelerSection {
    pub source: LabelSource,
    /// JSON lines `{"user": .., "text": ..}` for weak labeling.
    pub training_input: Option<PathBuf>,
    pub ground_truth: Option<PathBuf>,
    /// Hashtag lists (`[pro]` / `[against]` sections); built-in lists when absent.
    pub lexicon: Option<PathBuf>,
    #[serde(flatten)]
    pub params: LabelerConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LearningSection {
    pub families: Vec<Family>,
    pub feature_sets: Vec<FeatureSet>,
    pub outer_k: usize,
    pub inner_k: usize,
    pub search_iters: usize,
    pub group_by_user: bool,
    pub per_transition: bool,
    pub spaces: SearchSpaces,
}

impl Default for LearningSection {
    fn default() -> Self {
        let cv = CvConfig::default();
        LearningSection {
            families: Family::ALL.to_vec(),
            feature_sets: FeatureSet::ALL.to_vec(),
            outer_k: cv.outer_k,
            inner_k: cv.inner_k,
            search_iters: cv.search_iters,
            group_by_user: cv.group_by_user,
            per_transition: false,
            spaces: SearchSpaces::default(),
        }
    }
}

/// The single declarative pipeline configuration. Relative paths are
/// resolved against the directory of the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub seed: u64,
    #[serde(default)]
    pub input: Option<PathBuf>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// ISO-8601 period boundaries; the built-in 15-period timeline when absent.
    #[serde(default)]
    pub cutoffs: Option<Vec<String>>,
    #[serde(default)]
    pub labeler: LabelerSection,
    #[serde(default)]
    pub features: FeatureConfig,
    #[serde(default)]
    pub learning: LearningSection,
    #[serde(default)]
    pub synth: SynthConfig,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

impl PipelineConfig {
    pub fn from_toml(text: &str, base: &Path) -> Result<Self> {
        let mut config: PipelineConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.message().to_owned()))?;
        config.resolve_paths(base);
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::Config(format!("cannot read config {}: {e}", path.display()))
        })?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        PipelineConfig::from_toml(&text, base)
    }

    /// Defaults with only a seed, for runs without a config file.
    pub fn with_seed(seed: u64) -> Self {
        PipelineConfig {
            seed,
            input: None,
            output_dir: default_output_dir(),
            cutoffs: None,
            labeler: LabelerSection::default(),
            features: FeatureConfig::default(),
            learning: LearningSection::default(),
            synth: SynthConfig::default(),
        }
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let Some(p) = self.input.as_mut() {
            fix(p);
        }
        fix(&mut self.output_dir);
        for p in [
            &mut self.labeler.training_input,
            &mut self.labeler.ground_truth,
            &mut self.labeler.lexicon,
        ]
        .into_iter()
        .flatten()
        {
            fix(p);
        }
    }

    /// Checks values that do not depend on files.
    pub fn validate(&self) -> Result<()> {
        self.partition()?;
        let l = &self.labeler.params;
        if !(l.alpha > 0.0 && l.alpha.is_finite()) {
            return Err(Error::Config(format!("labeler alpha must be positive, got {}", l.alpha)));
        }
        if !(0.0..=0.5).contains(&l.extreme_fraction) {
            return Err(Error::Config("extreme_fraction must lie in [0, 0.5]".into()));
        }
        if !(l.train_fraction > 0.0 && l.train_fraction < 1.0) {
            return Err(Error::Config("train_fraction must lie in (0, 1)".into()));
        }
        let c = l.cutoffs;
        if !((0.0..=1.0).contains(&c.low) && (0.0..=1.0).contains(&c.high) && c.low <= c.high) {
            return Err(Error::Config("stance cutoffs must satisfy 0 <= low <= high <= 1".into()));
        }
        if self.features.vocab_size == 0 {
            return Err(Error::Config("vocab_size must be positive".into()));
        }
        let learning = &self.learning;
        if learning.families.is_empty() || learning.feature_sets.is_empty() {
            return Err(Error::Config("families and feature_sets must be non-empty".into()));
        }
        self.cv_config().validate()?;
        for s in self.specs() {
            s.validate()?;
        }
        Ok(())
    }

    pub fn partition(&self) -> Result<TimePartition> {
        match &self.cutoffs {
            Some(dates) => TimePartition::from_iso_dates(dates).map_err(|e| Error::Config(e.to_string())),
            None => Ok(TimePartition::brexit_timeline()),
        }
    }

    pub fn cv_config(&self) -> CvConfig {
        CvConfig {
            outer_k: self.learning.outer_k,
            inner_k: self.learning.inner_k,
            search_iters: self.learning.search_iters,
            group_by_user: self.learning.group_by_user,
            seed: self.seed,
        }
    }

    pub fn specs(&self) -> Vec<ClassifierSpec> {
        self.learning
            .families
            .iter()
            .map(|&f| self.learning.spaces.spec(f))
            .collect()
    }

    pub fn lexicon(&self) -> Result<HashtagLexicon> {
        match &self.labeler.lexicon {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
                HashtagLexicon::parse(&text)
            }
            None => Ok(HashtagLexicon::default()),
        }
    }
}

/// Fails with a config error when a path the stage needs is unset or absent.
pub(crate) fn require_file(path: Option<&PathBuf>, key: &str) -> Result<PathBuf> {
    let p = path.ok_or_else(|| Error::Config(format!("`{key}` is not set")))?;
    if !p.is_file() {
        return Err(Error::Config(format!("`{key}` points to missing file {}", p.display())));
    }
    Ok(p.clone())
}
