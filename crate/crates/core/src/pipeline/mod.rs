//! Stage-by-stage orchestration with on-disk, cache-keyed artifacts.

pub mod config;
pub mod profile;
pub mod stages;

pub use config::{LabelSource, LabelerSection, LearningSection, PipelineConfig};
pub use profile::{profile_corpus, CorpusProfile, MonthCount, RoleBreakdown};
pub use stages::{load_corpus, load_features, load_report, run_stage, Stage, StageOutcome};
