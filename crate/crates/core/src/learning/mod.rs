//! Next-stance prediction: instances, classifiers, nested cross-validation
//! and reporting.

pub mod cv;
pub mod dataset;
pub mod metrics;
pub mod models;
pub mod report;
pub mod search;

pub use cv::{assign_folds, audit_fold, nested_cv, CvConfig, CvOutcome, FoldOutcome, HygieneAudit};
pub use dataset::{make_instances, Dataset, Instance, Matrix};
pub use metrics::{macro_metrics, transition_f1_matrix, MacroMetrics, TransitionMatrix};
pub use models::{fit, train_predict, Family, FittedModel, Hyperparams, MaxFeatures};
pub use report::{evaluate, EvaluationReport, MetricSummary, ResultEntry};
pub use search::{ClassifierSpec, SearchSpace, SearchSpaces};
