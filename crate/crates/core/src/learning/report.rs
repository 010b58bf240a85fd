//! Evaluation over classifier families and feature sets, and its JSON / TSV
//! renderings.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::cv::{nested_cv, CvConfig, FoldOutcome, HygieneAudit};
use super::dataset::{Dataset, Instance};
use super::metrics::TransitionMatrix;
use super::models::Family;
use super::search::ClassifierSpec;
use crate::error::Result;
use crate::features::FeatureSet;
use crate::stance::Stance;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub mean: f64,
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultEntry {
    pub family: Family,
    pub feature_set: FeatureSet,
    /// `None` for the pooled dataset, `Some(t)` for instances of period t only.
    pub period: Option<usize>,
    pub instances: usize,
    pub macro_f1: MetricSummary,
    pub macro_accuracy: MetricSummary,
    pub macro_precision: MetricSummary,
    pub macro_recall: MetricSummary,
    pub transition_f1: TransitionMatrix,
    pub folds: Vec<FoldOutcome>,
    /// Splits per feature column summed over the outer-fold models (tree
    /// families only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub split_counts: Option<BTreeMap<String, usize>>,
    pub hygiene: HygieneAudit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub generated_at: String,
    pub seed: u64,
    pub outer_k: usize,
    pub inner_k: usize,
    pub search_iters: usize,
    pub group_by_user: bool,
    pub results: Vec<ResultEntry>,
}

impl EvaluationReport {
    /// Copy with the timestamp blanked, for run-to-run comparison.
    pub fn without_timestamp(&self) -> Self {
        EvaluationReport {
            generated_at: String::new(),
            ..self.clone()
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn result(&self, family: Family, set: FeatureSet) -> Option<&ResultEntry> {
        self.results
            .iter()
            .find(|r| r.family == family && r.feature_set == set && r.period.is_none())
    }

    /// Bar-chart data: one row per (family, feature set, period).
    pub fn bars_tsv(&self) -> String {
        let mut out = String::from(
            "family\tfeature_set\tperiod\tinstances\tmacro_f1\tmacro_f1_std\tmacro_accuracy\tmacro_accuracy_std\tmacro_precision\tmacro_precision_std\tmacro_recall\tmacro_recall_std\n",
        );
        for r in &self.results {
            let period = r.period.map_or_else(|| "all".to_owned(), |t| t.to_string());
            let _ = write!(out, "{}\t{}\t{}\t{}", r.family, r.feature_set, period, r.instances);
            for m in [r.macro_f1, r.macro_accuracy, r.macro_precision, r.macro_recall] {
                let _ = write!(out, "\t{:.4}\t{:.4}", m.mean, m.std);
            }
            out.push('\n');
        }
        out
    }

    /// Per-transition F1 tables of the pooled results, one row per current
    /// stance.
    pub fn transitions_tsv(&self) -> String {
        let mut out = String::from("family\tfeature_set\tstance_t\\stance_t+1\tA\tN\tP\tsupport\n");
        for r in self.results.iter().filter(|r| r.period.is_none()) {
            for x in Stance::ALL {
                let _ = write!(out, "{}\t{}\t{}", r.family, r.feature_set, x);
                for y in Stance::ALL {
                    match r.transition_f1.get(x, y) {
                        Some(v) => {
                            let _ = write!(out, "\t{v:.2}");
                        }
                        None => out.push_str("\tn/a"),
                    }
                }
                let _ = writeln!(out, "\t{}", r.transition_f1.support[x.index()]);
            }
        }
        out
    }
}

fn entry(
    dataset: &Dataset,
    instances: &[Instance],
    period: Option<usize>,
    spec: &ClassifierSpec,
    cv: &CvConfig,
) -> Result<ResultEntry> {
    let out = nested_cv(instances, spec, cv)?;
    let split_counts = out.folds.iter().try_fold(vec![0usize; dataset.columns.len()], |mut acc, f| {
        let c = f.split_counts.as_ref()?;
        for (a, v) in acc.iter_mut().zip(c) {
            *a += v;
        }
        Some(acc)
    });
    let split_counts = split_counts.map(|c| {
        dataset
            .columns
            .iter()
            .zip(c)
            .filter(|(_, v)| *v > 0)
            .map(|(k, v)| (k.clone(), v))
            .collect()
    });
    let summary = |m: f64, s: f64| MetricSummary { mean: m, std: s };
    Ok(ResultEntry {
        family: out.family,
        feature_set: dataset.set_id,
        period,
        instances: instances.len(),
        macro_f1: summary(out.mean.f1, out.std.f1),
        macro_accuracy: summary(out.mean.accuracy, out.std.accuracy),
        macro_precision: summary(out.mean.precision, out.std.precision),
        macro_recall: summary(out.mean.recall, out.std.recall),
        transition_f1: out.transition_f1,
        folds: out.folds,
        split_counts,
        hygiene: out.audit,
    })
}

/// Runs nested CV for every (family, feature set). With `per_transition`,
/// each period pair is also evaluated on its own; pairs too small for the
/// outer folds are skipped with a warning.
pub fn evaluate(
    datasets: &[Dataset],
    specs: &[ClassifierSpec],
    cv: &CvConfig,
    per_transition: bool,
) -> Result<EvaluationReport> {
    let mut results = Vec::new();
    for spec in specs {
        for ds in datasets {
            log::info!("evaluating {} on {}", spec.family(), ds.set_id);
            results.push(entry(ds, &ds.instances, None, spec, cv)?);
            if per_transition {
                let mut by_period: BTreeMap<usize, Vec<Instance>> = BTreeMap::new();
                for i in &ds.instances {
                    by_period.entry(i.period()).or_default().push(i.clone());
                }
                for (t, inst) in by_period {
                    match entry(ds, &inst, Some(t), spec, cv) {
                        Ok(e) => results.push(e),
                        Err(e) => log::warn!(
                            "{} on {} for period {t} skipped: {e}",
                            spec.family(),
                            ds.set_id
                        ),
                    }
                }
            }
        }
    }
    Ok(EvaluationReport {
        generated_at: chrono::Utc::now().to_rfc3339(),
        seed: cv.seed,
        outer_k: cv.outer_k,
        inner_k: cv.inner_k,
        search_iters: cv.search_iters,
        group_by_user: cv.group_by_user,
        results,
    })
}
