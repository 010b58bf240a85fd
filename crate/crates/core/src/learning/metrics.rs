//! Macro-averaged classification metrics and the per-transition F1 table.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stance::Stance;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MacroMetrics {
    pub f1: f64,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct Counts {
    tp: usize,
    fp: usize,
    fn_: usize,
    tn: usize,
}

fn counts(class: Stance, predictions: &[Stance], labels: &[Stance]) -> Counts {
    let mut c = Counts::default();
    for (&p, &l) in predictions.iter().zip(labels) {
        match (p == class, l == class) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, true) => c.fn_ += 1,
            (false, false) => c.tn += 1,
        }
    }
    c
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn f1_of(c: Counts) -> f64 {
    let p = ratio(c.tp, c.tp + c.fp);
    let r = ratio(c.tp, c.tp + c.fn_);
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

fn check(predictions: &[Stance], labels: &[Stance]) -> Result<()> {
    if predictions.len() != labels.len() {
        return Err(Error::Invalid(format!(
            "{} predictions for {} labels",
            predictions.len(),
            labels.len()
        )));
    }
    if labels.is_empty() {
        return Err(Error::Invalid("metrics need at least one instance".into()));
    }
    Ok(())
}

/// Macro metrics over the three stances.
pub fn macro_metrics(predictions: &[Stance], labels: &[Stance]) -> Result<MacroMetrics> {
    macro_metrics_over(&Stance::ALL, predictions, labels)
}

/// One-vs-rest precision, recall, F1 and accuracy per class, averaged without
/// weights over `classes`. Undefined ratios count as 0, so a class absent
/// from `labels` contributes 0 precision, recall and F1.
pub fn macro_metrics_over(
    classes: &[Stance],
    predictions: &[Stance],
    labels: &[Stance],
) -> Result<MacroMetrics> {
    check(predictions, labels)?;
    let n = labels.len();
    let mut sum = MacroMetrics {
        f1: 0.0,
        accuracy: 0.0,
        precision: 0.0,
        recall: 0.0,
    };
    for &class in classes {
        let c = counts(class, predictions, labels);
        sum.precision += ratio(c.tp, c.tp + c.fp);
        sum.recall += ratio(c.tp, c.tp + c.fn_);
        sum.f1 += f1_of(c);
        sum.accuracy += ratio(c.tp + c.tn, n);
    }
    let k = classes.len() as f64;
    Ok(MacroMetrics {
        f1: sum.f1 / k,
        accuracy: sum.accuracy / k,
        precision: sum.precision / k,
        recall: sum.recall / k,
    })
}

/// F1 of one class, treating the others as negatives.
pub fn class_f1(class: Stance, predictions: &[Stance], labels: &[Stance]) -> f64 {
    f1_of(counts(class, predictions, labels))
}

/// `matrix[true][predicted]`, indexed A/N/P.
pub fn confusion_matrix(predictions: &[Stance], labels: &[Stance]) -> [[usize; 3]; 3] {
    let mut m = [[0usize; 3]; 3];
    for (&p, &l) in predictions.iter().zip(labels) {
        m[l.index()][p.index()] += 1;
    }
    m
}

/// Next-stance F1 tabulated by current stance.
///
/// `cells[x][y]` is the F1 of class `y` among instances whose current stance
/// is `x`. It is `None` when class `y` appears neither in the labels nor the
/// predictions of that partition, or when the partition is empty (then the
/// row is also flagged in `row_not_applicable`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionMatrix {
    pub cells: [[Option<f64>; 3]; 3],
    pub support: [usize; 3],
    pub row_not_applicable: [bool; 3],
}

impl TransitionMatrix {
    pub fn get(&self, current: Stance, next: Stance) -> Option<f64> {
        self.cells[current.index()][next.index()]
    }

    /// Tab-separated table with A/N/P row and column headers.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("stance_t\\stance_t+1\tA\tN\tP\n");
        for x in Stance::ALL {
            out.push_str(x.code());
            for y in Stance::ALL {
                out.push('\t');
                match self.get(x, y) {
                    Some(v) => out.push_str(&format!("{v:.2}")),
                    None => out.push_str("n/a"),
                }
            }
            out.push('\n');
        }
        out
    }
}

pub fn transition_f1_matrix(
    predictions: &[Stance],
    labels: &[Stance],
    current: &[Stance],
) -> Result<TransitionMatrix> {
    check(predictions, labels)?;
    if current.len() != labels.len() {
        return Err(Error::Invalid("current stances do not match labels".into()));
    }
    let mut m = TransitionMatrix {
        cells: [[None; 3]; 3],
        support: [0; 3],
        row_not_applicable: [false; 3],
    };
    for x in Stance::ALL {
        let (p, l): (Vec<Stance>, Vec<Stance>) = current
            .iter()
            .zip(predictions.iter().zip(labels))
            .filter(|(c, _)| **c == x)
            .map(|(_, (p, l))| (*p, *l))
            .unzip();
        m.support[x.index()] = l.len();
        if l.is_empty() {
            m.row_not_applicable[x.index()] = true;
            continue;
        }
        for y in Stance::ALL {
            if l.contains(&y) || p.contains(&y) {
                m.cells[x.index()][y.index()] = Some(class_f1(y, &p, &l));
            }
        }
    }
    Ok(m)
}
