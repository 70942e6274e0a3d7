//! Per-class rates, confusion matrices and evaluation reports.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::forest::Hyperparams;
use crate::label::LabelSet;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ClassMetrics {
    pub tpr: f64,
    pub fpr: f64,
    pub precision: f64,
    pub f_measure: f64,
    /// Fragments of this class.
    pub support: u64,
}

/// Rates for one class from its one-vs-rest counts. `p` is the class's
/// fragment count and `n` the count of all other fragments. Precision and
/// F-measure are 0 when their denominators are 0.
pub fn metrics_from_counts(tp: u64, fp: u64, fn_: u64, p: u64, n: u64) -> Result<ClassMetrics> {
    if p == 0 {
        return Err(Error::EmptyClass { tp });
    }
    if tp > p {
        return Err(Error::Counts("tp exceeds class size"));
    }
    if tp + fn_ != p {
        return Err(Error::Counts("tp + fn must equal class size"));
    }
    if n == 0 && fp > 0 || fp > n {
        return Err(Error::Counts("fp exceeds negatives"));
    }
    let ratio = |num: u64, den: u64| if den == 0 { 0.0 } else { num as f64 / den as f64 };
    Ok(ClassMetrics {
        tpr: ratio(tp, p),
        fpr: ratio(fp, n),
        precision: ratio(tp, tp + fp),
        f_measure: ratio(2 * tp, 2 * tp + fp + fn_),
        support: p,
    })
}

/// Square count matrix; rows are true classes, columns predicted classes.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConfusionMatrix {
    size: usize,
    counts: Vec<u64>,
}

impl ConfusionMatrix {
    pub fn new(size: usize) -> Self {
        Self {
            size,
            counts: vec![0; size * size],
        }
    }

    pub fn from_rows(rows: &[Vec<u64>]) -> Result<Self> {
        let size = rows.len();
        if rows.iter().any(|r| r.len() != size) {
            return Err(Error::Counts("confusion matrix must be square"));
        }
        Ok(Self {
            size,
            counts: rows.concat(),
        })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn record(&mut self, truth: u16, predicted: u16) {
        let (t, p) = (usize::from(truth), usize::from(predicted));
        self.counts[t * self.size + p] += 1;
    }

    pub fn get(&self, truth: usize, predicted: usize) -> u64 {
        self.counts[truth * self.size + predicted]
    }

    pub fn row(&self, truth: usize) -> &[u64] {
        &self.counts[truth * self.size..(truth + 1) * self.size]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[u64]> {
        self.counts.chunks(self.size.max(1)).take(self.size)
    }

    pub fn row_sum(&self, truth: usize) -> u64 {
        self.row(truth).iter().sum()
    }

    pub fn column_sum(&self, predicted: usize) -> u64 {
        (0..self.size).map(|t| self.get(t, predicted)).sum()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.size).map(|i| self.get(i, i)).sum()
    }

    pub fn add(&mut self, other: &ConfusionMatrix) {
        assert_eq!(self.size, other.size);
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
    }

    /// Metrics for class `class`; `None` when the class has no fragments.
    pub fn class_metrics(&self, class: usize) -> Option<ClassMetrics> {
        let tp = self.get(class, class);
        let p = self.row_sum(class);
        let fp = self.column_sum(class) - tp;
        let n = self.total() - p;
        metrics_from_counts(tp, fp, p - tp, p, n).ok()
    }
}

/// Per-class and support-weighted metrics from one pooled confusion matrix.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EvalReport {
    pub labels: LabelSet,
    /// `None` for classes with zero support.
    pub per_class: Vec<Option<ClassMetrics>>,
    pub weighted: ClassMetrics,
    pub matrix: ConfusionMatrix,
    pub config: EvalConfig,
    pub warnings: Vec<String>,
}

/// Settings echoed into a report.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EvalConfig {
    pub fragment_size: u32,
    pub k: u32,
    pub seed: u64,
    pub hyper: Hyperparams,
    pub stats_policy: crate::cv::StatsPolicy,
    pub group_by_file: bool,
    pub stratified: bool,
}

impl EvalReport {
    pub fn from_matrix(
        labels: LabelSet,
        matrix: ConfusionMatrix,
        config: EvalConfig,
        mut warnings: Vec<String>,
    ) -> Self {
        let per_class: Vec<_> = (0..matrix.size()).map(|c| matrix.class_metrics(c)).collect();
        for (label, m) in labels.iter().zip(&per_class) {
            if m.is_none() {
                warnings.push(alloc::format!("class {label} has zero support"));
            }
        }
        let weighted = weighted_average(&per_class);
        Self {
            labels,
            per_class,
            weighted,
            matrix,
            config,
            warnings,
        }
    }

    pub fn has_empty_class(&self) -> bool {
        self.per_class.iter().any(Option::is_none)
    }

    /// Overall accuracy, `trace / total`.
    pub fn accuracy(&self) -> f64 {
        let total = self.matrix.total();
        if total == 0 {
            0.0
        } else {
            self.matrix.trace() as f64 / total as f64
        }
    }
}

/// Support-weighted mean of each rate.
pub fn weighted_average(per_class: &[Option<ClassMetrics>]) -> ClassMetrics {
    let total: u64 = per_class.iter().flatten().map(|m| m.support).sum();
    let mut out = ClassMetrics {
        tpr: 0.0,
        fpr: 0.0,
        precision: 0.0,
        f_measure: 0.0,
        support: total,
    };
    if total == 0 {
        return out;
    }
    for m in per_class.iter().flatten() {
        let w = m.support as f64;
        out.tpr += w * m.tpr;
        out.fpr += w * m.fpr;
        out.precision += w * m.precision;
        out.f_measure += w * m.f_measure;
    }
    let t = total as f64;
    out.tpr /= t;
    out.fpr /= t;
    out.precision /= t;
    out.f_measure /= t;
    out
}
