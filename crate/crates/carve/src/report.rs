//! Report and export formats: JSON evaluation reports, CSV metric tables,
//! CSV confusion matrices, CSV feature matrices and extraction summaries.

use std::fmt::Write as _;

use serde::Serialize;
use sift_core::metrics::EvalConfig;
use sift_core::{ClassMetrics, EvalReport, FeatureVector, FragmentSet, LabelSet};

#[derive(Debug, Serialize)]
pub struct ClassRow<'a> {
    pub label: &'a str,
    #[serde(flatten)]
    pub metrics: Option<ClassMetrics>,
}

#[derive(Debug, Serialize)]
pub struct JsonReport<'a> {
    pub config: &'a EvalConfig,
    pub labels: &'a LabelSet,
    pub per_class: Vec<ClassRow<'a>>,
    pub weighted: ClassMetrics,
    pub accuracy: f64,
    pub confusion_matrix: Vec<&'a [u64]>,
    pub warnings: &'a [String],
}

pub fn to_json(report: &EvalReport) -> String {
    let doc = JsonReport {
        config: &report.config,
        labels: &report.labels,
        per_class: report
            .labels
            .iter()
            .zip(&report.per_class)
            .map(|(label, m)| ClassRow {
                label: label.as_str(),
                metrics: *m,
            })
            .collect(),
        weighted: report.weighted,
        accuracy: report.accuracy(),
        confusion_matrix: report.matrix.rows().collect(),
        warnings: &report.warnings,
    };
    let mut out = serde_json::to_string_pretty(&doc).expect("report serializes");
    out.push('\n');
    out
}

/// Per-class table with the columns File Type, TPR, FPR, Precision and
/// F-Measure, closed by a weighted-average row.
pub fn metrics_csv(report: &EvalReport) -> String {
    let mut out = String::from("file_type,tpr,fpr,precision,f_measure,support\n");
    for (label, m) in report.labels.iter().zip(&report.per_class) {
        match m {
            Some(m) => row(&mut out, label.as_str(), m),
            None => {
                let _ = writeln!(out, "{label},,,,,0");
            }
        }
    }
    row(&mut out, "weighted_avg", &report.weighted);
    out
}

fn row(out: &mut String, name: &str, m: &ClassMetrics) {
    let _ = writeln!(
        out,
        "{name},{},{},{},{},{}",
        m.tpr, m.fpr, m.precision, m.f_measure, m.support
    );
}

pub fn confusion_csv(report: &EvalReport) -> String {
    let mut out = String::from("true\\predicted");
    for label in report.labels.iter() {
        let _ = write!(out, ",{label}");
    }
    out.push('\n');
    for (label, counts) in report.labels.iter().zip(report.matrix.rows()) {
        out.push_str(label.as_str());
        for c in counts {
            let _ = write!(out, ",{c}");
        }
        out.push('\n');
    }
    out
}

/// Human-readable per-class table at two/three decimals.
pub fn metrics_table(report: &EvalReport) -> String {
    let mut out = format!(
        "{:<14} {:>5} {:>6} {:>9} {:>9}\n",
        "File Type", "TPR", "FPR", "Precision", "F-Measure"
    );
    for (label, m) in report.labels.iter().zip(&report.per_class) {
        if let Some(m) = m {
            out.push_str(&table_row(label.as_str(), m));
        } else {
            let _ = writeln!(out, "{label:<14} (no fragments)");
        }
    }
    out.push_str(&table_row("Weighted Avg.", &report.weighted));
    out
}

pub fn table_row(name: &str, m: &ClassMetrics) -> String {
    format!(
        "{:<14} {:>5.2} {:>6.3} {:>9.2} {:>9.2}\n",
        name, m.tpr, m.fpr, m.precision, m.f_measure
    )
}

/// Feature matrix with columns `b00`..`bff` and `label`.
pub fn features_csv(rows: &[FeatureVector], set: &FragmentSet) -> String {
    let mut out = String::new();
    for v in 0..256 {
        let _ = write!(out, "b{v:02x},");
    }
    out.push_str("label\n");
    for (row, f) in rows.iter().zip(&set.fragments) {
        for w in row.as_array() {
            let _ = write!(out, "{w},");
        }
        let label = set.labels.get(f.label).map(|l| l.as_str()).unwrap_or("?");
        out.push_str(label);
        out.push('\n');
    }
    out
}

#[derive(Debug, Serialize, PartialEq, Eq)]
pub struct ClassSummary {
    pub label: String,
    pub files: usize,
    pub fragments: u64,
}

#[derive(Debug, Serialize, PartialEq, Eq)]
pub struct ExtractSummary {
    pub fragment_size: u32,
    pub seed: u64,
    pub files: usize,
    pub fragments: usize,
    pub classes: Vec<ClassSummary>,
}

impl ExtractSummary {
    pub fn new(set: &FragmentSet, seed: u64) -> Self {
        let mut files = vec![0usize; set.labels.len()];
        let mut last_file = None;
        for f in &set.fragments {
            if last_file != Some(f.file_id) {
                files[usize::from(f.label)] += 1;
                last_file = Some(f.file_id);
            }
        }
        let classes = set
            .labels
            .iter()
            .zip(set.class_counts())
            .zip(files)
            .map(|((label, fragments), files)| ClassSummary {
                label: label.to_string(),
                files,
                fragments,
            })
            .collect();
        Self {
            fragment_size: set.fragment_size.get(),
            seed,
            files: set.num_files(),
            fragments: set.len(),
            classes,
        }
    }

    pub fn table(&self) -> String {
        let mut out = format!("{:<12} {:>8} {:>10}\n", "Class", "Files", "Fragments");
        for c in &self.classes {
            let _ = writeln!(out, "{:<12} {:>8} {:>10}", c.label, c.files, c.fragments);
        }
        let _ = writeln!(
            out,
            "{:<12} {:>8} {:>10}  ({}-byte fragments)",
            "total", self.files, self.fragments, self.fragment_size
        );
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use sift_core::cv::StatsPolicy;
    use sift_core::{ClassLabel, ConfusionMatrix, Hyperparams};

    fn report() -> EvalReport {
        let labels = LabelSet::new(vec![ClassLabel::new("csv").unwrap(), ClassLabel::new("html").unwrap()]).unwrap();
        let matrix = ConfusionMatrix::from_rows(&[vec![9, 1], vec![3, 0]]).unwrap();
        let config = EvalConfig {
            fragment_size: 512,
            k: 10,
            seed: 1,
            hyper: Hyperparams::default(),
            stats_policy: StatsPolicy::PerFold,
            group_by_file: false,
            stratified: false,
        };
        EvalReport::from_matrix(labels, matrix, config, vec![])
    }

    #[test]
    fn confusion_csv_layout() {
        assert_eq!(confusion_csv(&report()), "true\\predicted,csv,html\ncsv,9,1\nhtml,3,0\n");
    }

    #[test]
    fn metrics_csv_has_weighted_row() {
        let csv = metrics_csv(&report());
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[2], "html,0,0.1,0,0,3");
        assert!(lines[3].starts_with("weighted_avg,"));
    }

    #[test]
    fn json_has_table_columns() {
        let v: serde_json::Value = serde_json::from_str(&to_json(&report())).unwrap();
        let html = &v["per_class"][1];
        assert_eq!(html["label"], "html");
        for key in ["tpr", "fpr", "precision", "f_measure", "support"] {
            assert!(html.get(key).is_some(), "{key}");
        }
        assert_eq!(v["confusion_matrix"][0][0], 9);
        assert_eq!(v["config"]["stats_policy"], "per-fold");
    }
}
