//! Evaluation reports: JSON for machines, tab-separated for tables.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Which per-query metric a run averaged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricKind {
    Recall,
    Success,
}

impl MetricKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            MetricKind::Recall => "recall",
            MetricKind::Success => "success",
        }
    }
}

/// One evaluation run over one dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub dataset: String,
    pub metric: MetricKind,
    pub ks: Vec<usize>,
    /// "recall@3" -> mean value in [0, 1].
    pub values: BTreeMap<String, f64>,
    /// query id -> metric name -> value.
    pub per_query: BTreeMap<String, BTreeMap<String, f64>>,
    pub judged_queries: usize,
    pub skipped_queries: usize,
    pub config_snapshot: serde_json::Value,
}

impl MetricReport {
    pub fn metric_name(metric: MetricKind, k: usize) -> String {
        format!("{}@{k}", metric.as_str())
    }

    pub fn value(&self, k: usize) -> Option<f64> {
        self.values.get(&Self::metric_name(self.metric, k)).copied()
    }

    pub fn to_json_pretty(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Header plus one row, suitable for concatenating reports into a table.
    pub fn tsv_header(&self) -> String {
        let mut cols = vec!["dataset".to_string(), "metric".to_string(), "config".to_string()];
        cols.extend(self.ks.iter().map(|k| format!("@{k}")));
        cols.join("\t")
    }

    pub fn tsv_row(&self, label: &str) -> String {
        let mut cols = vec![self.dataset.clone(), self.metric.as_str().to_string(), label.to_string()];
        for k in &self.ks {
            cols.push(
                self.value(*k)
                    .map(|v| format!("{v:.4}"))
                    .unwrap_or_else(|| "-".into()),
            );
        }
        cols.join("\t")
    }
}

/// Renders a group of reports (e.g. an ablation sweep) as one TSV table.
pub fn reports_to_tsv(reports: &[(String, &MetricReport)]) -> String {
    let mut out = String::new();
    if let Some((_, first)) = reports.first() {
        out.push_str(&first.tsv_header());
        out.push('\n');
    }
    for (label, report) in reports {
        out.push_str(&report.tsv_row(label));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_renders_tsv() {
        let mut values = BTreeMap::new();
        values.insert("recall@3".to_string(), 0.5);
        values.insert("recall@10".to_string(), 0.75);
        let report = MetricReport {
            dataset: "fixture".into(),
            metric: MetricKind::Recall,
            ks: vec![3, 10],
            values,
            per_query: BTreeMap::new(),
            judged_queries: 4,
            skipped_queries: 0,
            config_snapshot: serde_json::json!({}),
        };
        let tsv = reports_to_tsv(&[("combined".to_string(), &report)]);
        assert_eq!(
            tsv,
            "dataset\tmetric\tconfig\t@3\t@10\nfixture\trecall\tcombined\t0.5000\t0.7500\n"
        );
    }
}
