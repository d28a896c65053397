use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::Evaluation;

/// One system's scores: token precision, recall, F1 and instance accuracy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub system: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub sentence: f64,
    pub instances: usize,
}

impl From<&Evaluation> for ReportRow {
    fn from(e: &Evaluation) -> Self {
        ReportRow {
            system: e.system.clone(),
            precision: e.tokens.precision,
            recall: e.tokens.recall,
            f1: e.tokens.f1,
            sentence: e.sentences.accuracy,
            instances: e.instances,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Report {
    pub rows: Vec<ReportRow>,
}

impl Report {
    pub fn new(rows: Vec<ReportRow>) -> Self {
        Report { rows }
    }

    pub fn from_evaluations<'a>(evals: impl IntoIterator<Item = &'a Evaluation>) -> Self {
        Report {
            rows: evals.into_iter().map(ReportRow::from).collect(),
        }
    }

    /// Fixed-width text table.
    pub fn table(&self) -> String {
        let w = self.rows.iter().map(|r| r.system.len()).max().unwrap_or(0).max(6);
        let mut out = String::new();
        writeln!(out, "{:<w$}  {:>9}  {:>6}  {:>6}  {:>8}  {:>8}", "System", "Precision", "Recall", "F1", "Sentence", "N").unwrap();
        for r in &self.rows {
            writeln!(
                out,
                "{:<w$}  {:>9.3}  {:>6.3}  {:>6.3}  {:>8.3}  {:>8}",
                r.system, r.precision, r.recall, r.f1, r.sentence, r.instances
            )
            .unwrap();
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_has_header_and_rows() {
        let r = Report::new(vec![ReportRow {
            system: "baseline".into(),
            precision: 0.5,
            recall: 0.25,
            f1: 1.0 / 3.0,
            sentence: 0.4,
            instances: 10,
        }]);
        let t = r.table();
        let lines: Vec<&str> = t.lines().collect();
        assert_eq!(lines.len(), 2);
        assert!(lines[0].starts_with("System"));
        assert!(lines[1].contains("0.333"));
        let back: Report = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(back, r);
    }
}
