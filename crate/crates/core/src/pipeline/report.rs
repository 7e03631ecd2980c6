use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::outcome::Outcome;
use crate::issues::ValidationIssue;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileReport {
    pub file_stem: String,
    pub pages_processed: usize,
    pub rows_emitted: usize,
    /// Noise and unparseable rows removed by the refinery.
    pub rows_dropped: usize,
    pub provider_calls: usize,
    pub issues: Vec<ValidationIssue>,
    pub outcome: Outcome,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Totals {
    pub files: usize,
    pub clean: usize,
    pub corrected: usize,
    pub manual: usize,
    pub rows: usize,
}

impl Totals {
    pub fn from_reports(reports: &[FileReport]) -> Self {
        let mut t = Totals {
            files: reports.len(),
            ..Totals::default()
        };
        for r in reports {
            t.rows += r.rows_emitted;
            match r.outcome {
                Outcome::Clean => t.clean += 1,
                Outcome::CorrectedAutomatically => t.corrected += 1,
                Outcome::ManualRequired => t.manual += 1,
            }
        }
        t
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunReport {
    pub started_at: String,
    pub config_digest: String,
    pub file_reports: Vec<FileReport>,
    pub totals: Totals,
    pub deterministic_digest: String,
}

impl RunReport {
    /// Sorts the file reports, fills in totals and the digest.
    pub fn assemble(started_at: String, config_digest: String, mut file_reports: Vec<FileReport>) -> Self {
        file_reports.sort_by(|a, b| a.file_stem.cmp(&b.file_stem));
        let totals = Totals::from_reports(&file_reports);
        let mut report = RunReport {
            started_at,
            config_digest,
            file_reports,
            totals,
            deterministic_digest: String::new(),
        };
        report.deterministic_digest = report.compute_digest();
        report
    }

    /// SHA-256 of the compact JSON report without `started_at` and the digest itself.
    pub fn compute_digest(&self) -> String {
        let mut value = serde_json::to_value(self).expect("report serializes");
        if let Value::Object(map) = &mut value {
            map.shift_remove("started_at");
            map.shift_remove("deterministic_digest");
        }
        crate::sha256_hex(value.to_string().as_bytes())
    }

    pub fn has_manual(&self) -> bool {
        self.totals.manual > 0
    }

    /// Process exit status: 0 when no file needs manual entry, 2 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.has_manual() {
            2
        } else {
            0
        }
    }
}

pub fn write_run_report(report: &RunReport, path: &Path) -> std::io::Result<()> {
    let mut text = serde_json::to_string_pretty(report).map_err(std::io::Error::other)?;
    text.push('\n');
    std::fs::write(path, text)
}

pub fn read_run_report(path: &Path) -> std::io::Result<RunReport> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))
}
