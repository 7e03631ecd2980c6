use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::issues::{IssueKind, Severity, ValidationIssue};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Outcome {
    Clean,
    CorrectedAutomatically,
    ManualRequired,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Clean => "Clean",
            Self::CorrectedAutomatically => "CorrectedAutomatically",
            Self::ManualRequired => "ManualRequired",
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Outcome {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "Clean" => Ok(Self::Clean),
            "CorrectedAutomatically" => Ok(Self::CorrectedAutomatically),
            "ManualRequired" => Ok(Self::ManualRequired),
            other => Err(format!("unknown outcome `{other}`")),
        }
    }
}

/// Row bookkeeping for one file, needed alongside the issues.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RowStats {
    pub rows_emitted: usize,
    pub rows_dropped: usize,
    /// Pages with non-blank input text that yielded no candidate rows.
    pub barren_pages: usize,
}

/// Buckets a file.
///
/// ManualRequired when a page came back empty, a provider or ingest failure
/// lost input, a non-blank page produced no rows, or error issues touch more
/// than `manual_error_ratio` of the rows. Otherwise any warning or error
/// means CorrectedAutomatically.
pub fn classify_outcome(issues: &[ValidationIssue], stats: RowStats, manual_error_ratio: f64) -> Outcome {
    let lost_input = issues.iter().any(|i| {
        matches!(
            i.kind,
            IssueKind::EmptyResponse | IssueKind::ProviderFailure | IssueKind::IngestFailure
        )
    });
    if lost_input || stats.barren_pages > 0 {
        return Outcome::ManualRequired;
    }

    let rows_with_errors: BTreeSet<(u32, Option<u32>, u32)> = issues
        .iter()
        .filter(|i| i.severity == Severity::Error)
        .filter_map(|i| i.line_no.map(|line| (i.source_page, i.part_index, line)))
        .collect();
    let total_rows = stats.rows_emitted + stats.rows_dropped;
    if total_rows > 0 && rows_with_errors.len() as f64 > manual_error_ratio * total_rows as f64 {
        return Outcome::ManualRequired;
    }

    if issues.iter().any(|i| i.severity >= Severity::Warn) {
        Outcome::CorrectedAutomatically
    } else {
        Outcome::Clean
    }
}
