use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Info,
    Warn,
    Error,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum IssueKind {
    NoiseRowDropped,
    DoubleNameSplit,
    MisalignedColumns,
    InvalidBusinessId,
    MissingField,
    AmbiguousCount,
    UnparseableRow,
    MissingSentinels,
    EmptyResponse,
    UnterminatedBlock,
    PageSkipped,
    /// The provider could not produce a response for a page (or page part).
    ProviderFailure,
    /// The document's pages could not be loaded at all.
    IngestFailure,
}

impl IssueKind {
    pub fn severity(self) -> Severity {
        use IssueKind::*;
        match self {
            NoiseRowDropped | PageSkipped => Severity::Info,
            DoubleNameSplit | MisalignedColumns | MissingSentinels | MissingField
            | AmbiguousCount | UnterminatedBlock => Severity::Warn,
            UnparseableRow | InvalidBusinessId | EmptyResponse | ProviderFailure
            | IngestFailure => Severity::Error,
        }
    }
}

impl fmt::Display for IssueKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// One machine-readable finding about a file, page or row.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationIssue {
    pub kind: IssueKind,
    pub severity: Severity,
    pub file_stem: String,
    pub source_page: u32,
    /// Set when the page was split to fit the provider budget.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub part_index: Option<u32>,
    pub line_no: Option<u32>,
    pub message: String,
}

impl ValidationIssue {
    pub fn new(
        kind: IssueKind,
        file_stem: impl Into<String>,
        source_page: u32,
        line_no: Option<u32>,
        message: impl Into<String>,
    ) -> Self {
        Self {
            kind,
            severity: kind.severity(),
            file_stem: file_stem.into(),
            source_page,
            part_index: None,
            line_no,
            message: message.into(),
        }
    }

    pub fn with_part(mut self, part_index: Option<u32>) -> Self {
        self.part_index = part_index;
        self
    }
}
