//! Record-block parsing.
//!
//! The prompt asks for
//!
//! ```text
//! #RECORDS
//! name|alt_name|business_id|member_count
//! ...
//! #END
//! ```
//!
//! Anything around the block is chatter and is dropped. Responses without
//! sentinels fall back to taking every line that contains a `|`.

use serde::Serialize;

use crate::issues::{IssueKind, ValidationIssue};

pub const BLOCK_START: &str = "#RECORDS";
pub const BLOCK_END: &str = "#END";

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RawRow {
    pub cells: Vec<String>,
    pub source_page: u32,
    pub part_index: Option<u32>,
    /// 1-based, counting only non-blank lines of the block.
    pub line_no: u32,
}

/// Where a response came from; stamped onto rows and issues.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PageOrigin {
    pub file_stem: String,
    pub page_index: u32,
    pub part_index: Option<u32>,
}

impl PageOrigin {
    pub fn new(file_stem: impl Into<String>, page_index: u32) -> Self {
        Self {
            file_stem: file_stem.into(),
            page_index,
            part_index: None,
        }
    }

    pub fn issue(&self, kind: IssueKind, line_no: Option<u32>, message: impl Into<String>) -> ValidationIssue {
        ValidationIssue::new(kind, self.file_stem.clone(), self.page_index, line_no, message)
            .with_part(self.part_index)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParsedResponse {
    pub rows: Vec<RawRow>,
    pub issues: Vec<ValidationIssue>,
}

/// Splits one record line on `|`, trimming every cell.
pub fn parse_row(line: &str, source_page: u32, line_no: u32) -> RawRow {
    RawRow {
        cells: line.split('|').map(|cell| cell.trim().to_owned()).collect(),
        source_page,
        part_index: None,
        line_no,
    }
}

pub fn parse_response(response_text: &str, origin: &PageOrigin) -> ParsedResponse {
    let mut parsed = ParsedResponse::default();
    if response_text.trim().is_empty() {
        parsed
            .issues
            .push(origin.issue(IssueKind::EmptyResponse, None, "provider returned no text"));
        return parsed;
    }

    let lines: Vec<&str> = response_text
        .split('\n')
        .map(|line| line.strip_suffix('\r').unwrap_or(line))
        .collect();
    let start = lines.iter().position(|l| l.trim() == BLOCK_START);

    let body: Vec<&str> = match start {
        Some(start) => {
            let rest = &lines[start + 1..];
            match rest.iter().position(|l| l.trim() == BLOCK_END) {
                Some(end) => rest[..end].to_vec(),
                None => {
                    parsed.issues.push(origin.issue(
                        IssueKind::UnterminatedBlock,
                        None,
                        "record block has no #END; response may be truncated",
                    ));
                    rest.to_vec()
                }
            }
        }
        None => {
            parsed.issues.push(origin.issue(
                IssueKind::MissingSentinels,
                None,
                "no #RECORDS block; parsed every line containing `|`",
            ));
            lines.iter().copied().filter(|l| l.contains('|')).collect()
        }
    };

    let mut line_no = 0;
    for line in body.iter().filter(|l| !l.trim().is_empty()) {
        line_no += 1;
        let mut row = parse_row(line, origin.page_index, line_no);
        row.part_index = origin.part_index;
        parsed.rows.push(row);
    }
    parsed
}

/// Renders rows as a record block; the inverse of [`parse_response`] for
/// cells free of `|` and surrounding whitespace.
pub fn render_block<S: AsRef<str>>(rows: &[Vec<S>]) -> String {
    let mut out = String::from(BLOCK_START);
    out.push('\n');
    for row in rows {
        let cells: Vec<&str> = row.iter().map(AsRef::as_ref).collect();
        out.push_str(&cells.join("|"));
        out.push('\n');
    }
    out.push_str(BLOCK_END);
    out.push('\n');
    out
}
