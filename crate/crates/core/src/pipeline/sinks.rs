//! CSV and workbook outputs.

use std::collections::{BTreeSet, HashSet};
use std::io::{Read, Write};
use std::path::Path;

use rust_xlsxwriter::{DocProperties, ExcelDateTime, Workbook, XlsxError};
use thiserror::Error;

use crate::refinery::ClubRecord;

pub const CSV_HEADER: [&str; 6] = [
    "club_name",
    "alt_name",
    "business_id",
    "member_count",
    "source_file",
    "source_page",
];

/// Excel's limit on worksheet names.
pub const MAX_SHEET_NAME_CHARS: usize = 31;

#[derive(Debug, Error)]
pub enum SinkError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("workbook: {0}")]
    Workbook(#[from] XlsxError),
    #[error("line {line}: {message}")]
    BadRecord { line: u64, message: String },
}

/// Writes `records` with the fixed header. Returns the number of data rows.
pub fn write_records<W: Write>(records: &[ClubRecord], out: W) -> Result<usize, SinkError> {
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    writer.write_record(CSV_HEADER)?;
    for r in records {
        let count = r.member_count.map(|c| c.to_string()).unwrap_or_default();
        let page = r.source_page.to_string();
        writer.write_record([
            r.club_name.as_str(),
            r.alt_name.as_deref().unwrap_or_default(),
            r.business_id.as_deref().unwrap_or_default(),
            count.as_str(),
            r.source_file.as_str(),
            page.as_str(),
        ])?;
    }
    writer.flush()?;
    Ok(records.len())
}

pub fn write_records_csv(records: &[ClubRecord], path: &Path) -> Result<usize, SinkError> {
    let file = std::fs::File::create(path)?;
    let mut out = std::io::BufWriter::new(file);
    let n = write_records(records, &mut out)?;
    out.flush()?;
    Ok(n)
}

/// Reads a table in the [`write_records`] layout (golden files, earlier runs).
pub fn read_records<R: Read>(input: R) -> Result<Vec<ClubRecord>, SinkError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let header = reader.headers()?.clone();
    if header.iter().map(str::trim).ne(CSV_HEADER) {
        return Err(SinkError::BadRecord {
            line: 1,
            message: format!("unexpected header `{}`", header.iter().collect::<Vec<_>>().join(",")),
        });
    }
    let mut records = Vec::new();
    for row in reader.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        let field = |i: usize| row.get(i).unwrap_or_default().trim();
        let optional = |i: usize| Some(field(i).to_owned()).filter(|s| !s.is_empty());
        let bad = |message: String| SinkError::BadRecord { line, message };
        let member_count = match field(3) {
            "" => None,
            raw => Some(raw.parse().map_err(|_| bad(format!("member_count `{raw}`")))?),
        };
        let source_page = match field(5) {
            "" => 0,
            raw => raw.parse().map_err(|_| bad(format!("source_page `{raw}`")))?,
        };
        records.push(ClubRecord {
            club_name: field(0).to_owned(),
            alt_name: optional(1),
            business_id: optional(2),
            member_count,
            source_file: field(4).to_owned(),
            source_page,
            flags: BTreeSet::new(),
        });
    }
    Ok(records)
}

pub fn read_records_csv(path: &Path) -> Result<Vec<ClubRecord>, SinkError> {
    read_records(std::fs::File::open(path)?)
}

/// Worksheet names for `stems`: forbidden characters replaced, truncated to
/// 31 characters, and suffixed `~N` where truncation causes a collision.
pub fn sheet_names<S: AsRef<str>>(stems: &[S]) -> Vec<String> {
    let mut taken: HashSet<String> = HashSet::new();
    let mut names = Vec::with_capacity(stems.len());
    for stem in stems {
        let cleaned: String = stem
            .as_ref()
            .chars()
            .map(|c| if "[]:*?/\\".contains(c) { '_' } else { c })
            .collect();
        let cleaned = cleaned.trim_matches('\'');
        let base: String = if cleaned.is_empty() { "sheet" } else { cleaned }
            .chars()
            .take(MAX_SHEET_NAME_CHARS)
            .collect();
        let mut name = base.clone();
        let mut n = 1;
        // Excel compares sheet names case-insensitively.
        while taken.contains(&name.to_lowercase()) {
            n += 1;
            let suffix = format!("~{n}");
            let keep = MAX_SHEET_NAME_CHARS - suffix.chars().count();
            name = base.chars().take(keep).collect::<String>() + &suffix;
        }
        taken.insert(name.to_lowercase());
        names.push(name);
    }
    names
}

/// Writes one worksheet per `(file_stem, records)` group. Returns the sheet count.
pub fn write_workbook(groups: &[(String, Vec<ClubRecord>)], path: &Path) -> Result<usize, SinkError> {
    let mut workbook = Workbook::new();
    // Fixed metadata so identical runs give identical files.
    let properties = DocProperties::new().set_creation_datetime(&ExcelDateTime::from_ymd(2024, 1, 1)?);
    workbook.set_properties(&properties);

    let stems: Vec<&str> = groups.iter().map(|(stem, _)| stem.as_str()).collect();
    for ((_, records), name) in groups.iter().zip(sheet_names(&stems)) {
        let sheet = workbook.add_worksheet();
        sheet.set_name(name)?;
        for (col, title) in CSV_HEADER.iter().enumerate() {
            sheet.write_string(0, col as u16, *title)?;
        }
        for (i, r) in records.iter().enumerate() {
            let row = i as u32 + 1;
            sheet.write_string(row, 0, &r.club_name)?;
            if let Some(alt) = &r.alt_name {
                sheet.write_string(row, 1, alt)?;
            }
            if let Some(id) = &r.business_id {
                sheet.write_string(row, 2, id)?;
            }
            if let Some(count) = r.member_count {
                sheet.write_number(row, 3, count as f64)?;
            }
            sheet.write_string(row, 4, &r.source_file)?;
            sheet.write_number(row, 5, f64::from(r.source_page))?;
        }
    }
    workbook.save(path)?;
    Ok(groups.len())
}
