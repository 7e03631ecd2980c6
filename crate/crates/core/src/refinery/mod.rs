//! Rule-based validation of candidate rows into [`ClubRecord`]s.
//!
//! Per row: noise filter, column realignment, double-name split, business-ID
//! validation, member-count parsing, record assembly. Every dropped row and
//! every mutated row yields exactly one issue; missing, invalid and
//! ambiguous fields add their own.

mod business_id;
mod count;
mod names;

use std::collections::BTreeSet;

use regex::Regex;
use serde::Serialize;

pub use business_id::{
    compute_check_digit, validate_business_id, BusinessId, CheckDigitError, InvalidReason,
};
pub use count::parse_member_count;

use crate::extraction::RawRow;
pub use crate::issues::{IssueKind, Severity, ValidationIssue};

pub const DEFAULT_NOISE_STOPWORDS: [&str; 10] = [
    "okm",
    "yhteensä",
    "totalt",
    "summa",
    "total",
    "sivu",
    "page",
    "jäsenseurat",
    "seuran nimi",
    "y-tunnus",
];

pub const DEFAULT_ASSOC_SUFFIXES: [&str; 6] = ["ry", "r.y.", "rf", "r.f.", "ry.", "rf."];

/// Count-shaped cells above this are not member counts.
pub const COUNT_SANITY_BOUND: u64 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum RecordFlag {
    NameSplit,
    Realigned,
    CountAmbiguous,
    IdInvalid,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClubRecord {
    pub club_name: String,
    pub alt_name: Option<String>,
    /// Canonical when valid; the raw value when flagged `IdInvalid`.
    pub business_id: Option<String>,
    pub member_count: Option<u64>,
    pub source_file: String,
    pub source_page: u32,
    pub flags: BTreeSet<RecordFlag>,
}

/// A row mapped onto the output columns, before field validation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlignedRow {
    pub name: String,
    pub alt: Option<String>,
    pub business_id: String,
    pub member_count: String,
    pub realigned: bool,
    pub name_split: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Unparseable(pub String);

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RefineOutcome {
    pub records: Vec<ClubRecord>,
    pub issues: Vec<ValidationIssue>,
    /// Noise rows plus unparseable rows.
    pub dropped: usize,
}

#[derive(Debug, Clone)]
pub struct Refinery {
    stopwords: Vec<String>,
    suffixes: Vec<String>,
    id_shape: Regex,
    count_shape: Regex,
}

impl Default for Refinery {
    fn default() -> Self {
        Self::new(
            DEFAULT_NOISE_STOPWORDS.iter().map(|s| s.to_string()).collect(),
            DEFAULT_ASSOC_SUFFIXES.iter().map(|s| s.to_string()).collect(),
        )
    }
}

impl Refinery {
    pub fn new(stopwords: Vec<String>, suffixes: Vec<String>) -> Self {
        let fold = |v: Vec<String>| v.into_iter().map(|s| s.trim().to_lowercase()).collect();
        Self {
            stopwords: fold(stopwords),
            suffixes: fold(suffixes),
            id_shape: Regex::new(r"^\d{6,7}-?\d$").expect("static regex"),
            count_shape: Regex::new(r"^(?:\d+|\d{1,3}(?:[ .\u{a0}\u{2009}\u{202f}]\d{3})+)$")
                .expect("static regex"),
        }
    }

    pub fn is_id_shaped(&self, cell: &str) -> bool {
        self.id_shape.is_match(cell.trim())
    }

    pub fn is_count_shaped(&self, cell: &str) -> bool {
        let cell = cell.trim();
        self.count_shape.is_match(cell)
            && matches!(parse_member_count(cell), (Some(v), false) if v < COUNT_SANITY_BOUND)
    }

    pub fn split_double_name(&self, cell: &str) -> (String, Option<String>) {
        names::split_double_name(cell, &self.suffixes)
    }

    /// Header, title, total and empty rows. A row holding a checksum-valid
    /// business ID is never noise.
    pub fn is_noise_row(&self, row: &RawRow) -> bool {
        if row.cells.iter().any(|c| validate_business_id(c).is_ok()) {
            return false;
        }
        let non_empty: Vec<&str> = row
            .cells
            .iter()
            .map(|c| c.trim())
            .filter(|c| !c.is_empty())
            .collect();
        let Some(first) = non_empty.first() else {
            return true;
        };
        if self.stopwords.contains(&first.to_lowercase()) {
            return true;
        }
        non_empty.len() == 1
            && !first.chars().any(|c| c.is_ascii_digit())
            && !names::has_suffix(first, &self.suffixes)
    }

    /// Maps a row onto (name, alt, business_id, member_count).
    ///
    /// Canonical four-cell rows pass through. Otherwise the single
    /// ID-shaped cell anchors the row: cells before it form the name and the
    /// trailing cell after it is the count. Rows without an ID-shaped cell
    /// are read positionally (`name`, `name|count`, `name|id|count`,
    /// `name|alt|id|count`), moving a lone count-shaped cell into place.
    pub fn realign_row(&self, row: &RawRow) -> Result<AlignedRow, Unparseable> {
        let cells: Vec<&str> = row.cells.iter().map(|c| c.trim()).collect();
        let id_at: Vec<usize> = (0..cells.len()).filter(|&i| self.is_id_shaped(cells[i])).collect();
        let count_at: Vec<usize> = (0..cells.len())
            .filter(|&i| self.is_count_shaped(cells[i]) && !id_at.contains(&i))
            .collect();

        let aligned = if cells.len() == 4
            && !names::is_suffix_token(cells[1], &self.suffixes)
            && id_at.iter().all(|&i| i == 2)
            && count_at.iter().all(|&i| i == 3)
        {
            self.assemble(cells[0], cells[1], cells[2], cells[3], false)?
        } else if id_at.len() > 1 {
            return Err(Unparseable("more than one business-ID-shaped cell".into()));
        } else if let [k] = id_at[..] {
            let mut name_cells: Vec<&str> = cells[..k].iter().copied().filter(|c| !c.is_empty()).collect();
            let tail: Vec<&str> = cells[k + 1..].iter().copied().filter(|c| !c.is_empty()).collect();
            let count = match tail[..] {
                [] => {
                    // Count pushed in front of the ID.
                    let moved: Vec<usize> = (1..name_cells.len())
                        .filter(|&i| self.is_count_shaped(name_cells[i]))
                        .collect();
                    match moved[..] {
                        [i] => name_cells.remove(i),
                        [] => "",
                        _ => return Err(Unparseable("cannot tell which cell is the member count".into())),
                    }
                }
                [only] => only,
                _ => {
                    let counts: Vec<&str> = tail.iter().copied().filter(|c| self.is_count_shaped(c)).collect();
                    match counts[..] {
                        [only] => only,
                        _ => return Err(Unparseable("cannot tell which cell is the member count".into())),
                    }
                }
            };
            if name_cells.is_empty() {
                return Err(Unparseable("no club name before the business ID".into()));
            }
            self.assemble(&name_cells.join(" "), "", cells[k], count, true)?
        } else {
            let name = cells.first().copied().unwrap_or_default();
            if name.is_empty() || self.is_count_shaped(name) {
                return Err(Unparseable("no club name in the first cell".into()));
            }
            let (alt_idx, id_idx, count_idx) = match cells.len() {
                1 => (None, None, None),
                2 => (None, None, Some(1)),
                3 => (None, Some(1), Some(2)),
                4 => (Some(1), Some(2), Some(3)),
                n => return Err(Unparseable(format!("{n} cells and no business ID to anchor them"))),
            };
            let slot = |idx: Option<usize>| idx.map_or("", |i| cells[i]);
            let (mut alt, mut id, mut count) = (slot(alt_idx), slot(id_idx), slot(count_idx));
            let mut moved = false;
            match count_at[..] {
                [] => {}
                [c] if Some(c) == count_idx => {}
                [c] => {
                    if !count.is_empty() {
                        return Err(Unparseable("member count is out of place".into()));
                    }
                    count = cells[c];
                    if Some(c) == alt_idx {
                        alt = "";
                    } else if Some(c) == id_idx {
                        id = "";
                    }
                    moved = true;
                }
                _ => return Err(Unparseable("more than one count-shaped cell".into())),
            }
            self.assemble(name, alt, id, count, moved)?
        };
        Ok(aligned)
    }

    fn assemble(
        &self,
        name: &str,
        alt: &str,
        business_id: &str,
        member_count: &str,
        realigned: bool,
    ) -> Result<AlignedRow, Unparseable> {
        if name.trim().is_empty() {
            return Err(Unparseable("empty club name".into()));
        }
        let (name, alt, name_split) = if alt.is_empty() {
            let (primary, alt) = self.split_double_name(name);
            let split = alt.is_some();
            (primary, alt, split)
        } else {
            (name.to_owned(), Some(alt.to_owned()), false)
        };
        Ok(AlignedRow {
            name,
            alt,
            business_id: business_id.to_owned(),
            member_count: member_count.to_owned(),
            realigned,
            name_split,
        })
    }

    pub fn refine_rows(&self, rows: &[RawRow], file_stem: &str) -> RefineOutcome {
        let mut out = RefineOutcome::default();
        for row in rows {
            let issue = |kind: IssueKind, message: String| {
                ValidationIssue::new(kind, file_stem, row.source_page, Some(row.line_no), message)
                    .with_part(row.part_index)
            };
            if self.is_noise_row(row) {
                out.dropped += 1;
                out.issues.push(issue(
                    IssueKind::NoiseRowDropped,
                    format!("dropped non-data row `{}`", row.cells.join("|")),
                ));
                continue;
            }
            let aligned = match self.realign_row(row) {
                Ok(aligned) => aligned,
                Err(Unparseable(reason)) => {
                    out.dropped += 1;
                    out.issues.push(issue(
                        IssueKind::UnparseableRow,
                        format!("{reason}: `{}`", row.cells.join("|")),
                    ));
                    continue;
                }
            };

            let mut flags = BTreeSet::new();
            if aligned.name_split {
                flags.insert(RecordFlag::NameSplit);
                out.issues.push(issue(
                    IssueKind::DoubleNameSplit,
                    format!(
                        "split `{}` / `{}`",
                        aligned.name,
                        aligned.alt.as_deref().unwrap_or_default()
                    ),
                ));
            } else if aligned.realigned {
                out.issues.push(issue(
                    IssueKind::MisalignedColumns,
                    format!("realigned `{}`", row.cells.join("|")),
                ));
            }
            if aligned.realigned {
                flags.insert(RecordFlag::Realigned);
            }

            let business_id = if aligned.business_id.is_empty() {
                out.issues.push(issue(IssueKind::MissingField, "business_id is empty".into()));
                None
            } else {
                match validate_business_id(&aligned.business_id) {
                    Ok(id) => Some(id.into_string()),
                    Err(reason) => {
                        flags.insert(RecordFlag::IdInvalid);
                        out.issues.push(issue(
                            IssueKind::InvalidBusinessId,
                            format!("`{}`: {reason}", aligned.business_id),
                        ));
                        Some(aligned.business_id.clone())
                    }
                }
            };

            let (member_count, ambiguous) = parse_member_count(&aligned.member_count);
            if member_count.is_none() {
                out.issues.push(issue(IssueKind::MissingField, "member_count is empty".into()));
            } else if ambiguous {
                flags.insert(RecordFlag::CountAmbiguous);
                out.issues.push(issue(
                    IssueKind::AmbiguousCount,
                    format!("took the first number of `{}`", aligned.member_count),
                ));
            }

            out.records.push(ClubRecord {
                club_name: aligned.name,
                alt_name: aligned.alt,
                business_id,
                member_count,
                source_file: file_stem.to_owned(),
                source_page: row.source_page,
                flags,
            });
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn row(cells: &[&str]) -> RawRow {
        RawRow {
            cells: cells.iter().map(|c| c.to_string()).collect(),
            source_page: 0,
            part_index: None,
            line_no: 1,
        }
    }

    fn kinds(issues: &[ValidationIssue]) -> Vec<IssueKind> {
        issues.iter().map(|i| i.kind).collect()
    }

    #[test]
    fn noise_rows() {
        let r = Refinery::default();
        assert!(r.is_noise_row(&row(&["OKM"])));
        assert!(r.is_noise_row(&row(&["Yhteensä", "", "8123"])));
        assert!(r.is_noise_row(&row(&["SEURAN NIMI", "Y-tunnus", "Jäseniä"])));
        assert!(r.is_noise_row(&row(&["", "", ""])));
        assert!(r.is_noise_row(&row(&["Uinti"])));
        assert!(!r.is_noise_row(&row(&["Seura ry", "0123456-2", "150"])));
        assert!(!r.is_noise_row(&row(&["Seura ry"])));
        assert!(!r.is_noise_row(&row(&["Yhteensä", "0123456-2", "150"])));
    }

    #[test]
    fn passes_aligned_rows_through() {
        let r = Refinery::default();
        let aligned = r.realign_row(&row(&["Seura ry", "", "0123456-2", "150"])).unwrap();
        assert_eq!(aligned.name, "Seura ry");
        assert_eq!(aligned.alt, None);
        assert_eq!(aligned.business_id, "0123456-2");
        assert_eq!(aligned.member_count, "150");
        assert!(!aligned.realigned);
    }

    #[test]
    fn double_name_row_is_realigned_and_split() {
        let r = Refinery::default();
        let aligned = r
            .realign_row(&row(&["Helsingin Uimarit ry - Helsingfors Simmare rf", "0123456-2", "150"]))
            .unwrap();
        assert_eq!(aligned.name, "Helsingin Uimarit ry");
        assert_eq!(aligned.alt.as_deref(), Some("Helsingfors Simmare rf"));
        assert_eq!(aligned.business_id, "0123456-2");
        assert_eq!(aligned.member_count, "150");
        assert!(aligned.realigned && aligned.name_split);
    }

    #[test]
    fn split_name_cells_are_rejoined() {
        let r = Refinery::default();
        let aligned = r.realign_row(&row(&["Seura", "ry", "0123456-2", "150"])).unwrap();
        assert_eq!(aligned.name, "Seura ry");
        assert!(aligned.realigned);
        assert_eq!(aligned.member_count, "150");
    }

    #[test]
    fn count_in_front_of_id_is_moved() {
        let r = Refinery::default();
        let aligned = r.realign_row(&row(&["Seura ry", "150", "0123456-2", ""])).unwrap();
        assert_eq!((aligned.name.as_str(), aligned.member_count.as_str()), ("Seura ry", "150"));
        let aligned = r.realign_row(&row(&["Seura ry", "150", "", ""])).unwrap();
        assert_eq!(aligned.member_count, "150");
        assert_eq!(aligned.alt, None);
        assert!(aligned.realigned);
    }

    #[test]
    fn unreconstructable_rows() {
        let r = Refinery::default();
        for cells in [
            &["A ry", "0123456-2", "7654321-0", "5"][..],
            &["0123456-2", "150"],
            &["150", "", "", ""],
            &["A ry", "b", "c", "d", "e"],
            &["A ry", "0123456-2", "10", "20"],
        ] {
            assert!(r.realign_row(&row(cells)).is_err(), "{cells:?}");
        }
    }

    #[test]
    fn clean_rows_produce_no_issues() {
        let r = Refinery::default();
        let rows = [
            row(&["Seura ry", "", "0123456-2", "150"]),
            row(&["Vaasan Uimarit ry", "Vasa Simmare rf", "123456-2", "1 234"]),
            row(&["Toinen ry", "", "01234562", "0"]),
        ];
        let out = r.refine_rows(&rows, "fed");
        assert_eq!(out.records.len(), 3);
        assert!(out.issues.is_empty(), "{:?}", out.issues);
        assert_eq!(out.records[1].business_id.as_deref(), Some("0123456-2"));
        assert_eq!(out.records[1].member_count, Some(1234));
        assert_eq!(out.records[1].alt_name.as_deref(), Some("Vasa Simmare rf"));
        assert!(out.records.iter().all(|r| r.flags.is_empty() && r.source_file == "fed"));
    }

    #[test]
    fn noise_rows_are_dropped_with_info_issues() {
        let r = Refinery::default();
        let rows = [
            row(&["OKM"]),
            row(&["Seura ry", "", "0123456-2", "150"]),
            row(&["Yhteensä", "", "8123"]),
        ];
        let out = r.refine_rows(&rows, "fed");
        assert_eq!(out.records.len(), 1);
        assert_eq!(out.dropped, 2);
        assert_eq!(kinds(&out.issues), [IssueKind::NoiseRowDropped; 2]);
        assert!(out.issues.iter().all(|i| i.severity == Severity::Info));
    }

    #[test]
    fn missing_fields_are_warned() {
        let out = Refinery::default().refine_rows(&[row(&["Seura ry", "", "*"])], "fed");
        assert_eq!(out.records.len(), 1);
        assert_eq!(out.records[0].business_id, None);
        assert_eq!(out.records[0].member_count, None);
        assert_eq!(kinds(&out.issues), [IssueKind::MissingField; 2]);
        assert!(out.issues.iter().all(|i| i.severity == Severity::Warn));
    }

    #[test]
    fn invalid_ids_are_kept_and_flagged() {
        let out = Refinery::default().refine_rows(&[row(&["Seura ry", "", "0123456-3", "15"])], "fed");
        let record = &out.records[0];
        assert_eq!(record.business_id.as_deref(), Some("0123456-3"));
        assert!(record.flags.contains(&RecordFlag::IdInvalid));
        assert_eq!(kinds(&out.issues), [IssueKind::InvalidBusinessId]);
        assert_eq!(out.issues[0].severity, Severity::Error);
    }

    #[test]
    fn ambiguous_count_takes_first_number() {
        let out = Refinery::default()
            .refine_rows(&[row(&["Seura ry", "", "0123456-2", "150 (12 kunniajäsentä)"])], "fed");
        assert_eq!(out.records[0].member_count, Some(150));
        assert!(out.records[0].flags.contains(&RecordFlag::CountAmbiguous));
        assert_eq!(kinds(&out.issues), [IssueKind::AmbiguousCount]);
    }

    #[test]
    fn one_issue_per_mutated_row() {
        let out = Refinery::default().refine_rows(
            &[
                row(&["Helsingin Uimarit ry - Helsingfors Simmare rf", "0123456-2", "150"]),
                row(&["Seura", "ry", "0123456-2", "150"]),
            ],
            "fed",
        );
        assert_eq!(
            kinds(&out.issues),
            [IssueKind::DoubleNameSplit, IssueKind::MisalignedColumns]
        );
        assert!(out.records[0].flags.contains(&RecordFlag::NameSplit));
        assert!(out.records[1].flags.contains(&RecordFlag::Realigned));
    }

    #[test]
    fn configured_lists_replace_defaults() {
        let r = Refinery::new(vec!["Liitto".into()], vec!["ry".into()]);
        assert!(r.is_noise_row(&row(&["LIITTO", "", "1"])));
        assert!(!r.is_noise_row(&row(&["Okm", "", "1"])));
    }

    fn valid_id() -> impl Strategy<Value = String> {
        (0u32..10_000_000).prop_filter_map("remainder-1 base", |base| {
            let base = format!("{base:07}");
            compute_check_digit(&base).ok().map(|c| format!("{base}-{c}"))
        })
    }

    fn any_cell() -> impl Strategy<Value = String> {
        prop_oneof![
            Just(String::new()),
            Just("OKM".to_owned()),
            Just("Yhteensä".to_owned()),
            Just("total".to_owned()),
            "[a-zA-Zäö ]{0,12}",
            "[0-9 ]{0,6}",
        ]
    }

    fn any_row() -> impl Strategy<Value = Vec<String>> {
        prop::collection::vec(
            prop_oneof![
                3 => any_cell(),
                1 => valid_id(),
                1 => "[A-ZÄÖ][a-zäö]{2,8} (ry|rf)",
                1 => "[0-9]{1,4}",
            ],
            1..7,
        )
    }

    proptest! {
        #[test]
        fn valid_id_rows_are_never_noise(mut cells in prop::collection::vec(any_cell(), 0..6), id in valid_id(), at in 0usize..6) {
            let at = at.min(cells.len());
            cells.insert(at, id);
            let raw = RawRow { cells, source_page: 0, part_index: None, line_no: 1 };
            prop_assert!(!Refinery::default().is_noise_row(&raw));
        }

        #[test]
        fn refinement_accounts_for_every_row(rows in prop::collection::vec(any_row(), 0..20)) {
            let raws: Vec<RawRow> = rows
                .into_iter()
                .enumerate()
                .map(|(i, cells)| RawRow { cells, source_page: 0, part_index: None, line_no: i as u32 + 1 })
                .collect();
            let r = Refinery::default();
            let out = r.refine_rows(&raws, "fed");
            prop_assert_eq!(out.records.len() + out.dropped, raws.len());
            let count = |k: &[IssueKind]| out.issues.iter().filter(|i| k.contains(&i.kind)).count();
            prop_assert_eq!(count(&[IssueKind::NoiseRowDropped, IssueKind::UnparseableRow]), out.dropped);
            let mutated = out
                .records
                .iter()
                .filter(|r| r.flags.contains(&RecordFlag::NameSplit) || r.flags.contains(&RecordFlag::Realigned))
                .count();
            prop_assert_eq!(count(&[IssueKind::DoubleNameSplit, IssueKind::MisalignedColumns]), mutated);
            for record in &out.records {
                prop_assert!(!record.club_name.trim().is_empty());
                if let Some(id) = &record.business_id {
                    if !record.flags.contains(&RecordFlag::IdInvalid) {
                        prop_assert!(validate_business_id(id).is_ok());
                    }
                }
            }
            // Deterministic.
            prop_assert_eq!(r.refine_rows(&raws, "fed"), out);
        }
    }
}
