//! Scoring produced tables against golden tables.
//!
//! Records are matched by normalized club name. Each golden record is worth
//! four data points (name, alt_name, business_id, member_count).

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use serde::Serialize;
use thiserror::Error;

use crate::pipeline::{read_records_csv, read_run_report, Outcome, SinkError, PER_FILE_CSV_DIR, RUN_REPORT};
use crate::refinery::{validate_business_id, ClubRecord};

pub const POINTS_PER_RECORD: u64 = 4;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("golden table has two records keyed `{0}`")]
    DuplicateGoldenKey(String),
    #[error("{path}: {source}")]
    Table { path: String, source: SinkError },
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub completeness: f64,
    pub robustness: f64,
    pub matched_points: u64,
    pub golden_points: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Mismatch {
    MissingRecord { club_name: String },
    UnexpectedRecord { club_name: String },
    Field {
        club_name: String,
        field: &'static str,
        golden: String,
        produced: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    /// `robustness` is 1.0 here; it is a per-file property set by
    /// [`evaluate_run`] from the file's outcome.
    pub metrics: Metrics,
    pub golden_records: u64,
    pub complete_records: u64,
    pub mismatches: Vec<Mismatch>,
}

/// Case-folded, whitespace-collapsed form used as the match key.
pub fn normalize_key(name: &str) -> String {
    name.split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase()
}

fn normalize_opt(value: Option<&str>) -> String {
    value.map(normalize_key).unwrap_or_default()
}

fn canonical_id(value: Option<&str>) -> String {
    match value.map(str::trim).filter(|v| !v.is_empty()) {
        None => String::new(),
        Some(raw) => validate_business_id(raw)
            .map(|id| id.into_string())
            .unwrap_or_else(|_| raw.to_owned()),
    }
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        1.0
    } else {
        num as f64 / den as f64
    }
}

/// Scores one file's produced records against its golden records.
pub fn compare_tables(golden: &[ClubRecord], produced: &[ClubRecord]) -> Result<Comparison, EvalError> {
    let mut golden_keys = HashMap::new();
    for g in golden {
        if golden_keys.insert(normalize_key(&g.club_name), ()).is_some() {
            return Err(EvalError::DuplicateGoldenKey(g.club_name.clone()));
        }
    }
    let mut by_key: HashMap<String, Vec<usize>> = HashMap::new();
    for (i, p) in produced.iter().enumerate().rev() {
        by_key.entry(normalize_key(&p.club_name)).or_default().push(i);
    }
    let mut used = vec![false; produced.len()];

    let mut matched = 0;
    let mut complete = 0;
    let mut mismatches = Vec::new();
    for g in golden {
        let Some(i) = by_key.get_mut(&normalize_key(&g.club_name)).and_then(Vec::pop) else {
            mismatches.push(Mismatch::MissingRecord {
                club_name: g.club_name.clone(),
            });
            continue;
        };
        used[i] = true;
        let p = &produced[i];
        matched += 1;
        let fields = [
            ("alt_name", normalize_opt(g.alt_name.as_deref()), normalize_opt(p.alt_name.as_deref())),
            ("business_id", canonical_id(g.business_id.as_deref()), canonical_id(p.business_id.as_deref())),
            (
                "member_count",
                g.member_count.map(|c| c.to_string()).unwrap_or_default(),
                p.member_count.map(|c| c.to_string()).unwrap_or_default(),
            ),
        ];
        for (field, want, got) in fields {
            if want == got {
                matched += 1;
            } else {
                mismatches.push(Mismatch::Field {
                    club_name: g.club_name.clone(),
                    field,
                    golden: want,
                    produced: got,
                });
            }
        }
        let has_id = p.business_id.as_deref().is_some_and(|s| !s.trim().is_empty());
        if !p.club_name.trim().is_empty() && has_id && p.member_count.is_some() {
            complete += 1;
        }
    }
    for (i, p) in produced.iter().enumerate() {
        if !used[i] {
            mismatches.push(Mismatch::UnexpectedRecord {
                club_name: p.club_name.clone(),
            });
        }
    }

    let golden_records = golden.len() as u64;
    let golden_points = POINTS_PER_RECORD * golden_records;
    Ok(Comparison {
        metrics: Metrics {
            accuracy: ratio(matched, golden_points),
            completeness: ratio(complete, golden_records),
            robustness: 1.0,
            matched_points: matched,
            golden_points,
        },
        golden_records,
        complete_records: complete,
        mismatches,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FileEvaluation {
    pub file_stem: String,
    /// `None` when the run report has no entry for the file.
    pub outcome: Option<Outcome>,
    pub metrics: Metrics,
    pub golden_records: u64,
    pub complete_records: u64,
    pub mismatches: Vec<Mismatch>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvaluationReport {
    pub overall: Metrics,
    pub files: Vec<FileEvaluation>,
}

fn read_table(path: &Path) -> Result<Vec<ClubRecord>, EvalError> {
    read_records_csv(path).map_err(|source| EvalError::Table {
        path: path.display().to_string(),
        source,
    })
}

/// Scores a run directory (per-file CSVs plus run report) against a
/// directory of golden `<stem>.csv` tables. A golden file without produced
/// output scores zero; a file counts as robust unless it needed manual entry.
pub fn evaluate_run(golden_dir: &Path, produced_dir: &Path) -> Result<EvaluationReport, EvalError> {
    let io = |path: &Path| {
        let path = path.display().to_string();
        move |source| EvalError::Io { path, source }
    };
    let mut stems = Vec::new();
    for entry in std::fs::read_dir(golden_dir).map_err(io(golden_dir))? {
        let path = entry.map_err(io(golden_dir))?.path();
        if path.extension().is_some_and(|e| e == "csv") {
            if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                stems.push(stem.to_owned());
            }
        }
    }
    stems.sort();

    let report_path = produced_dir.join(RUN_REPORT);
    let outcomes: BTreeMap<String, Outcome> = if report_path.is_file() {
        read_run_report(&report_path)
            .map_err(io(&report_path))?
            .file_reports
            .into_iter()
            .map(|f| (f.file_stem, f.outcome))
            .collect()
    } else {
        BTreeMap::new()
    };

    let mut files = Vec::with_capacity(stems.len());
    for stem in stems {
        let golden = read_table(&golden_dir.join(format!("{stem}.csv")))?;
        let produced_path = produced_dir.join(PER_FILE_CSV_DIR).join(format!("{stem}.csv"));
        let produced = if produced_path.is_file() {
            read_table(&produced_path)?
        } else {
            Vec::new()
        };
        let comparison = compare_tables(&golden, &produced)?;
        let outcome = outcomes.get(&stem).copied();
        let robust = matches!(outcome, Some(Outcome::Clean | Outcome::CorrectedAutomatically));
        files.push(FileEvaluation {
            file_stem: stem,
            outcome,
            metrics: Metrics {
                robustness: if robust { 1.0 } else { 0.0 },
                ..comparison.metrics
            },
            golden_records: comparison.golden_records,
            complete_records: comparison.complete_records,
            mismatches: comparison.mismatches,
        });
    }

    let sum = |f: fn(&FileEvaluation) -> u64| files.iter().map(f).sum::<u64>();
    let matched = sum(|f| f.metrics.matched_points);
    let points = sum(|f| f.metrics.golden_points);
    let robust = files.iter().filter(|f| f.metrics.robustness == 1.0).count() as u64;
    let overall = Metrics {
        accuracy: ratio(matched, points),
        completeness: ratio(sum(|f| f.complete_records), sum(|f| f.golden_records)),
        robustness: ratio(robust, files.len() as u64),
        matched_points: matched,
        golden_points: points,
    };
    Ok(EvaluationReport { overall, files })
}
