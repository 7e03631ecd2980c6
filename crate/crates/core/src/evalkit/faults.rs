//! Fault injection on clean record blocks.
//!
//! Per row, at most one of: double-name merge, blanked field, hallucinated
//! count. Noise rows may follow any row and a chatty preamble may precede
//! the block. With every probability at zero the text is returned unchanged.

use serde::Serialize;

use super::corpus::CorpusSpec;
use super::rng::SplitMix64;
use crate::extraction::{BLOCK_END, BLOCK_START};
use crate::refinery::validate_business_id;

pub const PREAMBLES: [&str; 3] = [
    "Tässä ovat sivun seurat:",
    "Here are the records extracted from the page:",
    "Sure! Below is the requested data.",
];

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct FaultTally {
    pub double_names: usize,
    pub missing_fields: usize,
    pub hallucinated_counts: usize,
    pub noise_rows: usize,
    pub preambles: usize,
    pub corrupted_ids: usize,
    pub empty_responses: usize,
}

impl FaultTally {
    /// Faults that the refinery reports at warning level.
    pub fn warn_faults(&self) -> usize {
        self.double_names + self.missing_fields
    }

    pub fn add(&mut self, other: &FaultTally) {
        self.double_names += other.double_names;
        self.missing_fields += other.missing_fields;
        self.hallucinated_counts += other.hallucinated_counts;
        self.noise_rows += other.noise_rows;
        self.preambles += other.preambles;
        self.corrupted_ids += other.corrupted_ids;
        self.empty_responses += other.empty_responses;
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Faulted {
    pub text: String,
    pub tally: FaultTally,
}

/// Splits a block into (preamble, rows, trailer) around the sentinels.
/// Text without a complete block is treated as all preamble.
fn split_block(text: &str) -> (Vec<&str>, Vec<&str>, Vec<&str>) {
    let lines: Vec<&str> = text.lines().collect();
    let start = lines.iter().position(|l| l.trim() == BLOCK_START);
    let end = lines.iter().rposition(|l| l.trim() == BLOCK_END);
    match (start, end) {
        (Some(s), Some(e)) if s < e => (lines[..s].to_vec(), lines[s + 1..e].to_vec(), lines[e + 1..].to_vec()),
        _ => (lines, Vec::new(), Vec::new()),
    }
}

fn join_block(preamble: &[String], rows: &[String], trailer: &[&str]) -> String {
    let mut out = String::new();
    for line in preamble {
        out.push_str(line);
        out.push('\n');
    }
    out.push_str(BLOCK_START);
    out.push('\n');
    for row in rows {
        out.push_str(row);
        out.push('\n');
    }
    out.push_str(BLOCK_END);
    out.push('\n');
    for line in trailer {
        out.push_str(line);
        out.push('\n');
    }
    out
}

fn noise_row(rng: &mut SplitMix64) -> String {
    let total = rng.range_inclusive(1_000, 30_000);
    match rng.below(5) {
        0 => "OKM".to_owned(),
        1 => format!("Yhteensä||{total}|"),
        2 => "Seuran nimi||Y-tunnus|Jäsenmäärä".to_owned(),
        3 => format!("Totalt||{total}|"),
        _ => "Jäsenseurat".to_owned(),
    }
}

fn different_count(original: &str, rng: &mut SplitMix64) -> String {
    loop {
        let candidate = rng.range_inclusive(5, 3_000).to_string();
        if candidate != original {
            return candidate;
        }
    }
}

/// A canonical four-cell row with name, ID and count present.
fn intact_cells(row: &str) -> Option<Vec<&str>> {
    let cells: Vec<&str> = row.split('|').collect();
    (cells.len() == 4
        && !cells[0].is_empty()
        && validate_business_id(cells[2]).is_ok()
        && !cells[3].is_empty())
    .then_some(cells)
}

fn merge_names(cells: &[&str]) -> String {
    format!("{} - {}|{}|{}", cells[0], cells[1], cells[2], cells[3])
}

fn blank_field(cells: &[&str], rng: &mut SplitMix64) -> String {
    if rng.below(2) == 0 {
        format!("{}|{}||{}", cells[0], cells[1], cells[3])
    } else {
        format!("{}|{}|{}|", cells[0], cells[1], cells[2])
    }
}

/// Applies the per-row and per-response fault probabilities of `spec`.
pub fn inject_faults(clean_response: &str, spec: &CorpusSpec, rng: &mut SplitMix64) -> Faulted {
    let mut tally = FaultTally::default();
    if !spec.faults_active() {
        return Faulted {
            text: clean_response.to_owned(),
            tally,
        };
    }
    let (preamble, rows, trailer) = split_block(clean_response);
    let mut preamble: Vec<String> = preamble.into_iter().map(str::to_owned).collect();
    let mut out = Vec::with_capacity(rows.len());
    for row in rows {
        let cells: Vec<&str> = row.split('|').collect();
        let four = cells.len() == 4;
        if four && !cells[1].is_empty() && rng.chance(spec.p_double_name) {
            out.push(merge_names(&cells));
            tally.double_names += 1;
        } else if four && rng.chance(spec.p_missing_field) {
            out.push(blank_field(&cells, rng));
            tally.missing_fields += 1;
        } else if four && rng.chance(spec.p_hallucinated_count) {
            out.push(format!(
                "{}|{}|{}|{}",
                cells[0],
                cells[1],
                cells[2],
                different_count(cells[3], rng)
            ));
            tally.hallucinated_counts += 1;
        } else {
            out.push(row.to_owned());
        }
        if rng.chance(spec.p_noise_row) {
            out.push(noise_row(rng));
            tally.noise_rows += 1;
        }
    }
    if rng.chance(spec.p_noise_row) {
        preamble.insert(0, rng.pick(&PREAMBLES).to_string());
        tally.preambles += 1;
    }
    Faulted {
        text: join_block(&preamble, &out, &trailer),
        tally,
    }
}

/// Applies one warning-level fault (double-name merge preferred, else a
/// blanked field) to an intact row, using only fault kinds whose
/// probability in `spec` is non-zero. `None` when nothing applies.
pub fn force_warn_fault(response: &str, spec: &CorpusSpec, rng: &mut SplitMix64) -> Option<Faulted> {
    let (preamble, rows, trailer) = split_block(response);
    let intact: Vec<usize> = (0..rows.len()).filter(|&i| intact_cells(rows[i]).is_some()).collect();
    let bilingual: Vec<usize> = intact
        .iter()
        .copied()
        .filter(|&i| !rows[i].split('|').nth(1).unwrap_or_default().is_empty())
        .collect();

    let mut tally = FaultTally::default();
    let (index, replacement) = if spec.p_double_name > 0.0 && !bilingual.is_empty() {
        let i = *rng.pick(&bilingual);
        tally.double_names = 1;
        (i, merge_names(&intact_cells(rows[i])?))
    } else if spec.p_missing_field > 0.0 && !intact.is_empty() {
        let i = *rng.pick(&intact);
        tally.missing_fields = 1;
        (i, blank_field(&intact_cells(rows[i])?, rng))
    } else {
        return None;
    };

    let mut rows: Vec<String> = rows.into_iter().map(str::to_owned).collect();
    rows[index] = replacement;
    let preamble: Vec<String> = preamble.into_iter().map(str::to_owned).collect();
    Some(Faulted {
        text: join_block(&preamble, &rows, &trailer),
        tally,
    })
}

/// Replaces the check digit of `ceil(fraction * rows)` intact rows with a
/// wrong one. Returns the new text and how many rows were corrupted.
pub fn corrupt_business_ids(response: &str, fraction: f64, rng: &mut SplitMix64) -> Faulted {
    let (preamble, rows, trailer) = split_block(response);
    let mut intact: Vec<usize> = (0..rows.len()).filter(|&i| intact_cells(rows[i]).is_some()).collect();
    rng.shuffle(&mut intact);
    let n = ((rows.len() as f64 * fraction).ceil() as usize).min(intact.len());

    let mut rows: Vec<String> = rows.into_iter().map(str::to_owned).collect();
    for &i in &intact[..n] {
        let cells: Vec<String> = rows[i].split('|').map(str::to_owned).collect();
        let id = &cells[2];
        let check = id.chars().last().and_then(|c| c.to_digit(10)).unwrap_or(0);
        let wrong = (check + 1 + rng.below(9) as u32) % 10;
        let bad_id = format!("{}{}", &id[..id.len() - 1], wrong);
        rows[i] = format!("{}|{}|{}|{}", cells[0], cells[1], bad_id, cells[3]);
    }
    let preamble: Vec<String> = preamble.into_iter().map(str::to_owned).collect();
    Faulted {
        text: join_block(&preamble, &rows, &trailer),
        tally: FaultTally {
            corrupted_ids: n,
            ..FaultTally::default()
        },
    }
}
