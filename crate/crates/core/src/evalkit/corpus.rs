//! Seeded synthetic corpora: page texts, replay fixtures, golden tables and
//! expected outcome buckets, all derived from one [`CorpusSpec`].
//!
//! Layout of a generated tree:
//!
//! ```text
//! pages/<stem>.pageNNN.txt     page texts
//! fixtures/<sha256>.resp.txt   replay responses
//! golden/<stem>.csv            ground truth
//! expected_outcomes.csv        file_stem,outcome
//! prompt_template.txt          the template the fixtures were keyed with
//! corpus_spec.conf             the spec that produced the tree
//! tablesmith.conf              replay config writing to out/
//! ```

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::path::Path;

use serde::Serialize;
use thiserror::Error;

use super::faults::{corrupt_business_ids, force_warn_fault, inject_faults, FaultTally};
use super::rng::SplitMix64;
use crate::extraction::render_block;
use crate::ingest::{page_file_name, PageText};
use crate::pipeline::config::parse_flat_pairs;
use crate::pipeline::sinks::write_records;
use crate::pipeline::Outcome;
use crate::prompting::{plan_page, PartPlan, PromptTemplate, DEFAULT_TEMPLATE_TEXT};
use crate::provider::replay::fixture_path;
use crate::provider::{prompt_fingerprint, ProviderProfile};
use crate::refinery::{compute_check_digit, ClubRecord};

pub const PAGES_DIR: &str = "pages";
pub const FIXTURES_DIR: &str = "fixtures";
pub const GOLDEN_DIR: &str = "golden";
pub const EXPECTED_OUTCOMES: &str = "expected_outcomes.csv";
pub const TEMPLATE_FILE: &str = "prompt_template.txt";
pub const SPEC_FILE: &str = "corpus_spec.conf";
pub const CONFIG_FILE: &str = "tablesmith.conf";
/// Output directory named in the generated config.
pub const RUN_OUTPUT_DIR: &str = "out";

/// Share of rows given a bad check digit in a corrupted manual file.
pub const MANUAL_CORRUPTION_FRACTION: f64 = 0.25;

const PLACE_PAIRS: &str = include_str!("../../data/place_pairs.txt");
const CLUB_WORDS: &str = include_str!("../../data/club_words.txt");
const FI_PLACES: &str = include_str!("../../data/fi_places.txt");
const MODIFIERS: &str = include_str!("../../data/modifiers.txt");

pub const SPEC_KEYS: [&str; 11] = [
    "seed",
    "n_files",
    "rows_per_file",
    "page_row_capacity",
    "p_double_name",
    "p_noise_row",
    "p_missing_field",
    "p_hallucinated_count",
    "n_manual_files",
    "n_corrected_files",
    "layout",
];

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("invalid corpus spec: {0}")]
    SpecInvalid(String),
    #[error("output directory {0} is not empty")]
    OutputNotEmpty(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

fn spec_invalid(msg: impl Into<String>) -> CorpusError {
    CorpusError::SpecInvalid(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LayoutChoice {
    Mixed,
    Table,
    List,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorpusSpec {
    pub seed: u64,
    pub n_files: usize,
    pub rows_min: usize,
    pub rows_max: usize,
    pub page_row_capacity: usize,
    pub p_double_name: f64,
    pub p_noise_row: f64,
    pub p_missing_field: f64,
    pub p_hallucinated_count: f64,
    pub n_manual_files: usize,
    pub n_corrected_files: usize,
    pub layout: LayoutChoice,
}

impl CorpusSpec {
    /// 72 files of 80 to 160 rows; 2 need manual entry and 5 are repaired
    /// automatically.
    pub fn full_scale(seed: u64) -> Self {
        Self {
            seed,
            n_files: 72,
            rows_min: 80,
            rows_max: 160,
            page_row_capacity: 120,
            p_double_name: 0.05,
            p_noise_row: 0.05,
            p_missing_field: 0.05,
            p_hallucinated_count: 0.01,
            n_manual_files: 2,
            n_corrected_files: 5,
            layout: LayoutChoice::Mixed,
        }
    }

    /// [`full_scale`](Self::full_scale) with every fault probability zero
    /// and no files designated for faults.
    pub fn fault_free(seed: u64) -> Self {
        Self {
            p_double_name: 0.0,
            p_noise_row: 0.0,
            p_missing_field: 0.0,
            p_hallucinated_count: 0.0,
            n_manual_files: 0,
            n_corrected_files: 0,
            ..Self::full_scale(seed)
        }
    }

    /// Faults of any kind, including the manual-file ones, are only injected
    /// when at least one probability is non-zero.
    pub fn faults_active(&self) -> bool {
        [self.p_double_name, self.p_noise_row, self.p_missing_field, self.p_hallucinated_count]
            .iter()
            .any(|&p| p > 0.0)
    }

    pub fn validate(&self) -> Result<(), CorpusError> {
        for (name, p) in [
            ("p_double_name", self.p_double_name),
            ("p_noise_row", self.p_noise_row),
            ("p_missing_field", self.p_missing_field),
            ("p_hallucinated_count", self.p_hallucinated_count),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(spec_invalid(format!("{name} = {p} is not a probability")));
            }
        }
        if self.n_manual_files + self.n_corrected_files > self.n_files {
            return Err(spec_invalid("n_manual_files + n_corrected_files exceeds n_files"));
        }
        if self.rows_min == 0 || self.rows_min > self.rows_max {
            return Err(spec_invalid("rows_per_file must be a range `lo-hi` with 1 <= lo <= hi"));
        }
        let pool = name_pool().len();
        if self.rows_max > pool {
            return Err(spec_invalid(format!("at most {pool} rows per file are supported")));
        }
        if self.page_row_capacity == 0 {
            return Err(spec_invalid("page_row_capacity must be positive"));
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self, CorpusError> {
        let pairs = parse_flat_pairs(text, &SPEC_KEYS).map_err(|e| spec_invalid(e.to_string()))?;
        let mut spec = Self::full_scale(0);
        for (key, value) in &pairs {
            let bad = || spec_invalid(format!("`{key}`: cannot parse `{value}`"));
            let int = || value.replace('_', "").parse::<usize>().map_err(|_| bad());
            let prob = || value.parse::<f64>().map_err(|_| bad());
            match key.as_str() {
                "seed" => spec.seed = value.parse().map_err(|_| bad())?,
                "n_files" => spec.n_files = int()?,
                "rows_per_file" => {
                    let (lo, hi) = match value.split_once('-') {
                        Some((lo, hi)) => (lo.trim(), hi.trim()),
                        None => (value.as_str(), value.as_str()),
                    };
                    spec.rows_min = lo.parse().map_err(|_| bad())?;
                    spec.rows_max = hi.parse().map_err(|_| bad())?;
                }
                "page_row_capacity" => spec.page_row_capacity = int()?,
                "p_double_name" => spec.p_double_name = prob()?,
                "p_noise_row" => spec.p_noise_row = prob()?,
                "p_missing_field" => spec.p_missing_field = prob()?,
                "p_hallucinated_count" => spec.p_hallucinated_count = prob()?,
                "n_manual_files" => spec.n_manual_files = int()?,
                "n_corrected_files" => spec.n_corrected_files = int()?,
                "layout" => {
                    spec.layout = match value.as_str() {
                        "mixed" => LayoutChoice::Mixed,
                        "table" => LayoutChoice::Table,
                        "list" => LayoutChoice::List,
                        _ => return Err(bad()),
                    }
                }
                _ => unreachable!("keys are checked by the parser"),
            }
        }
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self, CorpusError> {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        Self::parse(&text)
    }

    /// The spec in its file syntax; [`parse`](Self::parse) reads it back.
    pub fn to_text(&self) -> String {
        let layout = match self.layout {
            LayoutChoice::Mixed => "mixed",
            LayoutChoice::Table => "table",
            LayoutChoice::List => "list",
        };
        format!(
            "seed = {}\nn_files = {}\nrows_per_file = {}-{}\npage_row_capacity = {}\n\
             p_double_name = {}\np_noise_row = {}\np_missing_field = {}\np_hallucinated_count = {}\n\
             n_manual_files = {}\nn_corrected_files = {}\nlayout = {layout}\n",
            self.seed,
            self.n_files,
            self.rows_min,
            self.rows_max,
            self.page_row_capacity,
            self.p_double_name,
            self.p_noise_row,
            self.p_missing_field,
            self.p_hallucinated_count,
            self.n_manual_files,
            self.n_corrected_files,
        )
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CorpusError + '_ {
    move |source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn data_lines(text: &str) -> impl Iterator<Item = &str> {
    text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'))
}

fn pairs(text: &str) -> Vec<(&str, &str)> {
    data_lines(text)
        .filter_map(|l| l.split_once('|'))
        .map(|(a, b)| (a.trim(), b.trim()))
        .collect()
}

/// Every synthetic club name, in a fixed order: `(name, alt_name)`.
pub fn name_pool() -> Vec<(String, Option<String>)> {
    let mut pool = Vec::new();
    for (fi_place, sv_place) in pairs(PLACE_PAIRS) {
        for (fi_word, sv_word) in pairs(CLUB_WORDS) {
            pool.push((
                format!("{fi_place} {fi_word} ry"),
                Some(format!("{sv_place} {sv_word} rf")),
            ));
        }
    }
    for place in data_lines(FI_PLACES) {
        for word in data_lines(MODIFIERS) {
            pool.push((format!("{place} {word} ry"), None));
        }
    }
    pool
}

/// `1234567` as `1 234 567`.
pub fn group_thousands(n: u64) -> String {
    let digits = n.to_string();
    let mut out = String::new();
    for (i, c) in digits.chars().enumerate() {
        if i > 0 && (digits.len() - i) % 3 == 0 {
            out.push(' ');
        }
        out.push(c);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Designation {
    Clean,
    Corrected,
    ManualEmptyResponse,
    ManualCorruptIds,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Layout {
    Table,
    List,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeneratedFile {
    pub file_stem: String,
    pub designation: Designation,
    pub layout: Layout,
    pub expected: Outcome,
    pub faults: FaultTally,
    /// Page texts in page order.
    pub pages: Vec<String>,
    /// Provider calls the pipeline will make for this file.
    pub parts: usize,
    pub golden: Vec<ClubRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Corpus {
    pub spec: CorpusSpec,
    pub files: Vec<GeneratedFile>,
    /// Replay responses keyed by prompt fingerprint.
    pub fixtures: BTreeMap<String, String>,
}

impl Corpus {
    pub fn expected_outcomes(&self) -> BTreeMap<String, Outcome> {
        self.files.iter().map(|f| (f.file_stem.clone(), f.expected)).collect()
    }

    pub fn total_rows(&self) -> usize {
        self.files.iter().map(|f| f.golden.len()).sum()
    }
}

/// Token budgets the fixtures are planned against; the generated config
/// repeats them.
pub fn generation_profile() -> ProviderProfile {
    ProviderProfile::claude_3_opus()
}

pub fn file_stem(index: usize) -> String {
    format!("liitto_{:03}", index + 1)
}

struct Club {
    name: String,
    alt: Option<String>,
    id: String,
    count: u64,
}

impl Club {
    fn cells(&self) -> Vec<&str> {
        vec![
            self.name.as_str(),
            self.alt.as_deref().unwrap_or_default(),
            self.id.as_str(),
            "",
        ]
    }
}

fn business_id(rng: &mut SplitMix64, taken: &mut HashSet<String>) -> String {
    loop {
        let base = format!("{:07}", rng.below(10_000_000));
        // Bases whose weighted sum leaves remainder 1 have no check digit.
        let Ok(check) = compute_check_digit(&base) else { continue };
        let id = format!("{base}-{check}");
        if taken.insert(id.clone()) {
            return id;
        }
    }
}

fn member_count(rng: &mut SplitMix64) -> u64 {
    if rng.chance(0.1) {
        rng.range_inclusive(500, 3_000)
    } else {
        rng.range_inclusive(5, 400)
    }
}

/// Renders one page; returns the text and, per line, the index of the club
/// it shows within `clubs`.
fn render_page(
    stem: &str,
    layout: Layout,
    page: usize,
    page_total: usize,
    clubs: &[Club],
    first_number: usize,
    total: Option<u64>,
) -> (String, Vec<Option<usize>>) {
    let mut lines: Vec<(String, Option<usize>)> = Vec::new();
    match layout {
        Layout::Table => {
            lines.push((
                format!("{stem}: jäsenseurat ja jäsenmäärät 2023\tsivu {}/{page_total}", page + 1),
                None,
            ));
            lines.push(("OKM / valtionavustukset".to_owned(), None));
            lines.push(("Seuran nimi\tNamn på svenska\tY-tunnus\tJäsenmäärä".to_owned(), None));
            for (i, c) in clubs.iter().enumerate() {
                lines.push((
                    format!(
                        "{}\t{}\t{}\t{}",
                        c.name,
                        c.alt.as_deref().unwrap_or_default(),
                        c.id,
                        group_thousands(c.count)
                    ),
                    Some(i),
                ));
            }
            if let Some(total) = total {
                lines.push((format!("Yhteensä\t\t\t{}", group_thousands(total)), None));
            }
        }
        Layout::List => {
            lines.push((format!("JÄSENSEURAT 2023, {stem}, sivu {}/{page_total}", page + 1), None));
            lines.push((String::new(), None));
            for (i, c) in clubs.iter().enumerate() {
                let alt = c.alt.as_ref().map(|a| format!(" / {a}")).unwrap_or_default();
                lines.push((
                    format!(
                        "{}. {}{alt}, Y-tunnus {}, jäseniä {}",
                        first_number + i + 1,
                        c.name,
                        c.id,
                        group_thousands(c.count)
                    ),
                    Some(i),
                ));
            }
            if let Some(total) = total {
                lines.push((String::new(), None));
                lines.push((format!("Jäseniä yhteensä {}", group_thousands(total)), None));
            }
        }
    }
    let mut text = String::new();
    let mut map = Vec::with_capacity(lines.len());
    for (line, club) in lines {
        text.push_str(&line);
        text.push('\n');
        map.push(club);
    }
    (text, map)
}

struct Part {
    fingerprint: String,
    response: String,
}

fn build_file(
    index: usize,
    designation: Designation,
    spec: &CorpusSpec,
    template: &PromptTemplate,
    pool: &[(String, Option<String>)],
    rng: &mut SplitMix64,
) -> Result<(GeneratedFile, Vec<Part>), CorpusError> {
    let stem = file_stem(index);
    let n = rng.range_inclusive(spec.rows_min as u64, spec.rows_max as u64) as usize;

    let mut order: Vec<usize> = (0..pool.len()).collect();
    for i in 0..n {
        let j = i + rng.below((order.len() - i) as u64) as usize;
        order.swap(i, j);
    }
    let mut ids = HashSet::new();
    let clubs: Vec<Club> = order[..n]
        .iter()
        .map(|&k| Club {
            name: pool[k].0.clone(),
            alt: pool[k].1.clone(),
            id: business_id(rng, &mut ids),
            count: member_count(rng),
        })
        .collect();
    let layout = match spec.layout {
        LayoutChoice::Table => Layout::Table,
        LayoutChoice::List => Layout::List,
        LayoutChoice::Mixed if rng.chance(0.5) => Layout::Table,
        LayoutChoice::Mixed => Layout::List,
    };
    let total: u64 = clubs.iter().map(|c| c.count).sum();

    let chunks: Vec<&[Club]> = clubs.chunks(spec.page_row_capacity).collect();
    let profile = generation_profile();
    let mut pages = Vec::with_capacity(chunks.len());
    let mut parts = Vec::new();
    let mut golden = Vec::with_capacity(n);
    let mut first_number = 0;
    for (p, chunk) in chunks.iter().enumerate() {
        let last = p + 1 == chunks.len();
        let (text, line_club) = render_page(&stem, layout, p, chunks.len(), chunk, first_number, last.then_some(total));
        first_number += chunk.len();
        let page = PageText::new(stem.clone(), p as u32, text.clone());
        let planned = plan_page(template, &page, &profile).map_err(|e| spec_invalid(e.to_string()))?;
        for part in planned {
            let bundle = match part.plan {
                PartPlan::Submit(bundle) => bundle,
                PartPlan::Skipped => continue,
                PartPlan::Oversized(_) => {
                    return Err(spec_invalid(format!("a line of {stem} page {p} exceeds the token budget")))
                }
            };
            let in_part: Vec<&Club> = line_club[part.first_line..part.first_line + part.line_count]
                .iter()
                .flatten()
                .map(|&i| &chunk[i])
                .collect();
            let counts: Vec<String> = in_part.iter().map(|c| c.count.to_string()).collect();
            let rows: Vec<Vec<&str>> = in_part
                .iter()
                .zip(&counts)
                .map(|(c, count)| {
                    let mut cells = c.cells();
                    cells[3] = count;
                    cells
                })
                .collect();
            parts.push(Part {
                fingerprint: prompt_fingerprint(&bundle.prompt_text),
                response: render_block(&rows),
            });
        }
        golden.extend(chunk.iter().map(|c| ClubRecord {
            club_name: c.name.clone(),
            alt_name: c.alt.clone(),
            business_id: Some(c.id.clone()),
            member_count: Some(c.count),
            source_file: stem.clone(),
            source_page: p as u32,
            flags: BTreeSet::new(),
        }));
        pages.push(text);
    }

    let mut faults = FaultTally::default();
    match designation {
        Designation::Clean => {}
        Designation::Corrected => {
            for part in &mut parts {
                let f = inject_faults(&part.response, spec, rng);
                part.response = f.text;
                faults.add(&f.tally);
            }
            if faults.warn_faults() == 0 {
                for part in &mut parts {
                    if let Some(f) = force_warn_fault(&part.response, spec, rng) {
                        part.response = f.text;
                        faults.add(&f.tally);
                        break;
                    }
                }
            }
        }
        Designation::ManualEmptyResponse => {
            let page = rng.below(parts.len() as u64) as usize;
            parts[page].response = String::new();
            faults.empty_responses = 1;
        }
        Designation::ManualCorruptIds => {
            for part in &mut parts {
                let f = corrupt_business_ids(&part.response, MANUAL_CORRUPTION_FRACTION, rng);
                part.response = f.text;
                faults.add(&f.tally);
            }
        }
    }
    let expected = match designation {
        Designation::ManualEmptyResponse | Designation::ManualCorruptIds => Outcome::ManualRequired,
        _ if faults.warn_faults() > 0 => Outcome::CorrectedAutomatically,
        _ => Outcome::Clean,
    };

    let file = GeneratedFile {
        file_stem: stem,
        designation,
        layout,
        expected,
        faults,
        pages,
        parts: parts.len(),
        golden,
    };
    Ok((file, parts))
}

/// Builds the whole corpus in memory. The same spec always gives the same
/// corpus.
pub fn build_corpus(spec: &CorpusSpec) -> Result<Corpus, CorpusError> {
    spec.validate()?;
    let template = PromptTemplate::builtin();
    let pool = name_pool();
    let mut rng = SplitMix64::new(spec.seed);

    let mut designations = vec![Designation::Clean; spec.n_files];
    if spec.faults_active() {
        let mut order: Vec<usize> = (0..spec.n_files).collect();
        rng.shuffle(&mut order);
        for (k, &i) in order.iter().enumerate() {
            designations[i] = if k < spec.n_manual_files {
                if k % 2 == 0 {
                    Designation::ManualEmptyResponse
                } else {
                    Designation::ManualCorruptIds
                }
            } else if k < spec.n_manual_files + spec.n_corrected_files {
                Designation::Corrected
            } else {
                Designation::Clean
            };
        }
    }

    let mut files = Vec::with_capacity(spec.n_files);
    let mut fixtures = BTreeMap::new();
    for (index, &designation) in designations.iter().enumerate() {
        let mut file_rng = rng.fork();
        let (file, parts) = build_file(index, designation, spec, &template, &pool, &mut file_rng)?;
        for part in parts {
            if let Some(previous) = fixtures.insert(part.fingerprint.clone(), part.response.clone()) {
                if previous != part.response {
                    return Err(spec_invalid(format!("two prompts share fingerprint {}", part.fingerprint)));
                }
            }
        }
        files.push(file);
    }
    Ok(Corpus {
        spec: spec.clone(),
        files,
        fixtures,
    })
}

fn replay_config(profile: &ProviderProfile) -> String {
    format!(
        "# Replay run over a generated corpus.\n\
         mode = replay\n\
         input_dir = {PAGES_DIR}\n\
         output_dir = {RUN_OUTPUT_DIR}\n\
         fixture_dir = {FIXTURES_DIR}\n\
         prompt_template = {TEMPLATE_FILE}\n\
         input_token_budget = {}\n\
         output_token_budget = {}\n",
        profile.input_token_budget, profile.output_token_budget
    )
}

/// Writes `corpus` under `out_dir`, which must be absent or empty.
pub fn write_corpus(corpus: &Corpus, out_dir: &Path) -> Result<(), CorpusError> {
    if out_dir.exists() {
        let mut entries = std::fs::read_dir(out_dir).map_err(io_err(out_dir))?;
        if entries.next().is_some() {
            return Err(CorpusError::OutputNotEmpty(out_dir.display().to_string()));
        }
    }
    let write = |path: &Path, bytes: &[u8]| std::fs::write(path, bytes).map_err(io_err(path));
    let pages_dir = out_dir.join(PAGES_DIR);
    let fixtures_dir = out_dir.join(FIXTURES_DIR);
    let golden_dir = out_dir.join(GOLDEN_DIR);
    for dir in [&pages_dir, &fixtures_dir, &golden_dir] {
        std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    }

    for file in &corpus.files {
        for (p, text) in file.pages.iter().enumerate() {
            write(&pages_dir.join(page_file_name(&file.file_stem, p as u32)), text.as_bytes())?;
        }
        let mut golden = Vec::new();
        write_records(&file.golden, &mut golden).expect("writing to memory");
        write(&golden_dir.join(format!("{}.csv", file.file_stem)), &golden)?;
    }
    for (fingerprint, response) in &corpus.fixtures {
        write(&fixture_path(&fixtures_dir, fingerprint), response.as_bytes())?;
    }

    let mut outcomes = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let csv_err = |e: csv::Error| CorpusError::Io {
        path: EXPECTED_OUTCOMES.to_owned(),
        source: std::io::Error::other(e),
    };
    outcomes.write_record(["file_stem", "outcome"]).map_err(csv_err)?;
    for file in &corpus.files {
        outcomes
            .write_record([file.file_stem.as_str(), file.expected.as_str()])
            .map_err(csv_err)?;
    }
    let outcomes = outcomes.into_inner().expect("in-memory writer");
    write(&out_dir.join(EXPECTED_OUTCOMES), &outcomes)?;

    write(&out_dir.join(TEMPLATE_FILE), DEFAULT_TEMPLATE_TEXT.as_bytes())?;
    write(&out_dir.join(SPEC_FILE), corpus.spec.to_text().as_bytes())?;
    write(&out_dir.join(CONFIG_FILE), replay_config(&generation_profile()).as_bytes())?;
    Ok(())
}

/// Builds and writes a corpus in one step.
pub fn generate_corpus(spec: &CorpusSpec, out_dir: &Path) -> Result<Corpus, CorpusError> {
    let corpus = build_corpus(spec)?;
    write_corpus(&corpus, out_dir)?;
    Ok(corpus)
}

pub fn read_expected_outcomes(path: &Path) -> Result<BTreeMap<String, Outcome>, CorpusError> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let mut out = BTreeMap::new();
    for row in reader.records() {
        let row = row.map_err(|e| spec_invalid(format!("{}: {e}", path.display())))?;
        let outcome = row
            .get(1)
            .unwrap_or_default()
            .parse()
            .map_err(|e: String| spec_invalid(format!("{}: {e}", path.display())))?;
        out.insert(row.get(0).unwrap_or_default().to_owned(), outcome);
    }
    Ok(out)
}
