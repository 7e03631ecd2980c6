//! Batch orchestration: pages to provider calls to records, outcome
//! buckets, and the output sinks.

pub mod config;
pub mod outcome;
pub mod report;
pub mod sinks;

use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use thiserror::Error;

use crate::extraction::{parse_response, PageOrigin};
use crate::ingest::{list_input_files, load_pages, IngestError, InputDocument};
use crate::issues::{IssueKind, ValidationIssue};
use crate::prompting::{plan_page, PartPlan, PromptError, PromptTemplate};
use crate::provider::live::LiveSettings;
use crate::provider::{
    Clock, CompletionBackend, LiveProvider, ProviderError, ProviderProfile, RecordingProvider,
    ReplayProvider, SystemClock, UreqTransport,
};
use crate::refinery::{ClubRecord, Refinery};

pub use config::{load_config, load_config_with_overrides, ConfigError, ProviderMode, RunConfig};
pub use outcome::{classify_outcome, Outcome, RowStats};
pub use report::{read_run_report, write_run_report, FileReport, RunReport, Totals};
pub use sinks::{read_records_csv, write_records_csv, write_workbook, SinkError};

/// Per-file CSVs live in this subdirectory of the output directory.
pub const PER_FILE_CSV_DIR: &str = "csv";
pub const COMBINED_CSV: &str = "records.csv";
pub const WORKBOOK: &str = "records.xlsx";
pub const RUN_REPORT: &str = "run_report.json";

/// Errors that stop a run before or after the per-file work. Problems inside
/// a file never surface here; they become issues in its report.
#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("prompt template: {0}")]
    Template(#[from] PromptError),
    #[error(transparent)]
    Provider(#[from] ProviderError),
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Sink(#[from] SinkError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> PipelineError + '_ {
    move |source| PipelineError::Io {
        path: path.display().to_string(),
        source,
    }
}

pub struct Pipeline {
    config: RunConfig,
    template: PromptTemplate,
    refinery: Refinery,
    backend: Arc<dyn CompletionBackend>,
    clock: Arc<dyn Clock>,
}

impl Pipeline {
    /// Builds the backend selected by `config.mode`, using the system clock.
    pub fn from_config(config: &RunConfig) -> Result<Self, PipelineError> {
        let clock: Arc<dyn Clock> = Arc::new(SystemClock);
        let backend = build_backend(config, clock.clone())?;
        Self::with_backend(config, backend, clock)
    }

    pub fn with_backend(
        config: &RunConfig,
        backend: Arc<dyn CompletionBackend>,
        clock: Arc<dyn Clock>,
    ) -> Result<Self, PipelineError> {
        let template = match &config.prompt_template {
            Some(path) => PromptTemplate::load(path)?,
            None => PromptTemplate::builtin(),
        };
        template.validate()?;
        Ok(Self {
            config: config.clone(),
            template,
            refinery: Refinery::new(config.noise_stopwords.clone(), config.assoc_suffixes.clone()),
            backend,
            clock,
        })
    }

    pub fn config(&self) -> &RunConfig {
        &self.config
    }

    fn profile(&self) -> &ProviderProfile {
        &self.config.profile
    }

    /// Runs every page of `doc` through the provider and the refinery.
    pub fn process_file(&self, doc: &InputDocument) -> (Vec<ClubRecord>, FileReport) {
        let stem = doc.file_stem.as_str();
        let mut records = Vec::new();
        let mut issues = Vec::new();
        let mut stats = RowStats::default();
        let mut provider_calls = 0;

        let pages = match load_pages(doc) {
            Ok(pages) => pages,
            Err(err) => {
                issues.push(ValidationIssue::new(IssueKind::IngestFailure, stem, 0, None, err.to_string()));
                let report = self.finish(stem, 0, 0, stats, issues);
                return (records, report);
            }
        };

        for page in &pages {
            let origin_issue = |part: Option<u32>, kind: IssueKind, message: String| {
                ValidationIssue::new(kind, stem, page.page_index, None, message).with_part(part)
            };
            let parts = match plan_page(&self.template, page, self.profile()) {
                Ok(parts) => parts,
                Err(err) => {
                    issues.push(origin_issue(None, IssueKind::ProviderFailure, err.to_string()));
                    continue;
                }
            };
            let mut page_rows = 0;
            for part in parts {
                let bundle = match part.plan {
                    PartPlan::Skipped => {
                        issues.push(origin_issue(part.part_index, IssueKind::PageSkipped, "blank page text".into()));
                        continue;
                    }
                    PartPlan::Oversized(verdict) => {
                        issues.push(origin_issue(
                            part.part_index,
                            IssueKind::ProviderFailure,
                            format!("line {} alone exceeds the token budget: {verdict:?}", part.first_line + 1),
                        ));
                        continue;
                    }
                    PartPlan::Submit(bundle) => bundle,
                };
                provider_calls += 1;
                let completion = match self.backend.complete(&bundle) {
                    Ok(completion) => completion,
                    Err(err) => {
                        issues.push(origin_issue(part.part_index, IssueKind::ProviderFailure, err.to_string()));
                        continue;
                    }
                };
                let origin = PageOrigin {
                    file_stem: stem.to_owned(),
                    page_index: page.page_index,
                    part_index: part.part_index,
                };
                let parsed = parse_response(&completion.text, &origin);
                page_rows += parsed.rows.len();
                issues.extend(parsed.issues);
                let refined = self.refinery.refine_rows(&parsed.rows, stem);
                stats.rows_dropped += refined.dropped;
                issues.extend(refined.issues);
                records.extend(refined.records);
            }
            if page_rows == 0 && !page.text.trim().is_empty() {
                stats.barren_pages += 1;
            }
        }

        stats.rows_emitted = records.len();
        let report = self.finish(stem, pages.len(), provider_calls, stats, issues);
        (records, report)
    }

    fn finish(
        &self,
        stem: &str,
        pages_processed: usize,
        provider_calls: usize,
        stats: RowStats,
        issues: Vec<ValidationIssue>,
    ) -> FileReport {
        FileReport {
            file_stem: stem.to_owned(),
            pages_processed,
            rows_emitted: stats.rows_emitted,
            rows_dropped: stats.rows_dropped,
            provider_calls,
            outcome: classify_outcome(&issues, stats, self.config.manual_error_ratio),
            issues,
        }
    }

    /// Processes `docs` on up to `max_parallel_files` threads. Results come
    /// back in `docs` order regardless of scheduling.
    pub fn process_all(&self, docs: &[InputDocument]) -> Vec<(Vec<ClubRecord>, FileReport)> {
        let workers = self.config.max_parallel_files.clamp(1, docs.len().max(1));
        let next = AtomicUsize::new(0);
        let slots: Mutex<Vec<Option<(Vec<ClubRecord>, FileReport)>>> =
            Mutex::new((0..docs.len()).map(|_| None).collect());
        std::thread::scope(|scope| {
            for _ in 0..workers {
                scope.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::SeqCst);
                    let Some(doc) = docs.get(i) else { break };
                    let result = self.process_file(doc);
                    slots.lock().expect("result slots")[i] = Some(result);
                });
            }
        });
        slots
            .into_inner()
            .expect("result slots")
            .into_iter()
            .map(|slot| slot.expect("every document processed"))
            .collect()
    }

    /// Processes the input directory and writes all outputs.
    pub fn run_batch(&self) -> Result<RunReport, PipelineError> {
        let started_at = timestamp(self.clock.now_ms());
        let mut docs = list_input_files(&self.config.input_dir)?;
        docs.sort_by(|a, b| a.file_stem.cmp(&b.file_stem));
        let results = self.process_all(&docs);

        let out = &self.config.output_dir;
        let csv_dir = out.join(PER_FILE_CSV_DIR);
        std::fs::create_dir_all(&csv_dir).map_err(io_err(&csv_dir))?;

        let mut all_records = Vec::new();
        let mut groups = Vec::with_capacity(results.len());
        let mut file_reports = Vec::with_capacity(results.len());
        for (records, report) in results {
            write_records_csv(&records, &csv_dir.join(format!("{}.csv", report.file_stem)))?;
            all_records.extend(records.iter().cloned());
            groups.push((report.file_stem.clone(), records));
            file_reports.push(report);
        }
        write_records_csv(&all_records, &out.join(COMBINED_CSV))?;
        if !groups.is_empty() {
            write_workbook(&groups, &out.join(WORKBOOK))?;
        }

        let report = RunReport::assemble(started_at, self.config.config_digest.clone(), file_reports);
        let path = out.join(RUN_REPORT);
        write_run_report(&report, &path).map_err(io_err(&path))?;
        Ok(report)
    }
}

/// Builds the live, replay or recording backend selected by `config.mode`.
pub fn build_backend(config: &RunConfig, clock: Arc<dyn Clock>) -> Result<Arc<dyn CompletionBackend>, PipelineError> {
    let live = || -> Result<LiveProvider, PipelineError> {
        let settings = LiveSettings {
            endpoint_url: config
                .endpoint_url
                .clone()
                .ok_or_else(|| ConfigError::MissingKey("endpoint_url".into()))?,
            model_name: config.model_name.clone(),
            api_key: LiveProvider::api_key_from_env(&config.api_key_env)?,
            request_timeout_ms: config.request_timeout_ms,
            sampling_params: config.sampling_params.clone(),
        };
        Ok(LiveProvider::new(
            config.profile.clone(),
            settings,
            Box::new(UreqTransport),
            clock.clone(),
        ))
    };
    let fixture_dir = || {
        config
            .fixture_dir
            .clone()
            .ok_or_else(|| PipelineError::from(ConfigError::MissingKey("fixture_dir".into())))
    };
    Ok(match config.mode {
        ProviderMode::Replay => Arc::new(ReplayProvider::new(fixture_dir()?)),
        ProviderMode::Live => Arc::new(live()?),
        ProviderMode::Record => Arc::new(RecordingProvider::new(live()?, fixture_dir()?)),
    })
}

/// Builds the pipeline for `config` and runs it.
pub fn run_batch(config: &RunConfig) -> Result<RunReport, PipelineError> {
    Pipeline::from_config(config)?.run_batch()
}

fn timestamp(ms: u64) -> String {
    chrono::DateTime::from_timestamp_millis(ms as i64)
        .unwrap_or_default()
        .to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extraction::render_block;
    use crate::ingest::{page_file_name, PageText};
    use crate::prompting::build_prompt;
    use crate::provider::replay::fixture_path;
    use crate::provider::{prompt_fingerprint, ManualClock};
    use std::collections::BTreeMap;
    use std::fs;

    struct Corpus {
        dir: tempfile::TempDir,
    }

    impl Corpus {
        fn new() -> Self {
            let dir = tempfile::tempdir().unwrap();
            fs::create_dir(dir.path().join("pages")).unwrap();
            fs::create_dir(dir.path().join("fixtures")).unwrap();
            Corpus { dir }
        }

        fn page(&self, stem: &str, index: u32, text: &str, response: Option<&str>) {
            fs::write(self.dir.path().join("pages").join(page_file_name(stem, index)), text).unwrap();
            if let Some(response) = response {
                let bundle =
                    build_prompt(&PromptTemplate::builtin(), &PageText::new(stem, index, text.to_owned())).unwrap();
                let path = fixture_path(&self.dir.path().join("fixtures"), &prompt_fingerprint(&bundle.prompt_text));
                fs::write(path, response).unwrap();
            }
        }

        fn config(&self) -> RunConfig {
            let pairs: BTreeMap<String, String> = [
                ("input_dir", "pages"),
                ("output_dir", "out"),
                ("fixture_dir", "fixtures"),
                ("max_parallel_files", "2"),
            ]
            .into_iter()
            .map(|(k, v)| (k.to_owned(), v.to_owned()))
            .collect();
            RunConfig::from_pairs(&pairs, self.dir.path(), "digest".into()).unwrap()
        }

        fn pipeline(&self) -> (Pipeline, Arc<ReplayProvider>) {
            let cfg = self.config();
            let replay = Arc::new(ReplayProvider::new(cfg.fixture_dir.clone().unwrap()));
            let pipeline = Pipeline::with_backend(&cfg, replay.clone(), Arc::new(ManualClock::starting_at(0))).unwrap();
            (pipeline, replay)
        }
    }

    fn block(rows: &[[&str; 4]]) -> String {
        let rows: Vec<Vec<&str>> = rows.iter().map(|r| r.to_vec()).collect();
        render_block(&rows)
    }

    #[test]
    fn two_clean_pages_keep_page_order() {
        let c = Corpus::new();
        c.page("fed", 0, "A ry\t0123456-2\t10\n", Some(&block(&[["A ry", "", "0123456-2", "10"]])));
        c.page("fed", 1, "B ry\t0123457-0\t20\n", Some(&block(&[["B ry", "", "0123457-0", "20"]])));
        let (pipeline, replay) = c.pipeline();
        let docs = list_input_files(&c.config().input_dir).unwrap();
        let (records, report) = pipeline.process_file(&docs[0]);
        let names: Vec<_> = records.iter().map(|r| r.club_name.as_str()).collect();
        assert_eq!(names, ["A ry", "B ry"]);
        assert_eq!(records[1].source_page, 1);
        assert_eq!(report.outcome, Outcome::Clean, "{:?}", report.issues);
        assert_eq!(report.pages_processed, 2);
        assert_eq!(replay.lookup_count(), 2);
    }

    #[test]
    fn missing_fixture_degrades_the_file_not_the_batch() {
        let c = Corpus::new();
        c.page("fed", 0, "A ry\t0123456-2\t10\n", Some(&block(&[["A ry", "", "0123456-2", "10"]])));
        c.page("fed", 1, "B ry\t0123457-0\t20\n", None);
        c.page("other", 0, "C ry\t0123456-2\t5\n", Some(&block(&[["C ry", "", "0123456-2", "5"]])));
        let (pipeline, _) = c.pipeline();
        let report = pipeline.run_batch().unwrap();
        let fed = &report.file_reports[0];
        assert_eq!(fed.rows_emitted, 1);
        assert_eq!(fed.outcome, Outcome::ManualRequired);
        assert!(fed.issues.iter().any(|i| i.kind == IssueKind::ProviderFailure && i.source_page == 1));
        assert_eq!(report.file_reports[1].outcome, Outcome::Clean);
        assert_eq!(report.exit_code(), 2);
    }

    #[test]
    fn empty_response_is_manual() {
        let c = Corpus::new();
        c.page("fed", 0, "A ry\t0123456-2\t10\n", Some(""));
        let (pipeline, _) = c.pipeline();
        let report = pipeline.run_batch().unwrap();
        assert_eq!(report.file_reports[0].outcome, Outcome::ManualRequired);
    }

    #[test]
    fn double_name_is_corrected_automatically() {
        let c = Corpus::new();
        c.page(
            "fed",
            0,
            "x\n",
            Some("#RECORDS\nTurun Uimarit ry - Åbo Simmare rf|0123456-2|150\n#END\n"),
        );
        let (pipeline, _) = c.pipeline();
        let report = pipeline.run_batch().unwrap();
        assert_eq!(report.file_reports[0].outcome, Outcome::CorrectedAutomatically);
        let out = c.dir.path().join("out");
        let text = fs::read_to_string(out.join("csv/fed.csv")).unwrap();
        assert!(text.contains("Turun Uimarit ry,Åbo Simmare rf,0123456-2,150,fed,0"), "{text}");
    }

    #[test]
    fn outputs_are_written_and_rows_conserved() {
        let c = Corpus::new();
        c.page("a", 0, "A ry\n", Some(&block(&[["A ry", "", "0123456-2", "10"], ["A2 ry", "", "0123457-0", "11"]])));
        c.page("b", 0, "B ry\n", Some(&block(&[["B ry", "", "0123456-2", "20"]])));
        let (pipeline, _) = c.pipeline();
        let report = pipeline.run_batch().unwrap();
        let out = c.dir.path().join("out");
        let combined = fs::read_to_string(out.join(COMBINED_CSV)).unwrap();
        assert_eq!(combined.lines().count() - 1, report.totals.rows);
        assert_eq!(report.totals.rows, 3);
        assert!(out.join(WORKBOOK).is_file());
        assert_eq!(read_run_report(&out.join(RUN_REPORT)).unwrap(), report);
        assert!(report.started_at.starts_with("1970-01-01T00:00:00"));
    }

    #[test]
    fn empty_input_dir_is_a_vacuous_run() {
        let c = Corpus::new();
        let (pipeline, _) = c.pipeline();
        let report = pipeline.run_batch().unwrap();
        assert_eq!(report.totals.files, 0);
        assert_eq!(report.exit_code(), 0);
        let out = c.dir.path().join("out");
        assert!(out.join(RUN_REPORT).is_file());
        assert!(!out.join(WORKBOOK).exists());
    }

    #[test]
    fn live_mode_without_credential_is_fatal() {
        let c = Corpus::new();
        let mut cfg = c.config();
        cfg.mode = ProviderMode::Live;
        cfg.endpoint_url = Some("http://127.0.0.1:9/v1/messages".into());
        cfg.api_key_env = "TABLESMITH_TEST_KEY_THAT_IS_NOT_SET".into();
        assert!(matches!(
            Pipeline::from_config(&cfg),
            Err(PipelineError::Provider(ProviderError::MissingCredential(_)))
        ));
    }
}
