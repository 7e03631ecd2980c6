use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use calamine::{open_workbook, Reader, Xlsx};
use tablesmith::evalkit::corpus::{CONFIG_FILE, FIXTURES_DIR, GOLDEN_DIR};
use tablesmith::evalkit::{evaluate_run, generate_corpus, Corpus, CorpusSpec};
use tablesmith::pipeline::{
    load_config, load_config_with_overrides, read_records_csv, read_run_report, Outcome, Pipeline, COMBINED_CSV,
    PER_FILE_CSV_DIR, RUN_REPORT, WORKBOOK,
};
use tablesmith::prompting::PromptTemplate;
use tablesmith::provider::replay::RecordingProvider;
use tablesmith::provider::{prompt_fingerprint, ManualClock, ReplayProvider, SystemClock};
use tablesmith::IssueKind;

fn small_spec(seed: u64) -> CorpusSpec {
    let mut spec = CorpusSpec::full_scale(seed);
    spec.n_files = 6;
    spec.rows_min = 30;
    spec.rows_max = 70;
    spec.page_row_capacity = 25;
    spec.n_manual_files = 1;
    spec.n_corrected_files = 2;
    spec
}

fn corpus(spec: &CorpusSpec) -> (tempfile::TempDir, Corpus) {
    let dir = tempfile::tempdir().unwrap();
    let corpus = generate_corpus(spec, dir.path()).unwrap();
    (dir, corpus)
}

fn run_with(root: &Path, overrides: &[(&str, &str)]) -> tablesmith::pipeline::RunReport {
    let overrides: BTreeMap<String, String> =
        overrides.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
    let cfg = load_config_with_overrides(&root.join(CONFIG_FILE), &overrides).unwrap();
    Pipeline::from_config(&cfg).unwrap().run_batch().unwrap()
}

#[test]
fn one_lookup_per_planned_part() {
    let (dir, corpus) = corpus(&small_spec(7));
    let cfg = load_config(&dir.path().join(CONFIG_FILE)).unwrap();
    let replay = Arc::new(ReplayProvider::new(cfg.fixture_dir.clone().unwrap()));
    let report = Pipeline::with_backend(&cfg, replay.clone(), Arc::new(ManualClock::starting_at(0)))
        .unwrap()
        .run_batch()
        .unwrap();

    let planned: usize = corpus.files.iter().map(|f| f.parts).sum();
    assert_eq!(replay.lookup_count(), planned);
    for (file, generated) in report.file_reports.iter().zip(&corpus.files) {
        assert_eq!(file.file_stem, generated.file_stem);
        assert_eq!(file.provider_calls, generated.parts);
        assert_eq!(file.pages_processed as usize, generated.pages.len());
        assert_eq!(file.outcome, generated.expected, "{}", file.file_stem);
    }
}

#[test]
fn outputs_agree_on_row_counts() {
    let (dir, _) = corpus(&small_spec(11));
    let report = run_with(dir.path(), &[]);
    let out = dir.path().join("out");

    let combined = read_records_csv(&out.join(COMBINED_CSV)).unwrap();
    assert_eq!(combined.len(), report.totals.rows);

    let mut per_file = 0;
    for file in &report.file_reports {
        let rows = read_records_csv(&out.join(PER_FILE_CSV_DIR).join(format!("{}.csv", file.file_stem))).unwrap();
        assert_eq!(rows.len(), file.rows_emitted);
        assert!(rows.iter().all(|r| r.source_file == file.file_stem));
        per_file += rows.len();
    }
    assert_eq!(per_file, combined.len());

    let mut workbook: Xlsx<_> = open_workbook(out.join(WORKBOOK)).unwrap();
    let sheets = workbook.sheet_names();
    assert_eq!(sheets.len(), report.file_reports.len());
    let mut sheet_rows = 0;
    for name in sheets {
        let range = workbook.worksheet_range(&name).unwrap();
        sheet_rows += range.height() - 1;
    }
    assert_eq!(sheet_rows, combined.len());

    let written = read_run_report(&out.join(RUN_REPORT)).unwrap();
    assert_eq!(written, report);
}

#[test]
fn a_failing_file_does_not_disturb_the_others() {
    let (dir, corpus) = corpus(&small_spec(3));
    let baseline = run_with(dir.path(), &[("output_dir", "baseline")]);

    // Remove every fixture of the first clean file.
    let victim = corpus.files.iter().find(|f| f.expected == Outcome::Clean).unwrap();
    let fixtures = dir.path().join(FIXTURES_DIR);
    let cfg = load_config(&dir.path().join(CONFIG_FILE)).unwrap();
    let template = PromptTemplate::load(cfg.prompt_template.as_ref().unwrap()).unwrap();
    let docs = tablesmith::ingest::list_input_files(&cfg.input_dir).unwrap();
    let doc = docs.iter().find(|d| d.file_stem == victim.file_stem).unwrap();
    for page in tablesmith::ingest::load_pages(doc).unwrap() {
        let bundle = tablesmith::prompting::build_prompt(&template, &page).unwrap();
        let _ = std::fs::remove_file(fixtures.join(format!("{}.resp.txt", prompt_fingerprint(&bundle.prompt_text))));
    }

    let damaged = run_with(dir.path(), &[("output_dir", "damaged")]);
    for (before, after) in baseline.file_reports.iter().zip(&damaged.file_reports) {
        if before.file_stem == victim.file_stem {
            assert_eq!(after.outcome, Outcome::ManualRequired);
            assert!(after.issues.iter().any(|i| i.kind == IssueKind::ProviderFailure));
            assert_eq!(after.rows_emitted, 0);
        } else {
            assert_eq!(before, after);
        }
    }
    assert_eq!(damaged.exit_code(), 2);
}

#[test]
fn recorded_fixtures_replay_identically() {
    let (dir, _) = corpus(&small_spec(5));
    let cfg = load_config(&dir.path().join(CONFIG_FILE)).unwrap();
    let recorded = dir.path().join("recorded");

    let recorder = RecordingProvider::new(ReplayProvider::new(cfg.fixture_dir.clone().unwrap()), &recorded);
    let first = Pipeline::with_backend(&cfg, Arc::new(recorder), Arc::new(SystemClock))
        .unwrap()
        .run_batch()
        .unwrap();

    let mut replay_cfg = cfg.clone();
    replay_cfg.output_dir = dir.path().join("replayed");
    let second = Pipeline::with_backend(&replay_cfg, Arc::new(ReplayProvider::new(&recorded)), Arc::new(SystemClock))
        .unwrap()
        .run_batch()
        .unwrap();

    assert_eq!(first.file_reports, second.file_reports);
    assert_eq!(
        std::fs::read(cfg.output_dir.join(COMBINED_CSV)).unwrap(),
        std::fs::read(replay_cfg.output_dir.join(COMBINED_CSV)).unwrap()
    );
}

#[test]
fn clean_corpus_scores_perfectly() {
    let mut spec = CorpusSpec::fault_free(9);
    spec.n_files = 4;
    spec.rows_min = 10;
    spec.rows_max = 150;
    let (dir, _) = corpus(&spec);
    let report = run_with(dir.path(), &[]);
    assert_eq!(report.totals.clean, 4);
    assert_eq!(report.exit_code(), 0);
    let eval = evaluate_run(&dir.path().join(GOLDEN_DIR), &dir.path().join("out")).unwrap();
    assert_eq!(eval.overall.accuracy, 1.0);
    assert_eq!(eval.overall.completeness, 1.0);
}
