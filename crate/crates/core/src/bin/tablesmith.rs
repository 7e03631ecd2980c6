use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use tablesmith::evalkit::{evaluate_run, generate_corpus, read_expected_outcomes, CorpusSpec};
use tablesmith::pipeline::{load_config_with_overrides, Outcome, Pipeline};

#[derive(Parser)]
#[command(name = "tablesmith", version, about = "Extract club membership tables from report pages")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Live,
    Replay,
    Record,
}

#[derive(Subcommand)]
enum Command {
    /// Run the extraction pipeline over an input directory.
    Extract {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        input_dir: Option<PathBuf>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[arg(long, value_enum)]
        mode: Option<Mode>,
    },
    /// Score a run's output against golden tables.
    Evaluate {
        #[arg(long)]
        golden: PathBuf,
        /// Output directory of an `extract` run.
        #[arg(long)]
        produced: PathBuf,
        /// Where to write the JSON evaluation report.
        #[arg(long)]
        report: PathBuf,
        /// Optional expected_outcomes.csv to check outcome buckets against.
        #[arg(long)]
        expected: Option<PathBuf>,
    },
    /// Generate a synthetic corpus with replay fixtures and golden tables.
    GenCorpus {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the seed in the spec file.
        #[arg(long)]
        seed: u64,
    },
}

fn absolute(path: &Path) -> String {
    std::path::absolute(path)
        .unwrap_or_else(|_| path.to_path_buf())
        .display()
        .to_string()
}

fn extract(config: &Path, input_dir: Option<PathBuf>, out_dir: Option<PathBuf>, mode: Option<Mode>) -> Result<ExitCode, String> {
    let mut overrides = BTreeMap::new();
    if let Some(dir) = input_dir {
        overrides.insert("input_dir".to_owned(), absolute(&dir));
    }
    if let Some(dir) = out_dir {
        overrides.insert("output_dir".to_owned(), absolute(&dir));
    }
    if let Some(mode) = mode {
        let mode = match mode {
            Mode::Live => "live",
            Mode::Replay => "replay",
            Mode::Record => "record",
        };
        overrides.insert("mode".to_owned(), mode.to_owned());
    }
    let config = load_config_with_overrides(config, &overrides).map_err(|e| e.to_string())?;
    let pipeline = Pipeline::from_config(&config).map_err(|e| e.to_string())?;
    let report = pipeline.run_batch().map_err(|e| e.to_string())?;
    let t = report.totals;
    println!(
        "files {}  clean {}  corrected {}  manual {}  rows {}",
        t.files, t.clean, t.corrected, t.manual, t.rows
    );
    for file in report.file_reports.iter().filter(|f| f.outcome != Outcome::Clean) {
        println!("  {}: {} ({} issues)", file.file_stem, file.outcome, file.issues.len());
    }
    println!("outputs in {}", config.output_dir.display());
    Ok(ExitCode::from(report.exit_code() as u8))
}

fn evaluate(golden: &Path, produced: &Path, report_path: &Path, expected: Option<&Path>) -> Result<ExitCode, String> {
    let report = evaluate_run(golden, produced).map_err(|e| e.to_string())?;
    let json = serde_json::to_string_pretty(&report).map_err(|e| e.to_string())?;
    std::fs::write(report_path, json + "\n").map_err(|e| format!("{}: {e}", report_path.display()))?;
    let m = report.overall;
    println!(
        "accuracy {:.4}  completeness {:.4}  robustness {:.4}  ({} of {} data points)",
        m.accuracy, m.completeness, m.robustness, m.matched_points, m.golden_points
    );

    let mut ok = true;
    if let Some(path) = expected {
        let expected = read_expected_outcomes(path).map_err(|e| e.to_string())?;
        for file in &report.files {
            let want = expected.get(&file.file_stem);
            if want != file.outcome.as_ref() {
                ok = false;
                println!(
                    "  {}: expected {}, got {}",
                    file.file_stem,
                    want.map_or("nothing".to_owned(), Outcome::to_string),
                    file.outcome.map_or("nothing".to_owned(), |o| o.to_string())
                );
            }
        }
        if ok {
            println!("all {} outcomes as expected", report.files.len());
        }
    }
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(2) })
}

fn gen_corpus(spec_path: &Path, out: &Path, seed: u64) -> Result<ExitCode, String> {
    let mut spec = CorpusSpec::load(spec_path).map_err(|e| e.to_string())?;
    spec.seed = seed;
    let corpus = generate_corpus(&spec, out).map_err(|e| e.to_string())?;
    let expected = corpus.expected_outcomes();
    let count = |o| expected.values().filter(|&&v| v == o).count();
    println!(
        "{} files, {} rows, {} fixtures; expected clean {} corrected {} manual {}",
        corpus.files.len(),
        corpus.total_rows(),
        corpus.fixtures.len(),
        count(Outcome::Clean),
        count(Outcome::CorrectedAutomatically),
        count(Outcome::ManualRequired)
    );
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Extract {
            config,
            input_dir,
            out_dir,
            mode,
        } => extract(&config, input_dir, out_dir, mode),
        Command::Evaluate {
            golden,
            produced,
            report,
            expected,
        } => evaluate(&golden, &produced, &report, expected.as_deref()),
        Command::GenCorpus { spec, out, seed } => gen_corpus(&spec, &out, seed),
    };
    result.unwrap_or_else(|message| {
        eprintln!("tablesmith: {message}");
        ExitCode::from(1)
    })
}
