//! Evaluation against golden tables and synthetic corpus generation.

pub mod corpus;
pub mod faults;
pub mod metrics;
pub mod pdf_fixture;
pub mod rng;

pub use corpus::{build_corpus, generate_corpus, read_expected_outcomes, Corpus, CorpusError, CorpusSpec};
pub use faults::{inject_faults, FaultTally};
pub use metrics::{compare_tables, evaluate_run, EvalError, EvaluationReport, Metrics, Mismatch};
pub use rng::SplitMix64;
