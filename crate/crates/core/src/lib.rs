//! Turn per-page text from federation membership reports into validated
//! club tables.
//!
//! The flow is one page at a time: [`ingest`] produces page text,
//! [`prompting`] wraps it in an extraction prompt, a [`provider`] backend
//! completes it, [`extraction`] parses the record block out of the reply and
//! [`refinery`] validates the candidate rows into [`refinery::ClubRecord`]s.
//! [`pipeline`] drives whole batches and writes the sinks; [`evalkit`] scores
//! output against golden tables and generates synthetic corpora.

pub mod evalkit;
pub mod extraction;
pub mod ingest;
pub mod issues;
pub mod pipeline;
pub mod prompting;
pub mod provider;
pub mod refinery;

pub use issues::{IssueKind, Severity, ValidationIssue};

/// Lowercase hex SHA-256 of `bytes`.
pub(crate) fn sha256_hex(bytes: &[u8]) -> String {
    use sha2::{Digest, Sha256};
    hex::encode(Sha256::digest(bytes))
}
