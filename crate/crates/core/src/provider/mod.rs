//! Completion backends: live HTTP, fingerprint-keyed replay, and a recorder
//! that captures live responses into the replay layout.

pub mod clock;
pub mod live;
pub mod replay;

use thiserror::Error;

use crate::prompting::{BudgetVerdict, PromptBundle};

pub use clock::{Clock, ManualClock, RateLimiter, SystemClock};
pub use live::{HttpReply, HttpTransport, LiveProvider, TransportError, UreqTransport};
pub use replay::{RecordingProvider, ReplayProvider};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProviderProfile {
    pub name: String,
    pub input_token_budget: u64,
    pub output_token_budget: u64,
    pub max_retries: u32,
    pub base_backoff_ms: u64,
    pub min_request_interval_ms: u64,
}

pub const DEFAULT_MAX_RETRIES: u32 = 3;
pub const DEFAULT_BASE_BACKOFF_MS: u64 = 2_000;
pub const DEFAULT_MIN_REQUEST_INTERVAL_MS: u64 = 1_000;

impl ProviderProfile {
    fn with_budgets(name: &str, input: u64, output: u64) -> Self {
        Self {
            name: name.to_owned(),
            input_token_budget: input,
            output_token_budget: output,
            max_retries: DEFAULT_MAX_RETRIES,
            base_backoff_ms: DEFAULT_BASE_BACKOFF_MS,
            min_request_interval_ms: DEFAULT_MIN_REQUEST_INTERVAL_MS,
        }
    }

    /// 128k-token context, 4k-token responses.
    pub fn gpt_4() -> Self {
        Self::with_budgets("gpt-4-0613", 128_000, 4_096)
    }

    /// 200k-token context, 4k-token responses.
    pub fn claude_3_opus() -> Self {
        Self::with_budgets("claude-3-opus", 200_000, 4_096)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompletionResult {
    pub text: String,
    pub provider_name: String,
    pub attempt_count: u32,
    pub from_replay: bool,
}

#[derive(Debug, Error)]
pub enum ProviderError {
    #[error("environment variable `{0}` holding the API key is not set")]
    MissingCredential(String),
    #[error("prompt for `{file_stem}` page {page_index} exceeds the provider budget ({verdict:?})")]
    BudgetRejected {
        file_stem: String,
        page_index: u32,
        verdict: BudgetVerdict,
    },
    #[error("gave up after {attempts} attempts (last HTTP status {last_status:?})")]
    ExhaustedRetries {
        attempts: u32,
        last_status: Option<u16>,
    },
    #[error("HTTP {status}: {body}")]
    NonRetryableHttpError { status: u16, body: String },
    #[error("no replay fixture {fingerprint}.resp.txt for `{file_stem}` page {page_index}{}", part_suffix(*part_index))]
    FixtureMissing {
        fingerprint: String,
        file_stem: String,
        page_index: u32,
        part_index: Option<u32>,
    },
    #[error("fixture {0} is not valid UTF-8")]
    FixtureNotUtf8(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn part_suffix(part: Option<u32>) -> String {
    part.map(|p| format!(" part {p}")).unwrap_or_default()
}

/// A backend that turns a prompt into raw completion text.
pub trait CompletionBackend: Send + Sync {
    fn complete(&self, bundle: &PromptBundle) -> Result<CompletionResult, ProviderError>;
}

/// Lowercase hex SHA-256 of the prompt's UTF-8 bytes.
pub fn prompt_fingerprint(prompt_text: &str) -> String {
    crate::sha256_hex(prompt_text.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fingerprint_matches_sha256_vectors() {
        assert_eq!(
            prompt_fingerprint(""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
        assert_eq!(
            prompt_fingerprint("abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
        let fp = prompt_fingerprint("Åbo Simklubb rf");
        assert_eq!(fp.len(), 64);
        assert_eq!(fp, prompt_fingerprint("Åbo Simklubb rf"));
        assert!(fp.chars().all(|c| c.is_ascii_hexdigit() && !c.is_ascii_uppercase()));
    }

    #[test]
    fn profiles_carry_documented_windows() {
        assert_eq!(ProviderProfile::gpt_4().input_token_budget, 128_000);
        assert_eq!(ProviderProfile::claude_3_opus().input_token_budget, 200_000);
        assert_eq!(ProviderProfile::claude_3_opus().output_token_budget, 4_096);
    }
}
