//! Live HTTP completion backend.
//!
//! The request body is a chat-style JSON object (`model`, `max_tokens`,
//! `messages`) with any `sampling_params` merged in at the top level. Both
//! `Authorization: Bearer` and `x-api-key` headers carry the key, so the same
//! backend talks to either vendor's messages/chat endpoint.

use std::sync::Arc;
use std::time::Duration;

use serde_json::{json, Map, Value};

use super::clock::{Clock, RateLimiter};
use super::{CompletionBackend, CompletionResult, ProviderError, ProviderProfile};
use crate::prompting::{assert_budget, PromptBundle};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HttpReply {
    pub status: u16,
    pub body: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TransportError {
    Timeout,
    Connection(String),
}

/// One HTTP POST. Non-2xx statuses are replies, not errors.
pub trait HttpTransport: Send + Sync {
    fn post_json(
        &self,
        url: &str,
        headers: &[(String, String)],
        body: &str,
        timeout: Duration,
    ) -> Result<HttpReply, TransportError>;
}

#[derive(Debug, Default)]
pub struct UreqTransport;

impl HttpTransport for UreqTransport {
    fn post_json(
        &self,
        url: &str,
        headers: &[(String, String)],
        body: &str,
        timeout: Duration,
    ) -> Result<HttpReply, TransportError> {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(timeout))
            .build()
            .into();
        let mut request = agent.post(url).header("content-type", "application/json");
        for (name, value) in headers {
            request = request.header(name.as_str(), value.as_str());
        }
        let map_err = |err: ureq::Error| match err {
            ureq::Error::Timeout(_) => TransportError::Timeout,
            other => TransportError::Connection(other.to_string()),
        };
        let response = request.send(body).map_err(map_err)?;
        let status = response.status().as_u16();
        let body = response.into_body().read_to_string().map_err(map_err)?;
        Ok(HttpReply { status, body })
    }
}

#[derive(Debug, Clone)]
pub struct LiveSettings {
    pub endpoint_url: String,
    pub model_name: Option<String>,
    pub api_key: String,
    pub request_timeout_ms: u64,
    /// JSON object merged into the request body.
    pub sampling_params: Map<String, Value>,
}

pub struct LiveProvider {
    profile: ProviderProfile,
    settings: LiveSettings,
    transport: Box<dyn HttpTransport>,
    clock: Arc<dyn Clock>,
    limiter: RateLimiter,
}

impl LiveProvider {
    pub fn new(
        profile: ProviderProfile,
        settings: LiveSettings,
        transport: Box<dyn HttpTransport>,
        clock: Arc<dyn Clock>,
    ) -> Self {
        let limiter = RateLimiter::new(profile.min_request_interval_ms);
        Self {
            profile,
            settings,
            transport,
            clock,
            limiter,
        }
    }

    /// Reads the API key from the environment variable `api_key_env`.
    pub fn api_key_from_env(api_key_env: &str) -> Result<String, ProviderError> {
        match std::env::var(api_key_env) {
            Ok(key) if !key.trim().is_empty() => Ok(key),
            _ => Err(ProviderError::MissingCredential(api_key_env.to_owned())),
        }
    }

    fn request_body(&self, bundle: &PromptBundle) -> String {
        let mut body = Map::new();
        if let Some(model) = &self.settings.model_name {
            body.insert("model".into(), json!(model));
        }
        body.insert("max_tokens".into(), json!(self.profile.output_token_budget));
        body.insert(
            "messages".into(),
            json!([{ "role": "user", "content": bundle.prompt_text }]),
        );
        for (key, value) in &self.settings.sampling_params {
            body.insert(key.clone(), value.clone());
        }
        Value::Object(body).to_string()
    }

    fn headers(&self) -> Vec<(String, String)> {
        let key = &self.settings.api_key;
        vec![
            ("authorization".into(), format!("Bearer {key}")),
            ("x-api-key".into(), key.clone()),
            ("anthropic-version".into(), "2023-06-01".into()),
        ]
    }
}

fn is_retryable(status: u16) -> bool {
    status == 429 || (500..600).contains(&status)
}

/// Pulls the completion text out of a vendor reply without altering it.
/// Bodies that are not recognised JSON are returned as-is.
pub fn completion_text(body: &str) -> String {
    let Ok(value) = serde_json::from_str::<Value>(body) else {
        return body.to_owned();
    };
    if let Some(blocks) = value.get("content").and_then(Value::as_array) {
        let texts: Vec<&str> = blocks
            .iter()
            .filter_map(|b| b.get("text").and_then(Value::as_str))
            .collect();
        if !texts.is_empty() {
            return texts.concat();
        }
    }
    if let Some(choice) = value.get("choices").and_then(|c| c.get(0)) {
        if let Some(text) = choice
            .pointer("/message/content")
            .or_else(|| choice.get("text"))
            .and_then(Value::as_str)
        {
            return text.to_owned();
        }
    }
    for key in ["completion", "text"] {
        if let Some(text) = value.get(key).and_then(Value::as_str) {
            return text.to_owned();
        }
    }
    body.to_owned()
}

impl CompletionBackend for LiveProvider {
    fn complete(&self, bundle: &PromptBundle) -> Result<CompletionResult, ProviderError> {
        let verdict = assert_budget(bundle, &self.profile);
        if !verdict.passed() {
            return Err(ProviderError::BudgetRejected {
                file_stem: bundle.file_stem.clone(),
                page_index: bundle.page_index,
                verdict,
            });
        }
        if self.settings.api_key.is_empty() {
            return Err(ProviderError::MissingCredential(String::new()));
        }

        let body = self.request_body(bundle);
        let headers = self.headers();
        let timeout = Duration::from_millis(self.settings.request_timeout_ms);
        let mut last_status = None;
        let attempts = self.profile.max_retries + 1;
        for attempt in 0..attempts {
            self.limiter.acquire(self.clock.as_ref());
            match self
                .transport
                .post_json(&self.settings.endpoint_url, &headers, &body, timeout)
            {
                Ok(reply) if (200..300).contains(&reply.status) => {
                    return Ok(CompletionResult {
                        text: completion_text(&reply.body),
                        provider_name: self.profile.name.clone(),
                        attempt_count: attempt + 1,
                        from_replay: false,
                    });
                }
                Ok(reply) if is_retryable(reply.status) => last_status = Some(reply.status),
                Ok(reply) => {
                    return Err(ProviderError::NonRetryableHttpError {
                        status: reply.status,
                        body: reply.body,
                    })
                }
                Err(_) => last_status = None,
            }
            if attempt + 1 < attempts {
                let backoff = self.profile.base_backoff_ms.saturating_mul(1 << attempt.min(30));
                self.clock.sleep_ms(backoff);
            }
        }
        Err(ProviderError::ExhaustedRetries {
            attempts,
            last_status,
        })
    }
}
