//! Flat `key = value` run configuration.
//!
//! Full-line `#` comments and blank lines are ignored. Keys are strict:
//! unknown or repeated keys are errors. Relative paths resolve against the
//! config file's directory.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde_json::{Map, Value};
use thiserror::Error;

use crate::provider::{
    ProviderProfile, DEFAULT_BASE_BACKOFF_MS, DEFAULT_MAX_RETRIES, DEFAULT_MIN_REQUEST_INTERVAL_MS,
};
use crate::refinery::{DEFAULT_ASSOC_SUFFIXES, DEFAULT_NOISE_STOPWORDS};

pub const KNOWN_KEYS: [&str; 19] = [
    "input_dir",
    "output_dir",
    "prompt_template",
    "mode",
    "endpoint_url",
    "model_name",
    "api_key_env",
    "fixture_dir",
    "request_timeout_ms",
    "max_retries",
    "base_backoff_ms",
    "min_request_interval_ms",
    "input_token_budget",
    "output_token_budget",
    "manual_error_ratio",
    "max_parallel_files",
    "noise_stopwords",
    "assoc_suffixes",
    "sampling_params",
];

pub const DEFAULT_API_KEY_ENV: &str = "TABLESMITH_API_KEY";
pub const DEFAULT_REQUEST_TIMEOUT_MS: u64 = 120_000;
pub const DEFAULT_MANUAL_ERROR_RATIO: f64 = 0.10;
pub const DEFAULT_MAX_PARALLEL_FILES: usize = 4;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConfigError {
    #[error("cannot read config {path}: {message}")]
    UnreadableFile { path: String, message: String },
    #[error("line {line}: expected `key = value`")]
    MalformedLine { line: usize },
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("config key `{0}` given twice")]
    DuplicateKey(String),
    #[error("missing config key `{0}`")]
    MissingKey(String),
    #[error("invalid value for `{key}`: {message}")]
    InvalidValue { key: String, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProviderMode {
    Live,
    Replay,
    Record,
}

impl std::str::FromStr for ProviderMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "live" => Ok(Self::Live),
            "replay" => Ok(Self::Replay),
            "record" => Ok(Self::Record),
            other => Err(format!("expected live, replay or record, got `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub input_dir: PathBuf,
    pub output_dir: PathBuf,
    /// `None` selects the shipped template.
    pub prompt_template: Option<PathBuf>,
    pub mode: ProviderMode,
    pub endpoint_url: Option<String>,
    pub model_name: Option<String>,
    pub api_key_env: String,
    pub fixture_dir: Option<PathBuf>,
    pub request_timeout_ms: u64,
    pub profile: ProviderProfile,
    pub manual_error_ratio: f64,
    pub max_parallel_files: usize,
    pub noise_stopwords: Vec<String>,
    pub assoc_suffixes: Vec<String>,
    pub sampling_params: Map<String, Value>,
    pub config_digest: String,
}

/// Parses config text into key/value pairs.
pub fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    parse_flat_pairs(text, &KNOWN_KEYS)
}

/// Parses flat `key = value` text, accepting only `known` keys.
pub fn parse_flat_pairs(text: &str, known: &[&str]) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut pairs = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or(ConfigError::MalformedLine { line: i + 1 })?;
        let key = key.trim();
        if key.is_empty() {
            return Err(ConfigError::MalformedLine { line: i + 1 });
        }
        if !known.contains(&key) {
            return Err(ConfigError::UnknownKey(key.to_owned()));
        }
        if pairs.insert(key.to_owned(), value.trim().to_owned()).is_some() {
            return Err(ConfigError::DuplicateKey(key.to_owned()));
        }
    }
    Ok(pairs)
}

/// SHA-256 of the key-sorted `key = value` lines.
pub fn config_digest(pairs: &BTreeMap<String, String>) -> String {
    let canonical: String = pairs.iter().map(|(k, v)| format!("{k} = {v}\n")).collect();
    crate::sha256_hex(canonical.as_bytes())
}

pub fn load_config(path: &Path) -> Result<RunConfig, ConfigError> {
    load_config_with_overrides(path, &BTreeMap::new())
}

/// Loads a config file, then applies `overrides` (e.g. CLI flags) before
/// validation. The digest covers the file contents only.
pub fn load_config_with_overrides(
    path: &Path,
    overrides: &BTreeMap<String, String>,
) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|err| ConfigError::UnreadableFile {
        path: path.display().to_string(),
        message: err.to_string(),
    })?;
    let pairs = parse_pairs(&text)?;
    let digest = config_digest(&pairs);
    let mut effective = pairs;
    for (key, value) in overrides {
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(ConfigError::UnknownKey(key.clone()));
        }
        effective.insert(key.clone(), value.clone());
    }
    let base = path.parent().unwrap_or(Path::new("."));
    RunConfig::from_pairs(&effective, base, digest)
}

fn invalid(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::InvalidValue {
        key: key.to_owned(),
        message: message.into(),
    }
}

impl RunConfig {
    pub fn from_pairs(
        pairs: &BTreeMap<String, String>,
        base_dir: &Path,
        config_digest: String,
    ) -> Result<Self, ConfigError> {
        let get = |key: &str| pairs.get(key).map(String::as_str).filter(|v| !v.is_empty());
        let require = |key: &str| get(key).ok_or_else(|| ConfigError::MissingKey(key.to_owned()));
        let resolve = |value: &str| {
            let p = Path::new(value);
            if p.is_absolute() {
                p.to_path_buf()
            } else {
                base_dir.join(p)
            }
        };
        fn number<T: std::str::FromStr>(key: &str, value: Option<&str>, default: T) -> Result<T, ConfigError> {
            value.map_or(Ok(default), |v| {
                v.replace('_', "").parse().map_err(|_| invalid(key, format!("`{v}` is not a number")))
            })
        }
        let list = |key: &str, default: &[&str]| -> Vec<String> {
            get(key).map_or_else(
                || default.iter().map(|s| s.to_string()).collect(),
                |v| {
                    v.split(',')
                        .map(str::trim)
                        .filter(|s| !s.is_empty())
                        .map(str::to_owned)
                        .collect()
                },
            )
        };

        let mode: ProviderMode = get("mode")
            .unwrap_or("replay")
            .parse()
            .map_err(|msg: String| invalid("mode", msg))?;
        let input_dir = resolve(require("input_dir")?);
        if !input_dir.is_dir() {
            return Err(invalid("input_dir", format!("{} is not a directory", input_dir.display())));
        }
        let output_dir = resolve(require("output_dir")?);
        let prompt_template = get("prompt_template").map(resolve);
        if let Some(t) = &prompt_template {
            if !t.is_file() {
                return Err(invalid("prompt_template", format!("{} does not exist", t.display())));
            }
        }

        let endpoint_url = get("endpoint_url").map(str::to_owned);
        let fixture_dir = get("fixture_dir").map(resolve);
        match mode {
            ProviderMode::Replay => {
                let dir = fixture_dir
                    .as_ref()
                    .ok_or_else(|| ConfigError::MissingKey("fixture_dir".into()))?;
                if !dir.is_dir() {
                    return Err(invalid("fixture_dir", format!("{} is not a directory", dir.display())));
                }
            }
            ProviderMode::Live => {
                require("endpoint_url")?;
            }
            ProviderMode::Record => {
                require("endpoint_url")?;
                require("fixture_dir")?;
            }
        }

        let model_name = get("model_name").map(str::to_owned);
        let profile = ProviderProfile {
            name: model_name.clone().unwrap_or_else(|| "default".to_owned()),
            input_token_budget: number("input_token_budget", get("input_token_budget"), 200_000)?,
            output_token_budget: number("output_token_budget", get("output_token_budget"), 4_096)?,
            max_retries: number("max_retries", get("max_retries"), DEFAULT_MAX_RETRIES)?,
            base_backoff_ms: number("base_backoff_ms", get("base_backoff_ms"), DEFAULT_BASE_BACKOFF_MS)?,
            min_request_interval_ms: number(
                "min_request_interval_ms",
                get("min_request_interval_ms"),
                DEFAULT_MIN_REQUEST_INTERVAL_MS,
            )?,
        };
        if profile.input_token_budget == 0 || profile.output_token_budget == 0 {
            return Err(invalid("input_token_budget", "token budgets must be positive"));
        }
        if profile.base_backoff_ms == 0 {
            return Err(invalid("base_backoff_ms", "must be positive"));
        }

        let manual_error_ratio: f64 =
            number("manual_error_ratio", get("manual_error_ratio"), DEFAULT_MANUAL_ERROR_RATIO)?;
        if !(0.0..=1.0).contains(&manual_error_ratio) {
            return Err(invalid("manual_error_ratio", "must lie in [0, 1]"));
        }
        let max_parallel_files: usize =
            number("max_parallel_files", get("max_parallel_files"), DEFAULT_MAX_PARALLEL_FILES)?;
        if max_parallel_files == 0 {
            return Err(invalid("max_parallel_files", "must be at least 1"));
        }

        let sampling_params = match get("sampling_params") {
            None => Map::new(),
            Some(raw) => match serde_json::from_str::<Value>(raw) {
                Ok(Value::Object(map)) => map,
                _ => return Err(invalid("sampling_params", "expected a JSON object")),
            },
        };

        Ok(Self {
            input_dir,
            output_dir,
            prompt_template,
            mode,
            endpoint_url,
            model_name,
            api_key_env: get("api_key_env").unwrap_or(DEFAULT_API_KEY_ENV).to_owned(),
            fixture_dir,
            request_timeout_ms: number("request_timeout_ms", get("request_timeout_ms"), DEFAULT_REQUEST_TIMEOUT_MS)?,
            profile,
            manual_error_ratio,
            max_parallel_files,
            noise_stopwords: list("noise_stopwords", &DEFAULT_NOISE_STOPWORDS),
            assoc_suffixes: list("assoc_suffixes", &DEFAULT_ASSOC_SUFFIXES),
            sampling_params,
            config_digest,
        })
    }
}
