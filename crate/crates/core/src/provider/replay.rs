use std::fs;
use std::io::ErrorKind;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};

use super::{prompt_fingerprint, CompletionBackend, CompletionResult, ProviderError};
use crate::prompting::PromptBundle;

/// Path of the replay fixture for a fingerprint.
pub fn fixture_path(fixture_dir: &Path, fingerprint: &str) -> PathBuf {
    fixture_dir.join(format!("{fingerprint}.resp.txt"))
}

/// Serves responses from `<fixture_dir>/<sha256(prompt)>.resp.txt`.
#[derive(Debug)]
pub struct ReplayProvider {
    fixture_dir: PathBuf,
    lookups: AtomicUsize,
}

impl ReplayProvider {
    pub fn new(fixture_dir: impl Into<PathBuf>) -> Self {
        Self {
            fixture_dir: fixture_dir.into(),
            lookups: AtomicUsize::new(0),
        }
    }

    /// Number of fingerprint lookups served or attempted so far.
    pub fn lookup_count(&self) -> usize {
        self.lookups.load(Ordering::SeqCst)
    }
}

/// Looks up the fixture for `bundle` in `fixture_dir`.
pub fn replay_complete(fixture_dir: &Path, bundle: &PromptBundle) -> Result<CompletionResult, ProviderError> {
    let fingerprint = prompt_fingerprint(&bundle.prompt_text);
    let path = fixture_path(fixture_dir, &fingerprint);
    let bytes = match fs::read(&path) {
        Ok(bytes) => bytes,
        Err(err) if err.kind() == ErrorKind::NotFound => {
            return Err(ProviderError::FixtureMissing {
                fingerprint,
                file_stem: bundle.file_stem.clone(),
                page_index: bundle.page_index,
                part_index: bundle.part_index,
            })
        }
        Err(err) => return Err(err.into()),
    };
    let text = String::from_utf8(bytes)
        .map_err(|_| ProviderError::FixtureNotUtf8(path.display().to_string()))?;
    Ok(CompletionResult {
        text,
        provider_name: "replay".to_owned(),
        attempt_count: 1,
        from_replay: true,
    })
}

impl CompletionBackend for ReplayProvider {
    fn complete(&self, bundle: &PromptBundle) -> Result<CompletionResult, ProviderError> {
        self.lookups.fetch_add(1, Ordering::SeqCst);
        replay_complete(&self.fixture_dir, bundle)
    }
}

/// Forwards to an inner backend and stores each response as a replay fixture.
pub struct RecordingProvider<B> {
    inner: B,
    fixture_dir: PathBuf,
}

impl<B: CompletionBackend> RecordingProvider<B> {
    pub fn new(inner: B, fixture_dir: impl Into<PathBuf>) -> Self {
        Self {
            inner,
            fixture_dir: fixture_dir.into(),
        }
    }
}

impl<B: CompletionBackend> CompletionBackend for RecordingProvider<B> {
    fn complete(&self, bundle: &PromptBundle) -> Result<CompletionResult, ProviderError> {
        let result = self.inner.complete(bundle)?;
        fs::create_dir_all(&self.fixture_dir)?;
        let path = fixture_path(&self.fixture_dir, &prompt_fingerprint(&bundle.prompt_text));
        fs::write(path, result.text.as_bytes())?;
        Ok(result)
    }
}
