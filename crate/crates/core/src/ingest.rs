//! Input discovery and per-page text loading.
//!
//! Two input shapes are recognised in an input directory:
//!
//! * page-text fixtures named `<stem>.page<NNN>.txt` (NNN is the zero-padded,
//!   0-based page index); all pages of a stem form one document;
//! * `<stem>.pdf` files, read through the text-layer adapter in [`pdf`].
//!
//! Everything else in the directory is ignored. All text is strict UTF-8.

pub mod pdf;

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use regex::Regex;
use serde::Serialize;
use thiserror::Error;

pub use pdf::{extract_pdf_pages, PdfError};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PageText {
    pub file_stem: String,
    pub page_index: u32,
    pub text: String,
    pub char_count: usize,
}

impl PageText {
    pub fn new(file_stem: impl Into<String>, page_index: u32, text: String) -> Self {
        let char_count = text.chars().count();
        Self {
            file_stem: file_stem.into(),
            page_index,
            text,
            char_count,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SourceKind {
    PlainTextPages,
    Pdf,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InputDocument {
    pub file_stem: String,
    pub source_kind: SourceKind,
    pub page_count: u32,
    /// The PDF file, or the directory holding the page-text files.
    pub location: PathBuf,
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("input directory {path} is unreadable: {source}")]
    DirectoryUnreadable {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("`{0}` is present both as a PDF and as page-text files")]
    MixedSourceConflict(String),
    #[error("`{stem}` has no page file for page {page_index}")]
    PageFileMissing { stem: String, page_index: u32 },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0} is not valid UTF-8")]
    InvalidUtf8(PathBuf),
    #[error("PDF adapter failed for `{stem}`: {source}")]
    AdapterFailure { stem: String, source: PdfError },
}

fn page_file_pattern() -> Regex {
    Regex::new(r"^(.+)\.page(\d{3})\.txt$").expect("static regex")
}

/// File name of page `page_index` of `stem` in the page-text fixture layout.
pub fn page_file_name(stem: &str, page_index: u32) -> String {
    format!("{stem}.page{page_index:03}.txt")
}

/// Lists the documents in `input_dir`, sorted by stem.
pub fn list_input_files(input_dir: &Path) -> Result<Vec<InputDocument>, IngestError> {
    let unreadable = |source| IngestError::DirectoryUnreadable {
        path: input_dir.to_path_buf(),
        source,
    };
    let pattern = page_file_pattern();
    let mut text_pages: BTreeMap<String, BTreeSet<u32>> = BTreeMap::new();
    let mut pdfs: BTreeMap<String, PathBuf> = BTreeMap::new();

    for entry in fs::read_dir(input_dir).map_err(unreadable)? {
        let entry = entry.map_err(unreadable)?;
        if !entry.file_type().map_err(unreadable)?.is_file() {
            continue;
        }
        let Some(name) = entry.file_name().to_str().map(str::to_owned) else {
            continue;
        };
        if let Some(caps) = pattern.captures(&name) {
            let index: u32 = caps[2].parse().expect("three digits");
            text_pages.entry(caps[1].to_owned()).or_default().insert(index);
        } else if let Some(stem) = pdf_stem(&name) {
            pdfs.insert(stem.to_owned(), entry.path());
        }
    }

    if let Some(stem) = pdfs.keys().find(|stem| text_pages.contains_key(*stem)) {
        return Err(IngestError::MixedSourceConflict(stem.clone()));
    }

    let mut docs: Vec<InputDocument> = text_pages
        .into_iter()
        .map(|(stem, pages)| InputDocument {
            page_count: pages.last().map_or(0, |last| last + 1),
            file_stem: stem,
            source_kind: SourceKind::PlainTextPages,
            location: input_dir.to_path_buf(),
        })
        .collect();
    docs.extend(pdfs.into_iter().map(|(stem, path)| InputDocument {
        // An unreadable PDF still gets listed; load_pages reports it.
        page_count: pdf::page_count(&path).unwrap_or(1).max(1),
        file_stem: stem,
        source_kind: SourceKind::Pdf,
        location: path,
    }));
    docs.sort_by(|a, b| a.file_stem.cmp(&b.file_stem));
    Ok(docs)
}

fn pdf_stem(name: &str) -> Option<&str> {
    let (stem, ext) = name.rsplit_once('.')?;
    (ext.eq_ignore_ascii_case("pdf") && !stem.is_empty()).then_some(stem)
}

/// Loads every page of `doc` in page order.
pub fn load_pages(doc: &InputDocument) -> Result<Vec<PageText>, IngestError> {
    match doc.source_kind {
        SourceKind::PlainTextPages => (0..doc.page_count)
            .map(|page_index| {
                let path = doc.location.join(page_file_name(&doc.file_stem, page_index));
                let bytes = fs::read(&path).map_err(|source| {
                    if source.kind() == std::io::ErrorKind::NotFound {
                        IngestError::PageFileMissing {
                            stem: doc.file_stem.clone(),
                            page_index,
                        }
                    } else {
                        IngestError::Io {
                            path: path.clone(),
                            source,
                        }
                    }
                })?;
                let text = String::from_utf8(bytes).map_err(|_| IngestError::InvalidUtf8(path))?;
                Ok(PageText::new(doc.file_stem.clone(), page_index, text))
            })
            .collect(),
        SourceKind::Pdf => extract_pdf_pages(&doc.location).map_err(|source| {
            IngestError::AdapterFailure {
                stem: doc.file_stem.clone(),
                source,
            }
        }),
    }
}
