//! Text-layer adapter for PDF inputs. This is the only place a PDF engine
//! is used; the rest of the crate sees per-page UTF-8 strings.

use std::path::Path;

use lopdf::Document;
use thiserror::Error;

use super::PageText;

#[derive(Debug, Error)]
pub enum PdfError {
    #[error("not a PDF file")]
    NotAPdf,
    #[error("PDF is encrypted")]
    EncryptedPdf,
    #[error("PDF has no extractable text layer")]
    NoTextLayer,
    #[error("malformed PDF: {0}")]
    Malformed(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn open(bytes: &[u8]) -> Result<Document, PdfError> {
    if !bytes.starts_with(b"%PDF-") {
        return Err(PdfError::NotAPdf);
    }
    let doc = Document::load_mem(bytes).map_err(|err| {
        if contains(bytes, b"/Encrypt") {
            PdfError::EncryptedPdf
        } else {
            PdfError::Malformed(err.to_string())
        }
    })?;
    if doc.is_encrypted() {
        return Err(PdfError::EncryptedPdf);
    }
    Ok(doc)
}

fn contains(haystack: &[u8], needle: &[u8]) -> bool {
    haystack.windows(needle.len()).any(|w| w == needle)
}

pub(crate) fn page_count(path: &Path) -> Result<u32, PdfError> {
    let doc = open(&std::fs::read(path)?)?;
    Ok(doc.get_pages().len() as u32)
}

/// Extracts one [`PageText`] per physical page, in page order.
///
/// Each text-showing line in the content stream becomes one line of output.
/// Whitespace between columns is whatever the producer put in the strings.
pub fn extract_pdf_pages(pdf_path: &Path) -> Result<Vec<PageText>, PdfError> {
    let stem = pdf_path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or_default()
        .to_owned();
    let doc = open(&std::fs::read(pdf_path)?)?;
    let mut pages = Vec::new();
    for (index, (number, _)) in doc.get_pages().into_iter().enumerate() {
        let text = doc
            .extract_text(&[number])
            .map_err(|err| PdfError::Malformed(err.to_string()))?;
        pages.push(PageText::new(stem.clone(), index as u32, text));
    }
    if pages.iter().all(|p| p.text.trim().is_empty()) {
        return Err(PdfError::NoTextLayer);
    }
    Ok(pages)
}
