//! Writes minimal text-layer PDFs for adapter tests.

use lopdf::content::{Content, Operation};
use lopdf::{dictionary, Document, Object, Stream};

/// Columns separated by tabs are rendered three spaces apart; the text
/// layer has no tab stops.
pub const COLUMN_GAP: &str = "   ";

/// Encodes `text` as WinAnsi bytes; unmappable characters become `?`.
pub fn win_ansi_bytes(text: &str) -> Vec<u8> {
    text.chars()
        .map(|c| match c {
            '\u{20}'..='\u{7e}' | '\u{a0}'..='\u{ff}' => c as u8,
            '€' => 0x80,
            '‘' => 0x91,
            '’' => 0x92,
            '“' => 0x93,
            '”' => 0x94,
            '–' => 0x96,
            '—' => 0x97,
            _ => b'?',
        })
        .collect()
}

/// One PDF page per entry, Helvetica with WinAnsi encoding, one text line per
/// input line. Empty strings give pages without any text.
pub fn render_pdf(pages: &[String]) -> Vec<u8> {
    let mut doc = Document::with_version("1.5");
    let pages_id = doc.new_object_id();
    let font_id = doc.add_object(dictionary! {
        "Type" => "Font",
        "Subtype" => "Type1",
        "BaseFont" => "Helvetica",
        "Encoding" => "WinAnsiEncoding",
    });
    let resources_id = doc.add_object(dictionary! {
        "Font" => dictionary! { "F1" => font_id },
    });

    let mut kids = Vec::with_capacity(pages.len());
    for text in pages {
        let mut ops = Vec::new();
        if !text.is_empty() {
            ops.push(Operation::new("BT", vec![]));
            ops.push(Operation::new("Tf", vec!["F1".into(), 6.into()]));
            ops.push(Operation::new("TL", vec![7.into()]));
            ops.push(Operation::new("Td", vec![36.into(), 806.into()]));
            for line in text.lines() {
                let line = line.replace('\t', COLUMN_GAP);
                ops.push(Operation::new("Tj", vec![Object::string_literal(win_ansi_bytes(&line))]));
                ops.push(Operation::new("T*", vec![]));
            }
            ops.push(Operation::new("ET", vec![]));
        }
        let content = Content { operations: ops }
            .encode()
            .expect("content stream encodes");
        let content_id = doc.add_object(Stream::new(dictionary! {}, content));
        let page_id = doc.add_object(dictionary! {
            "Type" => "Page",
            "Parent" => pages_id,
            "Contents" => content_id,
        });
        kids.push(page_id.into());
    }

    let count = kids.len() as i64;
    doc.objects.insert(
        pages_id,
        Object::Dictionary(dictionary! {
            "Type" => "Pages",
            "Kids" => kids,
            "Count" => count,
            "Resources" => resources_id,
            "MediaBox" => vec![0.into(), 0.into(), 595.into(), 842.into()],
        }),
    );
    let catalog_id = doc.add_object(dictionary! {
        "Type" => "Catalog",
        "Pages" => pages_id,
    });
    doc.trailer.set("Root", catalog_id);

    let mut bytes = Vec::new();
    doc.save_to(&mut bytes).expect("writing to memory");
    bytes
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bytes_start_with_pdf_header() {
        let bytes = render_pdf(&["x".to_owned()]);
        assert!(bytes.starts_with(b"%PDF-1.5"));
    }

    #[test]
    fn win_ansi_covers_nordic_letters() {
        assert_eq!(win_ansi_bytes("Åbo ä ö"), vec![0xC5, b'b', b'o', b' ', 0xE4, b' ', 0xF6]);
        assert_eq!(win_ansi_bytes("a–b ł"), vec![b'a', 0x96, b'b', b' ', b'?']);
    }
}
