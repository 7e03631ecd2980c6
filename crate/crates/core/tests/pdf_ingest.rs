use tablesmith::evalkit::pdf_fixture::render_pdf;
use tablesmith::evalkit::{build_corpus, CorpusSpec};
use tablesmith::ingest::{extract_pdf_pages, list_input_files, load_pages, SourceKind};

fn squash(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

#[test]
fn generated_pages_survive_a_pdf_round_trip() {
    let mut spec = CorpusSpec::fault_free(17);
    spec.n_files = 2;
    spec.rows_min = 90;
    spec.rows_max = 90;
    spec.page_row_capacity = 40;
    let corpus = build_corpus(&spec).unwrap();

    let dir = tempfile::tempdir().unwrap();
    for file in &corpus.files {
        std::fs::write(dir.path().join(format!("{}.pdf", file.file_stem)), render_pdf(&file.pages)).unwrap();
    }

    let docs = list_input_files(dir.path()).unwrap();
    assert_eq!(docs.len(), 2);
    for (doc, file) in docs.iter().zip(&corpus.files) {
        assert_eq!(doc.source_kind, SourceKind::Pdf);
        assert_eq!(doc.page_count as usize, file.pages.len());
        let pages = load_pages(doc).unwrap();
        assert_eq!(pages, extract_pdf_pages(&doc.location).unwrap());

        let text = squash(&pages.iter().map(|p| p.text.as_str()).collect::<Vec<_>>().join("\n"));
        for record in &file.golden {
            assert!(text.contains(&squash(&record.club_name)), "{} missing", record.club_name);
            if let Some(alt) = &record.alt_name {
                assert!(text.contains(&squash(alt)), "{alt} missing");
            }
        }
        for (page, original) in pages.iter().zip(&file.pages) {
            assert_eq!(squash(&page.text), squash(original));
        }
    }
}
