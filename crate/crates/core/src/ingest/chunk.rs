use std::ops::Range;

use super::{Chunk, DocumentText, IngestError, SourceBundle};

pub const DEFAULT_CHUNK_CHARS: usize = 2000;
pub const MIN_CHUNK_CHARS: usize = 200;

/// Greedily packs whole paragraphs into chunks of at most `target_chunk_chars`
/// characters. Paragraphs longer than the target are cut at whitespace.
pub fn chunk_bundle(docs: Vec<DocumentText>, target_chunk_chars: usize) -> Result<SourceBundle, IngestError> {
    if target_chunk_chars < MIN_CHUNK_CHARS {
        return Err(IngestError::ChunkTargetTooSmall(target_chunk_chars));
    }

    let mut chunks = Vec::new();
    let mut total_chars = 0;
    for doc in &docs {
        let chars: Vec<char> = doc.text().chars().collect();
        total_chars += chars.len();
        for range in pack(&chars, target_chunk_chars) {
            chunks.push(Chunk {
                chunk_id: format!("c{:04}", chunks.len()),
                doc_id: doc.doc_id.clone(),
                text: chars[range.clone()].iter().collect(),
                char_range: range,
            });
        }
    }
    if chunks.is_empty() {
        return Err(IngestError::EmptyInput);
    }

    Ok(SourceBundle {
        documents: docs,
        chunks,
        total_chars,
    })
}

/// Trimmed character spans of blank-line separated paragraphs.
pub fn paragraph_spans(chars: &[char]) -> Vec<Range<usize>> {
    let mut spans = Vec::new();
    let mut start = None;
    let mut last_content = 0;
    let mut newlines = 0;
    for (i, &c) in chars.iter().enumerate() {
        if c == '\n' {
            newlines += 1;
            if newlines >= 2 {
                if let Some(s) = start.take() {
                    spans.push(s..last_content);
                }
            }
        } else if !c.is_whitespace() {
            start.get_or_insert(i);
            last_content = i + 1;
            newlines = 0;
        }
    }
    if let Some(s) = start {
        spans.push(s..last_content);
    }
    spans
}

fn split_long(chars: &[char], span: Range<usize>, target: usize) -> Vec<Range<usize>> {
    let mut pieces = Vec::new();
    let mut start = span.start;
    while start < span.end {
        if span.end - start <= target {
            pieces.push(start..span.end);
            break;
        }
        let limit = start + target;
        let cut = (start + 1..=limit).rev().find(|&i| chars[i].is_whitespace());
        let (end, next) = match cut {
            Some(ws) => {
                let mut end = ws;
                while end > start && chars[end - 1].is_whitespace() {
                    end -= 1;
                }
                (end, ws)
            }
            None => (limit, limit),
        };
        pieces.push(start..end);
        start = next;
        while start < span.end && chars[start].is_whitespace() {
            start += 1;
        }
    }
    pieces
}

fn pack(chars: &[char], target: usize) -> Vec<Range<usize>> {
    let units = paragraph_spans(chars)
        .into_iter()
        .flat_map(|span| split_long(chars, span, target));

    let mut out = Vec::new();
    let mut current: Option<Range<usize>> = None;
    for unit in units {
        current = match current {
            Some(cur) if unit.end - cur.start <= target => Some(cur.start..unit.end),
            Some(cur) => {
                out.push(cur);
                Some(unit)
            }
            None => Some(unit),
        };
    }
    out.extend(current);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn doc(pages: &[&str]) -> DocumentText {
        DocumentText {
            doc_id: "d0".into(),
            pages: pages.iter().map(|p| p.to_string()).collect(),
            heading_candidates: vec![],
        }
    }

    fn strip_ws(s: &str) -> String {
        s.chars().filter(|c| !c.is_whitespace()).collect()
    }

    fn paragraphs_of(total: usize, para: usize) -> String {
        let sentence = "Sensor nodes forecast harvest and move deferrable work. ";
        let mut out = String::new();
        while out.chars().count() < total {
            let mut p = String::new();
            while p.chars().count() < para {
                p.push_str(sentence);
            }
            if !out.is_empty() {
                out.push_str("\n\n");
            }
            out.push_str(p.trim_end());
        }
        out.chars().take(total).collect()
    }

    #[test]
    fn thousand_chars_target_500_gives_two_or_three_chunks() {
        let text = paragraphs_of(1000, 180);
        assert_eq!(text.chars().count(), 1000);
        let bundle = chunk_bundle(vec![doc(&[&text])], 500).unwrap();
        assert!((2..=3).contains(&bundle.chunks.len()), "{} chunks", bundle.chunks.len());
        let joined: String = bundle.chunks.iter().map(|c| c.text.as_str()).collect();
        assert_eq!(strip_ws(&joined), strip_ws(&text));
    }

    #[test]
    fn short_document_is_one_chunk() {
        let bundle = chunk_bundle(vec![doc(&["short text\n\nsecond para"])], 500).unwrap();
        assert_eq!(bundle.chunks.len(), 1);
        assert_eq!(bundle.chunks[0].text, "short text\n\nsecond para");
    }

    #[test]
    fn rejects_small_target_and_empty_input() {
        assert_eq!(
            chunk_bundle(vec![doc(&["x"])], 199).unwrap_err(),
            IngestError::ChunkTargetTooSmall(199)
        );
        assert_eq!(chunk_bundle(vec![doc(&["", "  \n "])], 500).unwrap_err(), IngestError::EmptyInput);
        assert_eq!(chunk_bundle(vec![], 500).unwrap_err(), IngestError::EmptyInput);
    }

    #[test]
    fn unbroken_text_is_hard_cut() {
        let text = "x".repeat(1000);
        let bundle = chunk_bundle(vec![doc(&[&text])], 300).unwrap();
        assert_eq!(bundle.chunks.len(), 4);
        assert!(bundle.chunks.iter().all(|c| c.text.chars().count() <= 300));
    }

    #[test]
    fn ranges_span_pages_of_multiple_documents() {
        let mut a = doc(&["alpha page one", "alpha page two"]);
        a.doc_id = "a".into();
        let mut b = doc(&["beta"]);
        b.doc_id = "b".into();
        let bundle = chunk_bundle(vec![a.clone(), b.clone()], 200).unwrap();
        assert_eq!(bundle.total_chars, a.char_len() + b.char_len());
        assert_eq!(bundle.chunks.len(), 2);
        assert_eq!(bundle.chunks[0].doc_id, "a");
        assert_eq!(bundle.chunks[0].text, "alpha page one\n\nalpha page two");
        assert_eq!(bundle.chunks[1].doc_id, "b");
    }

    fn text_strategy() -> impl Strategy<Value = Vec<String>> {
        prop::collection::vec("([a-zé ]{0,60}\n{0,3}){0,40}", 1..4)
    }

    proptest! {
        #[test]
        fn chunks_cover_source_exactly(pages in text_strategy(), target in 200usize..700) {
            let d = DocumentText { doc_id: "p".into(), pages, heading_candidates: vec![] };
            let source = d.text();
            match chunk_bundle(vec![d.clone()], target) {
                Err(IngestError::EmptyInput) => prop_assert!(source.trim().is_empty()),
                Err(e) => prop_assert!(false, "unexpected {e}"),
                Ok(bundle) => {
                    let chars: Vec<char> = source.chars().collect();
                    let joined: String = bundle.chunks.iter().map(|c| c.text.as_str()).collect();
                    prop_assert_eq!(strip_ws(&joined), strip_ws(&source));
                    prop_assert_eq!(bundle.total_chars, chars.len());
                    let mut prev_end = 0;
                    for c in &bundle.chunks {
                        prop_assert!(c.char_range.start >= prev_end);
                        prop_assert!(c.char_range.end <= chars.len());
                        prop_assert!(c.text.chars().count() <= 2 * target);
                        let slice: String = chars[c.char_range.clone()].iter().collect();
                        prop_assert_eq!(&slice, &c.text);
                        prev_end = c.char_range.end;
                    }
                    // deterministic
                    prop_assert_eq!(chunk_bundle(vec![d], target).unwrap(), bundle);
                }
            }
        }
    }
}
