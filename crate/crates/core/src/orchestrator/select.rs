//! Picks which chunks go inline into each assistant's prompt.

use std::collections::HashSet;

use crate::ingest::{Chunk, SourceBundle};

pub const DEFAULT_CONTEXT_CHARS: usize = 12_000;
const INFO_CHUNKS: usize = 3;
const SEPARATOR: &str = "\n\n---\n\n";

const STOPWORDS: &[&str] = &[
    "about", "after", "also", "and", "because", "been", "between", "both", "does", "each", "from", "have",
    "into", "matters", "more", "most", "only", "other", "over", "some", "such", "than", "that", "their",
    "them", "then", "there", "these", "they", "this", "through", "under", "walks", "what", "when", "where",
    "which", "while", "will", "with", "without", "would", "your",
];

fn join(chunks: &[&Chunk]) -> String {
    chunks.iter().map(|c| c.text.as_str()).collect::<Vec<_>>().join(SEPARATOR)
}

/// Takes chunks in the given order until the character budget is spent. The
/// first chunk is always included.
fn within_budget<'a>(ordered: impl Iterator<Item = &'a Chunk>, budget: usize) -> Vec<&'a Chunk> {
    let mut used = 0;
    let mut out = Vec::new();
    for chunk in ordered {
        let len = chunk.text.chars().count();
        if !out.is_empty() && used + len > budget {
            continue;
        }
        used += len;
        out.push(chunk);
    }
    out
}

fn in_document_order<'a>(bundle: &'a SourceBundle, picked: &[&Chunk]) -> Vec<&'a Chunk> {
    let ids: HashSet<&str> = picked.iter().map(|c| c.chunk_id.as_str()).collect();
    bundle.chunks.iter().filter(|c| ids.contains(c.chunk_id.as_str())).collect()
}

/// Front matter: the first few chunks of every document.
pub fn for_info(bundle: &SourceBundle, budget: usize) -> String {
    let mut firsts = Vec::new();
    for doc in &bundle.documents {
        firsts.extend(bundle.chunks.iter().filter(|c| c.doc_id == doc.doc_id).take(INFO_CHUNKS));
    }
    join(&within_budget(firsts.into_iter(), budget))
}

/// Chunks that contain a detected heading come first, then an even sample of
/// the remainder; the result is re-sorted into document order.
pub fn for_program(bundle: &SourceBundle, budget: usize) -> String {
    let headings: Vec<&str> = bundle.headings().map(|h| h.text.as_str()).collect();
    let (with_heading, rest): (Vec<&Chunk>, Vec<&Chunk>) = bundle
        .chunks
        .iter()
        .partition(|c| headings.iter().any(|h| c.text.contains(h)));
    let mut ordered = with_heading;
    ordered.extend(even_sample(&rest));
    let picked = within_budget(ordered.into_iter(), budget);
    join(&in_document_order(bundle, &picked))
}

/// Interleaves from both ends toward the middle so a truncated prefix still
/// spans the document.
fn even_sample<'a>(chunks: &[&'a Chunk]) -> Vec<&'a Chunk> {
    let mut order = Vec::with_capacity(chunks.len());
    let mut step = chunks.len().max(1);
    let mut seen = vec![false; chunks.len()];
    while step >= 1 && order.len() < chunks.len() {
        for i in (0..chunks.len()).step_by(step) {
            if !seen[i] {
                seen[i] = true;
                order.push(chunks[i]);
            }
        }
        if step == 1 {
            break;
        }
        step /= 2;
    }
    order
}

pub fn keywords(text: &str) -> HashSet<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .map(str::to_lowercase)
        .filter(|w| w.chars().count() >= 4 && !STOPWORDS.contains(&w.as_str()))
        .collect()
}

/// Chunks ranked by keyword overlap with the chapter's title and summary.
pub fn for_chapter(bundle: &SourceBundle, title: &str, summary: &str, budget: usize) -> String {
    let wanted = keywords(&format!("{title} {summary}"));
    let mut scored: Vec<(usize, usize, &Chunk)> = bundle
        .chunks
        .iter()
        .enumerate()
        .map(|(i, c)| (keywords(&c.text).intersection(&wanted).count(), i, c))
        .collect();
    scored.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    let picked = within_budget(scored.into_iter().map(|(_, _, c)| c), budget);
    join(&in_document_order(bundle, &picked))
}
