//! PDF ingestion: text extraction and retrieval-ready chunking.
//!
//! A [`SourceBundle`] holds one or more extracted documents and an ordered
//! list of [`Chunk`]s. Chunk character ranges index into the document's
//! concatenated text, see [`DocumentText::text`].

mod chunk;
mod pdf;

use std::ops::Range;

use serde::{Deserialize, Serialize};

pub use chunk::{chunk_bundle, paragraph_spans, DEFAULT_CHUNK_CHARS, MIN_CHUNK_CHARS};
pub use pdf::extract_text;

/// Separator placed between pages when a document is viewed as one string.
pub const PAGE_SEPARATOR: &str = "\n\n";

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum IngestError {
    #[error("malformed PDF: {0}")]
    MalformedPdf(String),
    #[error("encrypted PDFs are not supported")]
    EncryptedPdf,
    #[error("no extractable text in any input document")]
    EmptyInput,
    #[error("target chunk size {0} is below the minimum of {MIN_CHUNK_CHARS} characters")]
    ChunkTargetTooSmall(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeadingCandidate {
    pub page_index: usize,
    pub text: String,
}

/// Page-ordered text of one PDF.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocumentText {
    /// Hex SHA-256 of the source bytes.
    pub doc_id: String,
    pub pages: Vec<String>,
    pub heading_candidates: Vec<HeadingCandidate>,
}

impl DocumentText {
    /// All pages joined with [`PAGE_SEPARATOR`].
    pub fn text(&self) -> String {
        self.pages.join(PAGE_SEPARATOR)
    }

    pub fn char_len(&self) -> usize {
        let seps = self.pages.len().saturating_sub(1) * PAGE_SEPARATOR.len();
        self.pages.iter().map(|p| p.chars().count()).sum::<usize>() + seps
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Chunk {
    pub chunk_id: String,
    pub doc_id: String,
    /// Character (not byte) range into the document's [`DocumentText::text`].
    pub char_range: Range<usize>,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceBundle {
    pub documents: Vec<DocumentText>,
    pub chunks: Vec<Chunk>,
    pub total_chars: usize,
}

impl SourceBundle {
    pub fn is_empty(&self) -> bool {
        self.chunks.is_empty()
    }

    pub fn headings(&self) -> impl Iterator<Item = &HeadingCandidate> {
        self.documents.iter().flat_map(|d| d.heading_candidates.iter())
    }
}
