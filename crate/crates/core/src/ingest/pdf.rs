//! Layout-aware text extraction from PDF content streams.
//!
//! Pages are walked operator by operator. Text positioning operators are
//! tracked only far enough to tell line breaks from paragraph breaks; the
//! result is plain text where lines are separated by `\n` and paragraphs by a
//! blank line.

use std::collections::BTreeMap;

use lopdf::content::Content;
use lopdf::Encoding;
use lopdf::{Document, Object};
use sha2::{Digest, Sha256};

use super::{DocumentText, HeadingCandidate, IngestError};

/// Upper bound on decompressed content per page.
const MAX_PAGE_CONTENT: usize = 64 * 1024 * 1024;

/// A vertical move larger than this many font sizes starts a new paragraph.
const PARAGRAPH_GAP_RATIO: f32 = 1.5;

pub fn extract_text(pdf_bytes: &[u8]) -> Result<DocumentText, IngestError> {
    let doc = load(pdf_bytes)?;
    let pages = doc.get_pages();
    if pages.is_empty() {
        return Err(IngestError::MalformedPdf("document has no pages".into()));
    }

    let mut texts = Vec::with_capacity(pages.len());
    let mut headings = Vec::new();
    for (page_index, (_, page_id)) in pages.iter().enumerate() {
        let blocks = page_blocks(&doc, *page_id)?;
        for block in &blocks {
            if is_heading_like(block) {
                headings.push(HeadingCandidate {
                    page_index,
                    text: block.lines[0].clone(),
                });
            }
        }
        texts.push(
            blocks
                .iter()
                .map(|b| b.lines.join("\n"))
                .collect::<Vec<_>>()
                .join("\n\n"),
        );
    }

    Ok(DocumentText {
        doc_id: hex::encode(Sha256::digest(pdf_bytes)),
        pages: texts,
        heading_candidates: headings,
    })
}

fn load(pdf_bytes: &[u8]) -> Result<Document, IngestError> {
    if !pdf_bytes.starts_with(b"%PDF-") && !find(pdf_bytes, b"%PDF-").is_some_and(|at| at < 1024) {
        return Err(IngestError::MalformedPdf("missing %PDF header".into()));
    }
    match Document::load_mem(pdf_bytes) {
        Ok(doc) if doc.was_encrypted() || doc.is_encrypted() => Err(IngestError::EncryptedPdf),
        Ok(doc) => Ok(doc),
        Err(lopdf::Error::InvalidPassword | lopdf::Error::Decryption(_) | lopdf::Error::AlreadyEncrypted) => {
            Err(IngestError::EncryptedPdf)
        }
        Err(_) if find(pdf_bytes, b"/Encrypt").is_some() => Err(IngestError::EncryptedPdf),
        Err(err) => Err(IngestError::MalformedPdf(err.to_string())),
    }
}

fn find(haystack: &[u8], needle: &[u8]) -> Option<usize> {
    haystack.windows(needle.len()).position(|w| w == needle)
}

#[derive(Debug, Default)]
struct Block {
    lines: Vec<String>,
    font_size: f32,
}

#[derive(Debug)]
struct TextState {
    /// Line matrix translation; scaling and `cm` are ignored.
    line_x: f32,
    line_y: f32,
    leading: f32,
    font_size: f32,
    font: Option<Vec<u8>>,
}

impl Default for TextState {
    fn default() -> Self {
        Self {
            line_x: 0.0,
            line_y: 0.0,
            leading: 0.0,
            font_size: 12.0,
            font: None,
        }
    }
}

struct PageWriter {
    blocks: Vec<Block>,
    line: String,
    line_y: Option<f32>,
    line_size: f32,
}

impl PageWriter {
    fn new() -> Self {
        Self {
            blocks: vec![Block::default()],
            line: String::new(),
            line_y: None,
            line_size: 0.0,
        }
    }

    /// Called before text is shown at baseline `y`.
    fn position(&mut self, y: f32, font_size: f32) {
        match self.line_y {
            None => {}
            Some(prev) if (prev - y).abs() < 0.5 => return,
            Some(prev) => {
                self.flush_line();
                let gap = (prev - y).abs();
                let size = font_size.max(self.line_size).max(1.0);
                if gap > PARAGRAPH_GAP_RATIO * size {
                    self.blocks.push(Block::default());
                }
            }
        }
        self.line_y = Some(y);
        self.line_size = font_size;
    }

    fn push(&mut self, text: &str, font_size: f32) {
        for ch in text.chars() {
            if ch == '\n' || ch == '\r' || ch == '\t' {
                if !self.line.ends_with(' ') && !self.line.is_empty() {
                    self.line.push(' ');
                }
            } else if !ch.is_control() && ch != '\u{feff}' {
                self.line.push(ch);
            }
        }
        self.line_size = self.line_size.max(font_size);
    }

    fn space(&mut self) {
        if !self.line.is_empty() && !self.line.ends_with(' ') {
            self.line.push(' ');
        }
    }

    fn flush_line(&mut self) {
        let line = self.line.trim().to_string();
        self.line.clear();
        if line.is_empty() {
            return;
        }
        let block = self.blocks.last_mut().expect("at least one block");
        block.font_size = block.font_size.max(self.line_size);
        block.lines.push(line);
    }

    fn finish(mut self) -> Vec<Block> {
        self.flush_line();
        self.blocks.retain(|b| !b.lines.is_empty());
        self.blocks
    }
}

fn page_blocks(doc: &Document, page_id: lopdf::ObjectId) -> Result<Vec<Block>, IngestError> {
    let fonts = doc.get_page_fonts(page_id).unwrap_or_default();
    let encodings: BTreeMap<Vec<u8>, Encoding> = fonts
        .into_iter()
        .filter_map(|(name, font)| font.get_font_encoding(doc).ok().map(|enc| (name, enc)))
        .collect();

    let raw = doc
        .get_page_content_with_limit(page_id, MAX_PAGE_CONTENT)
        .map_err(|e| IngestError::MalformedPdf(format!("page content: {e}")))?;
    if raw.iter().all(u8::is_ascii_whitespace) {
        return Ok(Vec::new());
    }
    let content = Content::decode(&raw).map_err(|e| IngestError::MalformedPdf(format!("content stream: {e}")))?;

    let mut state = TextState::default();
    let mut out = PageWriter::new();
    for op in &content.operations {
        let nums = |i: usize| op.operands.get(i).and_then(|o| o.as_float().ok()).unwrap_or(0.0);
        match op.operator.as_str() {
            "BT" => {
                state.line_x = 0.0;
                state.line_y = 0.0;
            }
            "Tf" => {
                state.font = op.operands.first().and_then(|o| o.as_name().ok()).map(<[u8]>::to_vec);
                state.font_size = nums(1).abs();
                if state.font_size == 0.0 {
                    state.font_size = 12.0;
                }
            }
            "TL" => state.leading = nums(0),
            "Td" => move_line(&mut state, &mut out, nums(0), nums(1)),
            "TD" => {
                state.leading = -nums(1);
                move_line(&mut state, &mut out, nums(0), nums(1));
            }
            "Tm" => {
                let (x, y) = (nums(4), nums(5));
                if (y - state.line_y).abs() < 0.5 && x > state.line_x {
                    out.space();
                }
                state.line_x = x;
                state.line_y = y;
            }
            "T*" => state.line_y -= state.leading,
            "Tj" | "TJ" | "'" | "\"" => {
                if matches!(op.operator.as_str(), "'" | "\"") {
                    state.line_y -= state.leading;
                }
                out.position(state.line_y, state.font_size);
                let Some(encoding) = state.font.as_ref().and_then(|f| encodings.get(f)) else {
                    continue;
                };
                let operands: &[Object] = if op.operator == "\"" {
                    op.operands.get(2).map(std::slice::from_ref).unwrap_or(&[])
                } else {
                    &op.operands
                };
                show_text(operands, encoding, state.font_size, &mut out);
            }
            _ => {}
        }
    }
    Ok(out.finish())
}

fn move_line(state: &mut TextState, out: &mut PageWriter, dx: f32, dy: f32) {
    if dy.abs() < 0.5 && dx > 0.0 {
        out.space();
    }
    state.line_x += dx;
    state.line_y += dy;
}

fn show_text(operands: &[Object], encoding: &Encoding, font_size: f32, out: &mut PageWriter) {
    for operand in operands {
        match operand {
            Object::String(bytes, _) => {
                if let Ok(text) = Document::decode_text(encoding, bytes) {
                    out.push(&text, font_size);
                }
            }
            Object::Array(items) => {
                for item in items {
                    match item {
                        Object::String(bytes, _) => {
                            if let Ok(text) = Document::decode_text(encoding, bytes) {
                                out.push(&text, font_size);
                            }
                        }
                        // Large negative kerning is how many producers encode a space.
                        other => {
                            if other.as_float().is_ok_and(|k| k < -200.0) {
                                out.space();
                            }
                        }
                    }
                }
            }
            _ => {}
        }
    }
}

fn is_heading_like(block: &Block) -> bool {
    if block.lines.len() != 1 {
        return false;
    }
    let line = block.lines[0].as_str();
    let len = line.chars().count();
    if !(2..=90).contains(&len) || line.ends_with(['.', ',', ';', ':']) || line.matches(',').count() >= 2 {
        return false;
    }
    is_numbered(line) || is_title_case(line)
}

/// `3`, `3.1`, `IV.` style prefixes followed by a word.
fn is_numbered(line: &str) -> bool {
    let mut parts = line.splitn(2, ' ');
    let (Some(prefix), Some(rest)) = (parts.next(), parts.next()) else {
        return false;
    };
    let prefix = prefix.trim_end_matches('.');
    let arabic = !prefix.is_empty() && prefix.split('.').all(|p| !p.is_empty() && p.chars().all(|c| c.is_ascii_digit()));
    let roman = !prefix.is_empty() && prefix.len() <= 4 && prefix.chars().all(|c| "IVX".contains(c));
    (arabic || roman) && rest.chars().next().is_some_and(char::is_alphabetic)
}

fn is_title_case(line: &str) -> bool {
    let words: Vec<&str> = line.split_whitespace().filter(|w| w.chars().count() > 3).collect();
    if words.is_empty() {
        return line.chars().next().is_some_and(char::is_uppercase);
    }
    let capitalized = words
        .iter()
        .filter(|w| w.chars().next().is_some_and(char::is_uppercase))
        .count();
    capitalized * 2 > words.len()
}
