//! Recording options shared by every front door (CLI flags, HTTP form).

use serde::{Deserialize, Serialize};

use crate::language::Language;

pub const MIN_MINUTES: u32 = 1;
pub const MAX_MINUTES: u32 = 120;
pub const MAX_TITLE_CHARS: usize = 200;
pub const MAX_KEYWORDS: usize = 20;
pub const MAX_KEYWORD_CHARS: usize = 64;
pub const DEFAULT_CHANNEL: &str = "default";

/// Field names used in validation errors.
pub mod field {
    pub const TITLE: &str = "title";
    pub const DURATION: &str = "duration";
    pub const LANGUAGE: &str = "language";
    pub const MODEL_ID: &str = "model_id";
    pub const DESCRIPTION: &str = "description";
    pub const KEYWORDS: &str = "keywords";
    pub const COVER_IMAGE_URL: &str = "cover_image_url";
    pub const CHANNEL_ID: &str = "channel_id";
    pub const SOURCE_PAPERS: &str = "source_papers";
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldError {
    pub field: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, thiserror::Error)]
#[error("ValidationFailed({})", .errors.iter().map(|e| format!("{}: {}", e.field, e.message)).collect::<Vec<_>>().join("; "))]
pub struct ValidationFailed {
    pub errors: Vec<FieldError>,
}

impl ValidationFailed {
    pub fn fields(&self) -> Vec<&str> {
        self.errors.iter().map(|e| e.field.as_str()).collect()
    }
}

/// Options exactly as a user typed them. Absent and empty are equivalent.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RawRecordingFields {
    pub title: Option<String>,
    pub minutes: Option<String>,
    pub language: Option<String>,
    pub model_id: Option<String>,
    pub description: Option<String>,
    /// Comma-separated.
    pub keywords: Option<String>,
    pub cover_image_url: Option<String>,
    pub channel_id: Option<String>,
    pub source_paper_count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecordingOptions {
    pub title: String,
    pub minutes: u32,
    pub language: Language,
    pub model_id: String,
    pub description: String,
    pub keywords: Vec<String>,
    pub cover_image_url: String,
    pub channel_id: String,
}

fn text(v: &Option<String>) -> &str {
    v.as_deref().map(str::trim).unwrap_or("")
}

pub fn is_valid_channel_id(id: &str) -> bool {
    (1..=64).contains(&id.len()) && id.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
}

impl RecordingOptions {
    /// Validates every field and reports all problems at once.
    pub fn from_fields(raw: &RawRecordingFields) -> Result<Self, ValidationFailed> {
        let mut errors = Vec::new();
        let mut fail = |field: &str, message: String| errors.push(FieldError { field: field.into(), message });

        let title = text(&raw.title).to_string();
        if title.is_empty() {
            fail(field::TITLE, "must not be empty".into());
        } else if title.chars().count() > MAX_TITLE_CHARS {
            fail(field::TITLE, format!("must be at most {MAX_TITLE_CHARS} characters"));
        }

        let minutes = match text(&raw.minutes) {
            "" => {
                fail(field::DURATION, "is required".into());
                0
            }
            m => match m.parse::<u32>() {
                Ok(n) if (MIN_MINUTES..=MAX_MINUTES).contains(&n) => n,
                Ok(n) => {
                    fail(field::DURATION, format!("{n} minutes is outside {MIN_MINUTES}-{MAX_MINUTES}"));
                    0
                }
                Err(_) => {
                    fail(field::DURATION, format!("'{m}' is not a whole number of minutes"));
                    0
                }
            },
        };

        let language = match text(&raw.language).parse::<Language>() {
            Ok(l) => Some(l),
            Err(_) => {
                fail(
                    field::LANGUAGE,
                    format!("'{}' is not supported (use en, ja or ko)", text(&raw.language)),
                );
                None
            }
        };

        let model_id = text(&raw.model_id).to_string();
        if model_id.is_empty() {
            fail(field::MODEL_ID, "must not be empty".into());
        }

        let keywords: Vec<String> = text(&raw.keywords)
            .split(',')
            .map(str::trim)
            .filter(|k| !k.is_empty())
            .map(str::to_string)
            .collect();
        if keywords.len() > MAX_KEYWORDS {
            fail(field::KEYWORDS, format!("at most {MAX_KEYWORDS} keywords"));
        } else if keywords.iter().any(|k| k.chars().count() > MAX_KEYWORD_CHARS) {
            fail(field::KEYWORDS, format!("each keyword must be at most {MAX_KEYWORD_CHARS} characters"));
        }

        let cover_image_url = text(&raw.cover_image_url).to_string();
        if !cover_image_url.is_empty()
            && !(cover_image_url.starts_with("http://") || cover_image_url.starts_with("https://"))
        {
            fail(field::COVER_IMAGE_URL, "must be an http(s) URL".into());
        }

        let channel_id = match text(&raw.channel_id) {
            "" => DEFAULT_CHANNEL.to_string(),
            c => c.to_string(),
        };
        if !is_valid_channel_id(&channel_id) {
            fail(field::CHANNEL_ID, "use 1-64 letters, digits, '-' or '_'".into());
        }

        if raw.source_paper_count == 0 {
            fail(field::SOURCE_PAPERS, "at least one PDF is required".into());
        }

        match (errors.is_empty(), language) {
            (true, Some(language)) => Ok(Self {
                title,
                minutes,
                language,
                model_id,
                description: text(&raw.description).to_string(),
                keywords,
                cover_image_url,
                channel_id,
            }),
            _ => Err(ValidationFailed { errors }),
        }
    }
}
