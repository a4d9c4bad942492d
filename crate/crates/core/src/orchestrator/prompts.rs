//! Prompt templates for the three assistants.
//!
//! System prompts are fixed text. User prompts are rendered from `{{name}}`
//! placeholders; rendering fails if a placeholder is left unfilled.

use serde_json::{json, Value};

use crate::language::Language;
use crate::planner::ChapterPlan;

pub const INFO_EXTRACTOR_SYSTEM: &str = include_str!("templates/info_extractor.system.txt");
pub const PROGRAM_WRITER_SYSTEM: &str = include_str!("templates/program_writer.system.txt");
pub const SCRIPT_WRITER_SYSTEM: &str = include_str!("templates/script_writer.system.txt");

const INFO_EXTRACTOR_USER: &str = include_str!("templates/info_extractor.user.txt");
const PROGRAM_WRITER_USER: &str = include_str!("templates/program_writer.user.txt");
const SCRIPT_WRITER_USER: &str = include_str!("templates/script_writer.user.txt");

pub const OUTLINE_HEADER: &str = "# Episode outline";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TemplateError {
    #[error("template placeholder {{{{{0}}}}} has no value")]
    Unfilled(String),
}

/// Replaces every `{{key}}` with its value. Values are inserted verbatim and
/// are not scanned for further placeholders.
pub fn render(template: &str, vars: &[(&str, &str)]) -> Result<String, TemplateError> {
    let mut out = String::with_capacity(template.len());
    let mut rest = template;
    while let Some(open) = rest.find("{{") {
        out.push_str(&rest[..open]);
        let after = &rest[open + 2..];
        let Some(close) = after.find("}}") else {
            out.push_str(&rest[open..]);
            return Ok(out);
        };
        let key = after[..close].trim();
        let value = vars
            .iter()
            .find(|(k, _)| *k == key)
            .map(|(_, v)| *v)
            .ok_or_else(|| TemplateError::Unfilled(key.to_string()))?;
        out.push_str(value);
        rest = &after[close + 2..];
    }
    out.push_str(rest);
    Ok(out)
}

/// Fixed instruction telling the script writer which language to speak.
pub fn language_block(language: Language) -> String {
    format!(
        "Write every line of dialogue in {name} (language code: {code}), regardless of the language the paper is written in.\nKeep technical terms accurate and explain them in {name}.",
        name = language.english_name(),
        code = language.code(),
    )
}

/// Numbered list of chapter titles and summaries, one per line.
pub fn outline_text(plan: &ChapterPlan) -> String {
    plan.chapters
        .iter()
        .enumerate()
        .map(|(i, ch)| format!("{}. {}: {}", i + 1, ch.title, ch.summary))
        .collect::<Vec<_>>()
        .join("\n")
}

/// Injected into the first chapter's prompt only.
pub fn outline_block(plan: &ChapterPlan) -> String {
    format!(
        "\n{OUTLINE_HEADER}\nIn the first turn the host welcomes the listeners and presents this outline of the episode, reading every line below:\n{}\n",
        outline_text(plan)
    )
}

pub fn info_schema() -> Value {
    json!({
        "type": "object",
        "properties": {
            "title": { "type": "string" },
            "authors": { "type": "array", "items": { "type": "string" } }
        },
        "required": ["title", "authors"],
        "additionalProperties": false
    })
}

pub fn program_schema() -> Value {
    json!({
        "type": "object",
        "properties": {
            "chapters": {
                "type": "array",
                "items": {
                    "type": "object",
                    "properties": {
                        "title": { "type": "string" },
                        "summary": { "type": "string" },
                        "turns": { "type": "integer", "minimum": 1 }
                    },
                    "required": ["title", "summary", "turns"],
                    "additionalProperties": false
                }
            }
        },
        "required": ["chapters"],
        "additionalProperties": false
    })
}

pub fn script_schema() -> Value {
    json!({
        "type": "object",
        "properties": {
            "turns": {
                "type": "array",
                "items": {
                    "type": "object",
                    "properties": {
                        "speaker": { "type": "string", "enum": ["host", "guest"] },
                        "text": { "type": "string" }
                    },
                    "required": ["speaker", "text"],
                    "additionalProperties": false
                }
            }
        },
        "required": ["turns"],
        "additionalProperties": false
    })
}

fn pretty(schema: &Value) -> String {
    serde_json::to_string_pretty(schema).expect("schema serializes")
}

pub fn info_extractor_user(excerpts: &str) -> String {
    render(
        INFO_EXTRACTOR_USER,
        &[("excerpts", excerpts), ("schema", &pretty(&info_schema()))],
    )
    .expect("template variables are complete")
}

pub fn program_writer_user(total_turns: u32, headings: &[String], excerpts: &str) -> String {
    let headings = if headings.is_empty() {
        "(none detected)".to_string()
    } else {
        headings.iter().map(|h| format!("- {h}")).collect::<Vec<_>>().join("\n")
    };
    render(
        PROGRAM_WRITER_USER,
        &[
            ("total_turns", &total_turns.to_string()),
            ("headings", &headings),
            ("excerpts", excerpts),
            ("schema", &pretty(&program_schema())),
        ],
    )
    .expect("template variables are complete")
}

pub struct ScriptPromptContext<'a> {
    pub paper_title: &'a str,
    pub authors: &'a [String],
    pub plan: &'a ChapterPlan,
    pub chapter_index: usize,
    pub language: Language,
    pub excerpts: &'a str,
}

pub fn script_writer_user(ctx: &ScriptPromptContext<'_>) -> String {
    let chapter = &ctx.plan.chapters[ctx.chapter_index];
    let outline = if ctx.chapter_index == 0 {
        outline_block(ctx.plan)
    } else {
        String::new()
    };
    render(
        SCRIPT_WRITER_USER,
        &[
            ("paper_title", ctx.paper_title),
            ("authors", &ctx.authors.join(", ")),
            ("guest_name", ctx.authors.first().map(String::as_str).unwrap_or("the author")),
            ("chapter_number", &(ctx.chapter_index + 1).to_string()),
            ("chapter_count", &ctx.plan.chapters.len().to_string()),
            ("chapter_title", &chapter.title),
            ("chapter_summary", &chapter.summary),
            ("turns", &chapter.turns.to_string()),
            ("outline_block", &outline),
            ("language_block", &language_block(ctx.language)),
            ("excerpts", ctx.excerpts),
            ("schema", &pretty(&script_schema())),
        ],
    )
    .expect("template variables are complete")
}

pub fn repair_message(problem: &str) -> String {
    format!(
        "Your previous reply could not be used: {problem}\nReply again with only a JSON object that matches the schema. Do not output any text other than json."
    )
}
