//! Drives the Info Extractor, Program Writer and Script Writer assistants.
//!
//! Each assistant call asks for JSON matching a schema. Replies are parsed and
//! validated locally; on failure the conversation is extended with the bad
//! reply and a repair instruction, up to `max_retries` more times.

pub mod mock;
pub mod prompts;
pub mod provider;
pub mod select;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::ProviderConfig;
use crate::ingest::SourceBundle;
use crate::language::Language;
use crate::limiter::RequestLimiter;
use crate::planner::{self, ChapterPlan, PlannerError, TurnBudget};

pub use mock::{CallLog, Scripted, ScriptedLlm, SyntheticLlm};
pub use provider::{Assistant, ChatMessage, ChatRequest, HttpLlm, LlmProvider, ProviderError, Role};

pub const UNKNOWN_AUTHOR: &str = "Unknown Author";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PaperInfo {
    pub title: String,
    pub authors: Vec<String>,
    /// Set when the author list had to be synthesized.
    #[serde(default)]
    pub authors_missing: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Speaker {
    Host,
    Guest,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Turn {
    pub speaker: Speaker,
    pub text: String,
    pub chapter_index: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Script {
    pub turns: Vec<Turn>,
    pub plan: ChapterPlan,
    pub info: PaperInfo,
    pub language: Language,
}

impl Script {
    pub fn chapter_turn_counts(&self) -> Vec<u32> {
        let mut counts = vec![0u32; self.plan.chapters.len()];
        for t in &self.turns {
            counts[t.chapter_index] += 1;
        }
        counts
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OrchestratorError {
    #[error("ProviderUnreachable: {0}")]
    ProviderUnreachable(String),
    #[error("ProviderRejected: {0}")]
    ProviderRejected(String),
    #[error("SchemaRepairExhausted: {assistant:?} gave no valid reply after {attempts} attempts ({problem})")]
    SchemaRepairExhausted {
        assistant: Assistant,
        attempts: u32,
        problem: String,
        last_output: String,
    },
    #[error("TurnCountMismatch: chapter {chapter_index} expected {expected} turns, got {actual}")]
    TurnCountMismatch {
        chapter_index: usize,
        expected: u32,
        actual: u32,
    },
    #[error("UnrepairablePlan: {0}")]
    UnrepairablePlan(String),
    #[error("ChapterCountMismatch: plan has {expected} chapters, got {actual} turn lists")]
    ChapterCountMismatch { expected: usize, actual: usize },
    #[error("chapter {index} has {actual} turns but the plan expects {expected}")]
    ChapterLengthMismatch { index: usize, expected: u32, actual: usize },
    #[error("FirstSpeakerNotHost")]
    FirstSpeakerNotHost,
    #[error("invalid turn {index}: {reason}")]
    InvalidTurn { index: usize, reason: String },
    #[error("chapter index {0} is out of range")]
    ChapterIndexOutOfRange(usize),
}

impl From<ProviderError> for OrchestratorError {
    fn from(err: ProviderError) -> Self {
        match err {
            ProviderError::Unreachable(m) => OrchestratorError::ProviderUnreachable(m),
            ProviderError::Rejected(m) => OrchestratorError::ProviderRejected(m),
        }
    }
}

impl From<PlannerError> for OrchestratorError {
    fn from(err: PlannerError) -> Self {
        OrchestratorError::UnrepairablePlan(err.to_string())
    }
}

/// A successful assistant result and how many repair rounds it took.
#[derive(Debug, Clone, PartialEq)]
pub struct Attempted<T> {
    pub value: T,
    pub retries: u32,
}

/// Why a reply was not accepted.
#[derive(Debug, Clone, PartialEq)]
enum Rejection {
    Schema(String),
    TurnCount { expected: u32, actual: u32 },
}

impl Rejection {
    fn describe(&self) -> String {
        match self {
            Rejection::Schema(m) => m.clone(),
            Rejection::TurnCount { expected, actual } => {
                format!("expected exactly {expected} turns but received {actual}")
            }
        }
    }
}

/// Parses a reply that must be one JSON object, optionally fenced as ```json.
pub fn parse_json_reply(raw: &str) -> Result<Value, String> {
    let mut text = raw.trim();
    if let Some(inner) = text.strip_prefix("```") {
        let inner = inner.strip_prefix("json").unwrap_or(inner);
        text = inner.strip_suffix("```").unwrap_or(inner).trim();
    }
    if !text.starts_with('{') {
        return Err("reply is not a JSON object".into());
    }
    serde_json::from_str(text).map_err(|e| format!("invalid JSON: {e}"))
}

fn clean_text(s: &str) -> String {
    s.chars()
        .map(|c| if c.is_control() { ' ' } else { c })
        .collect::<String>()
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
}

fn parse_info(raw: &str) -> Result<PaperInfo, Rejection> {
    #[derive(Deserialize)]
    struct Reply {
        title: String,
        #[serde(default)]
        authors: Vec<String>,
    }
    let value = parse_json_reply(raw).map_err(Rejection::Schema)?;
    let reply: Reply = serde_json::from_value(value).map_err(|e| Rejection::Schema(e.to_string()))?;
    let title = clean_text(&reply.title);
    if title.is_empty() {
        return Err(Rejection::Schema("title is empty".into()));
    }
    let authors: Vec<String> = reply.authors.iter().map(|a| clean_text(a)).filter(|a| !a.is_empty()).collect();
    let authors_missing = authors.is_empty();
    Ok(PaperInfo {
        title,
        authors: if authors_missing { vec![UNKNOWN_AUTHOR.to_string()] } else { authors },
        authors_missing,
    })
}

fn parse_plan(raw: &str) -> Result<ChapterPlan, Rejection> {
    #[derive(Deserialize)]
    struct Reply {
        chapters: Vec<planner::Chapter>,
    }
    let value = parse_json_reply(raw).map_err(Rejection::Schema)?;
    let reply: Reply = serde_json::from_value(value).map_err(|e| Rejection::Schema(e.to_string()))?;
    if reply.chapters.is_empty() {
        return Err(Rejection::Schema("chapters is empty".into()));
    }
    Ok(ChapterPlan {
        chapters: reply
            .chapters
            .into_iter()
            .map(|c| planner::Chapter {
                title: clean_text(&c.title),
                summary: clean_text(&c.summary),
                turns: c.turns,
            })
            .collect(),
        language_of_titles: Language::En,
    })
}

fn parse_turns(raw: &str, chapter_index: usize, expected: u32) -> Result<Vec<Turn>, Rejection> {
    #[derive(Deserialize)]
    struct RawTurn {
        speaker: Speaker,
        text: String,
    }
    #[derive(Deserialize)]
    struct Reply {
        turns: Vec<RawTurn>,
    }
    let value = parse_json_reply(raw).map_err(Rejection::Schema)?;
    let reply: Reply = serde_json::from_value(value).map_err(|e| Rejection::Schema(e.to_string()))?;
    let turns: Vec<Turn> = reply
        .turns
        .into_iter()
        .map(|t| Turn {
            speaker: t.speaker,
            text: clean_text(&t.text),
            chapter_index,
        })
        .collect();
    if let Some(i) = turns.iter().position(|t| t.text.is_empty()) {
        return Err(Rejection::Schema(format!("turn {i} has empty text")));
    }
    if turns.len() != expected as usize {
        return Err(Rejection::TurnCount {
            expected,
            actual: turns.len() as u32,
        });
    }
    Ok(turns)
}

/// Runs assistants against one provider under a shared request limiter.
pub struct Orchestrator<'a> {
    llm: &'a dyn LlmProvider,
    cfg: &'a ProviderConfig,
    limiter: RequestLimiter,
    context_chars: usize,
}

impl<'a> Orchestrator<'a> {
    pub fn new(llm: &'a dyn LlmProvider, cfg: &'a ProviderConfig) -> Self {
        Self {
            llm,
            cfg,
            limiter: RequestLimiter::default(),
            context_chars: select::DEFAULT_CONTEXT_CHARS,
        }
    }

    pub fn with_limiter(mut self, limiter: RequestLimiter) -> Self {
        self.limiter = limiter;
        self
    }

    pub fn with_context_chars(mut self, chars: usize) -> Self {
        self.context_chars = chars;
        self
    }

    fn call<T>(
        &self,
        assistant: Assistant,
        system: &str,
        user: String,
        schema: Value,
        parse: impl Fn(&str) -> Result<T, Rejection>,
    ) -> Result<Attempted<T>, OrchestratorError> {
        let mut request = ChatRequest {
            assistant,
            model: self.cfg.model_id.clone(),
            messages: vec![ChatMessage::system(system), ChatMessage::user(user)],
            schema_name: assistant.name().to_string(),
            schema,
        };
        let attempts = 1 + u32::from(self.cfg.max_retries);
        let mut last = (Rejection::Schema("no attempt made".into()), String::new());
        for attempt in 0..attempts {
            let raw = {
                let _permit = self.limiter.acquire();
                self.llm.complete(&request)?
            };
            match parse(&raw) {
                Ok(value) => {
                    return Ok(Attempted {
                        value,
                        retries: attempt,
                    })
                }
                Err(rejection) => {
                    tracing::debug!(assistant = assistant.name(), attempt, problem = %rejection.describe(), "reply rejected");
                    request.messages.push(ChatMessage::assistant(raw.clone()));
                    request.messages.push(ChatMessage::user(prompts::repair_message(&rejection.describe())));
                    last = (rejection, raw);
                }
            }
        }
        Err(match last.0 {
            Rejection::TurnCount { expected, actual } => OrchestratorError::TurnCountMismatch {
                chapter_index: 0,
                expected,
                actual,
            },
            Rejection::Schema(problem) => OrchestratorError::SchemaRepairExhausted {
                assistant,
                attempts,
                problem,
                last_output: last.1,
            },
        })
    }

    pub fn extract_info(&self, bundle: &SourceBundle) -> Result<Attempted<PaperInfo>, OrchestratorError> {
        let user = prompts::info_extractor_user(&select::for_info(bundle, self.context_chars));
        self.call(
            Assistant::InfoExtractor,
            prompts::INFO_EXTRACTOR_SYSTEM,
            user,
            prompts::info_schema(),
            parse_info,
        )
    }

    /// Asks for a chapter plan and repairs it to the budget.
    pub fn write_program(
        &self,
        bundle: &SourceBundle,
        budget: &TurnBudget,
    ) -> Result<Attempted<ChapterPlan>, OrchestratorError> {
        if !planner::is_feasible_total(budget.total_turns) || budget.total_turns == 0 {
            return Err(OrchestratorError::UnrepairablePlan(format!(
                "budget of {} turns is not feasible",
                budget.total_turns
            )));
        }
        let headings: Vec<String> = bundle.headings().map(|h| h.text.clone()).collect();
        let user = prompts::program_writer_user(
            budget.total_turns,
            &headings,
            &select::for_program(bundle, self.context_chars),
        );
        let raw = self.call(
            Assistant::ProgramWriter,
            prompts::PROGRAM_WRITER_SYSTEM,
            user,
            prompts::program_schema(),
            parse_plan,
        )?;
        let repaired = planner::repair_chapter_plan(&raw.value, budget)?;
        if repaired != raw.value {
            tracing::info!(
                before = ?raw.value.chapters.iter().map(|c| c.turns).collect::<Vec<_>>(),
                after = ?repaired.chapters.iter().map(|c| c.turns).collect::<Vec<_>>(),
                "chapter plan repaired"
            );
        }
        Ok(Attempted {
            value: repaired,
            retries: raw.retries,
        })
    }

    pub fn write_chapter_script(
        &self,
        bundle: &SourceBundle,
        plan: &ChapterPlan,
        chapter_index: usize,
        info: &PaperInfo,
        language: Language,
    ) -> Result<Attempted<Vec<Turn>>, OrchestratorError> {
        let chapter = plan
            .chapters
            .get(chapter_index)
            .ok_or(OrchestratorError::ChapterIndexOutOfRange(chapter_index))?;
        let excerpts = select::for_chapter(bundle, &chapter.title, &chapter.summary, self.context_chars);
        let user = prompts::script_writer_user(&prompts::ScriptPromptContext {
            paper_title: &info.title,
            authors: &info.authors,
            plan,
            chapter_index,
            language,
            excerpts: &excerpts,
        });
        let expected = chapter.turns;
        self.call(
            Assistant::ScriptWriter,
            prompts::SCRIPT_WRITER_SYSTEM,
            user,
            prompts::script_schema(),
            |raw| parse_turns(raw, chapter_index, expected),
        )
        .map_err(|e| match e {
            OrchestratorError::TurnCountMismatch { expected, actual, .. } => OrchestratorError::TurnCountMismatch {
                chapter_index,
                expected,
                actual,
            },
            other => other,
        })
    }

    /// Info and program concurrently, then every chapter concurrently, then
    /// assembly in plan order.
    pub fn script_episode(
        &self,
        bundle: &SourceBundle,
        budget: &TurnBudget,
        language: Language,
    ) -> Result<Script, OrchestratorError> {
        let (info, plan) = std::thread::scope(|s| {
            let info = s.spawn(|| self.extract_info(bundle));
            let plan = self.write_program(bundle, budget);
            (info.join().expect("info extractor thread panicked"), plan)
        });
        let info = info?.value;
        let plan = plan?.value;

        let per_chapter: Vec<Result<Attempted<Vec<Turn>>, OrchestratorError>> = std::thread::scope(|s| {
            let handles: Vec<_> = (0..plan.chapters.len())
                .map(|i| {
                    let (plan, info) = (&plan, &info);
                    s.spawn(move || self.write_chapter_script(bundle, plan, i, info, language))
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("script writer thread panicked"))
                .collect()
        });
        let per_chapter = per_chapter
            .into_iter()
            .map(|r| r.map(|a| a.value))
            .collect::<Result<Vec<_>, _>>()?;
        assemble_script(per_chapter, plan, info, language)
    }
}

/// Concatenates per-chapter turns in plan order, stamping chapter indices.
pub fn assemble_script(
    per_chapter: Vec<Vec<Turn>>,
    plan: ChapterPlan,
    info: PaperInfo,
    language: Language,
) -> Result<Script, OrchestratorError> {
    if per_chapter.len() != plan.chapters.len() {
        return Err(OrchestratorError::ChapterCountMismatch {
            expected: plan.chapters.len(),
            actual: per_chapter.len(),
        });
    }
    for (index, (turns, chapter)) in per_chapter.iter().zip(&plan.chapters).enumerate() {
        if turns.len() != chapter.turns as usize {
            return Err(OrchestratorError::ChapterLengthMismatch {
                index,
                expected: chapter.turns,
                actual: turns.len(),
            });
        }
    }
    let turns: Vec<Turn> = per_chapter
        .into_iter()
        .enumerate()
        .flat_map(|(chapter_index, turns)| turns.into_iter().map(move |t| Turn { chapter_index, ..t }))
        .collect();
    match turns.first() {
        Some(t) if t.speaker == Speaker::Host => {}
        _ => return Err(OrchestratorError::FirstSpeakerNotHost),
    }
    for (index, t) in turns.iter().enumerate() {
        if t.text.trim().is_empty() {
            return Err(OrchestratorError::InvalidTurn { index, reason: "empty text".into() });
        }
        if t.text.chars().any(char::is_control) {
            return Err(OrchestratorError::InvalidTurn { index, reason: "control characters".into() });
        }
    }
    Ok(Script {
        turns,
        plan,
        info,
        language,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_reply_parsing() {
        assert!(parse_json_reply("{\"a\":1}").is_ok());
        assert!(parse_json_reply("```json\n{\"a\":1}\n```").is_ok());
        assert!(parse_json_reply("Sure! Here it is: {\"a\":1}").is_err());
        assert!(parse_json_reply("{\"a\":").is_err());
    }

    #[test]
    fn info_without_authors_is_flagged() {
        let info = parse_info(r#"{"title":"T","authors":[]}"#).unwrap();
        assert_eq!(info.authors, vec![UNKNOWN_AUTHOR.to_string()]);
        assert!(info.authors_missing);
        assert!(parse_info(r#"{"title":"  ","authors":["A"]}"#).is_err());
    }

    #[test]
    fn turns_are_cleaned_and_counted() {
        let raw = r#"{"turns":[{"speaker":"host","text":"hi\u0007 there"},{"speaker":"guest","text":"x"}]}"#;
        let turns = parse_turns(raw, 3, 2).unwrap();
        assert_eq!(turns[0].text, "hi there");
        assert_eq!(turns[1].chapter_index, 3);
        assert_eq!(
            parse_turns(raw, 0, 3).unwrap_err(),
            Rejection::TurnCount { expected: 3, actual: 2 }
        );
        assert!(matches!(
            parse_turns(r#"{"turns":[{"speaker":"narrator","text":"x"}]}"#, 0, 1),
            Err(Rejection::Schema(_))
        ));
    }
}
