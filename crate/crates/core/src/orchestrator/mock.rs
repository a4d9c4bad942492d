//! Offline LLM providers.
//!
//! [`ScriptedLlm`] replays canned replies per assistant, typically loaded from
//! a transcript file. [`SyntheticLlm`] reads the rendered prompt and writes a
//! schema-valid reply built from the paper excerpts it was given, which is
//! enough to drive the whole pipeline without a network.

use std::collections::{HashMap, VecDeque};
use std::path::Path;

use parking_lot::Mutex;
use serde::Deserialize;
use serde_json::json;

use super::prompts::OUTLINE_HEADER;
use super::provider::{Assistant, ChatRequest, LlmProvider, ProviderError};
use crate::planner::{MAX_CHAPTER_TURNS, MIN_CHAPTER_TURNS};

/// Keeps every request a mock provider has seen.
#[derive(Debug, Default)]
pub struct CallLog {
    calls: Mutex<Vec<ChatRequest>>,
}

impl CallLog {
    fn record(&self, req: &ChatRequest) {
        self.calls.lock().push(req.clone());
    }

    pub fn all(&self) -> Vec<ChatRequest> {
        self.calls.lock().clone()
    }

    pub fn count(&self, assistant: Assistant) -> usize {
        self.calls.lock().iter().filter(|c| c.assistant == assistant).count()
    }

    pub fn total(&self) -> usize {
        self.calls.lock().len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Scripted {
    Reply(String),
    Fail(ProviderError),
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum TranscriptEntry {
    Reply(String),
    Error { error: String, #[serde(default)] message: String },
}

#[derive(Debug, thiserror::Error)]
pub enum TranscriptError {
    #[error("cannot read transcript: {0}")]
    Io(#[from] std::io::Error),
    #[error("invalid transcript: {0}")]
    Parse(#[from] serde_json::Error),
}

/// Replays queued replies per assistant; once a queue runs dry the fallback
/// (if any) answers, otherwise the call fails as unreachable.
pub struct ScriptedLlm {
    queues: Mutex<HashMap<Assistant, VecDeque<Scripted>>>,
    fallback: Option<Box<dyn LlmProvider>>,
    log: CallLog,
}

impl ScriptedLlm {
    pub fn new() -> Self {
        Self {
            queues: Mutex::new(HashMap::new()),
            fallback: None,
            log: CallLog::default(),
        }
    }

    pub fn with_fallback(mut self, fallback: impl LlmProvider + 'static) -> Self {
        self.fallback = Some(Box::new(fallback));
        self
    }

    pub fn push(self, assistant: Assistant, reply: Scripted) -> Self {
        self.queues.lock().entry(assistant).or_default().push_back(reply);
        self
    }

    pub fn reply(self, assistant: Assistant, text: impl Into<String>) -> Self {
        self.push(assistant, Scripted::Reply(text.into()))
    }

    /// Loads `{"info_extractor": [...], "program_writer": [...], "script_writer": [...]}`
    /// where each entry is a reply string or `{"error": "unreachable" | "rejected", "message": ...}`.
    pub fn from_transcript_json(text: &str) -> Result<Self, TranscriptError> {
        let parsed: HashMap<Assistant, Vec<TranscriptEntry>> = serde_json::from_str(text)?;
        let mut llm = Self::new();
        for (assistant, entries) in parsed {
            for entry in entries {
                let scripted = match entry {
                    TranscriptEntry::Reply(s) => Scripted::Reply(s),
                    TranscriptEntry::Error { error, message } if error == "rejected" => {
                        Scripted::Fail(ProviderError::Rejected(message))
                    }
                    TranscriptEntry::Error { message, .. } => Scripted::Fail(ProviderError::Unreachable(message)),
                };
                llm = llm.push(assistant, scripted);
            }
        }
        Ok(llm)
    }

    pub fn from_transcript_file(path: &Path) -> Result<Self, TranscriptError> {
        Self::from_transcript_json(&std::fs::read_to_string(path)?)
    }

    pub fn log(&self) -> &CallLog {
        &self.log
    }
}

impl Default for ScriptedLlm {
    fn default() -> Self {
        Self::new()
    }
}

impl LlmProvider for ScriptedLlm {
    fn complete(&self, request: &ChatRequest) -> Result<String, ProviderError> {
        self.log.record(request);
        let next = self.queues.lock().get_mut(&request.assistant).and_then(VecDeque::pop_front);
        match next {
            Some(Scripted::Reply(text)) => Ok(text),
            Some(Scripted::Fail(err)) => Err(err),
            None => match &self.fallback {
                Some(fb) => fb.complete(request),
                None => Err(ProviderError::Unreachable(format!(
                    "transcript exhausted for {}",
                    request.assistant.name()
                ))),
            },
        }
    }
}

/// Deterministic stand-in that answers from the prompt contents alone.
#[derive(Debug, Default)]
pub struct SyntheticLlm {
    log: CallLog,
}

/// Words per turn cycle through these values (mean 45).
const TURN_WORDS: [usize; 5] = [42, 48, 45, 44, 46];

impl SyntheticLlm {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn log(&self) -> &CallLog {
        &self.log
    }
}

impl LlmProvider for SyntheticLlm {
    fn complete(&self, request: &ChatRequest) -> Result<String, ProviderError> {
        self.log.record(request);
        let prompt = request.user_prompt();
        let reply = match request.assistant {
            Assistant::InfoExtractor => info_reply(prompt),
            Assistant::ProgramWriter => program_reply(prompt),
            Assistant::ScriptWriter => script_reply(prompt),
        };
        Ok(reply.to_string())
    }
}

/// Text between a `# Header` line and the next `# ` header.
fn section<'a>(prompt: &'a str, header: &str) -> &'a str {
    let Some(start) = prompt.find(header) else {
        return "";
    };
    let body = &prompt[start + header.len()..];
    let body = body.strip_prefix('\n').unwrap_or(body);
    let end = body.find("\n# ").unwrap_or(body.len());
    body[..end].trim()
}

fn field<'a>(prompt: &'a str, label: &str) -> &'a str {
    prompt
        .lines()
        .find_map(|l| l.strip_prefix(label))
        .map(str::trim)
        .unwrap_or("")
}

fn info_reply(prompt: &str) -> serde_json::Value {
    let excerpts = section(prompt, "# Paper excerpts");
    let mut paragraphs = excerpts.split("\n\n").map(|p| p.split_whitespace().collect::<Vec<_>>().join(" "));
    let title = paragraphs.next().unwrap_or_default();
    let authors: Vec<String> = paragraphs
        .next()
        .unwrap_or_default()
        .split(',')
        .map(|a| a.trim().to_string())
        .filter(|a| !a.is_empty())
        .collect();
    json!({ "title": title, "authors": authors })
}

fn program_reply(prompt: &str) -> serde_json::Value {
    let total: u32 = field(prompt, "Length of the program (number of turns):").parse().unwrap_or(50);
    let headings: Vec<&str> = section(prompt, "# Section titles found in the paper")
        .lines()
        .filter_map(|l| l.strip_prefix("- "))
        .filter(|h| {
            let first = h.split_whitespace().next().unwrap_or("");
            let top_level = first.chars().all(|c| c.is_ascii_digit());
            top_level && !h.contains("References")
        })
        .collect();

    let min_k = total.div_ceil(MAX_CHAPTER_TURNS).max(1);
    let max_k = (total / MIN_CHAPTER_TURNS).max(min_k);
    let k = ((total + 5) / 10).clamp(min_k, max_k) as usize;

    let chapters: Vec<serde_json::Value> = (0..k)
        .map(|i| {
            let group: Vec<&str> = if headings.is_empty() {
                Vec::new()
            } else {
                let lo = i * headings.len() / k;
                let hi = ((i + 1) * headings.len() / k).max(lo + 1).min(headings.len());
                headings[lo.min(headings.len() - 1)..hi].to_vec()
            };
            let names: Vec<String> = group
                .iter()
                .map(|h| h.split_once(' ').map_or(*h, |(_, rest)| rest).to_string())
                .collect();
            let title = if names.is_empty() {
                format!("Part {}", i + 1)
            } else {
                names.join(" and ")
            };
            let turns = total / k as u32 + u32::from((i as u32) < total % k as u32);
            json!({
                "title": title,
                "summary": format!("The guest walks through {} and why it matters.", title.to_lowercase()),
                "turns": turns,
            })
        })
        .collect();
    json!({ "chapters": chapters })
}

fn script_reply(prompt: &str) -> serde_json::Value {
    let turns: usize = field(prompt, "Number of turns:").parse().unwrap_or(8);
    let title = field(prompt, "Paper title:");
    let guest = field(prompt, "The guest is")
        .split(',')
        .next()
        .unwrap_or("our guest")
        .to_string();
    let chapter_no: usize = prompt
        .lines()
        .find_map(|l| l.strip_prefix("# Chapter "))
        .and_then(|l| l.split_whitespace().next())
        .and_then(|n| n.parse().ok())
        .unwrap_or(1);
    let lang = prompt
        .split("(language code: ")
        .nth(1)
        .and_then(|s| s.get(..2))
        .unwrap_or("en");
    let (host_lead, guest_lead) = match lang {
        "ja" => ("なるほど。", "はい。"),
        "ko" => ("그렇군요.", "네."),
        _ => ("I see.", "Right."),
    };

    let outline: Vec<&str> = section(prompt, OUTLINE_HEADER)
        .lines()
        .skip(1)
        .take_while(|l| !l.trim().is_empty())
        .collect();

    let words: Vec<&str> = section(prompt, "# Paper excerpts").split_whitespace().collect();
    let words = if words.is_empty() { vec!["content"] } else { words };
    let mut cursor = (chapter_no * 97) % words.len();
    let mut take = |n: usize| -> String {
        let out: Vec<&str> = (0..n).map(|i| words[(cursor + i) % words.len()]).collect();
        cursor = (cursor + n) % words.len();
        out.join(" ")
    };

    let lines: Vec<serde_json::Value> = (0..turns)
        .map(|i| {
            let target = TURN_WORDS[i % TURN_WORDS.len()];
            let (speaker, text) = if i % 2 == 0 {
                let mut text = if i == 0 && !outline.is_empty() {
                    format!(
                        "Welcome to the show. Today {guest} joins us to talk about {title}. Here is the outline of this episode: {}",
                        outline.join(" ")
                    )
                } else {
                    host_lead.to_string()
                };
                let have = text.split_whitespace().count();
                if have < target {
                    text = format!("{text} {}", take(target - have));
                }
                ("host", text)
            } else {
                ("guest", format!("{guest_lead} {}", take(target - 1)))
            };
            json!({ "speaker": speaker, "text": text })
        })
        .collect();
    json!({ "turns": lines })
}
