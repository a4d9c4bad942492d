use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::config::ProviderConfig;
use crate::net;

/// Which of the three assistants issued a request.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Assistant {
    InfoExtractor,
    ProgramWriter,
    ScriptWriter,
}

impl Assistant {
    pub fn name(self) -> &'static str {
        match self {
            Assistant::InfoExtractor => "info_extractor",
            Assistant::ProgramWriter => "program_writer",
            Assistant::ScriptWriter => "script_writer",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: Role,
    pub content: String,
}

impl ChatMessage {
    pub fn system(content: impl Into<String>) -> Self {
        Self { role: Role::System, content: content.into() }
    }

    pub fn user(content: impl Into<String>) -> Self {
        Self { role: Role::User, content: content.into() }
    }

    pub fn assistant(content: impl Into<String>) -> Self {
        Self { role: Role::Assistant, content: content.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub assistant: Assistant,
    pub model: String,
    pub messages: Vec<ChatMessage>,
    pub schema_name: String,
    pub schema: Value,
}

impl ChatRequest {
    pub fn system_prompt(&self) -> &str {
        self.messages
            .iter()
            .find(|m| m.role == Role::System)
            .map_or("", |m| m.content.as_str())
    }

    /// The first user message, i.e. the rendered task prompt.
    pub fn user_prompt(&self) -> &str {
        self.messages
            .iter()
            .find(|m| m.role == Role::User)
            .map_or("", |m| m.content.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ProviderError {
    #[error("provider unreachable: {0}")]
    Unreachable(String),
    #[error("provider rejected the request: {0}")]
    Rejected(String),
}

/// A chat-completion backend returning the assistant's raw text.
pub trait LlmProvider: Send + Sync {
    fn complete(&self, request: &ChatRequest) -> Result<String, ProviderError>;
}

impl<T: LlmProvider + ?Sized> LlmProvider for std::sync::Arc<T> {
    fn complete(&self, request: &ChatRequest) -> Result<String, ProviderError> {
        (**self).complete(request)
    }
}

/// OpenAI-compatible `chat/completions` client.
#[derive(Debug, Clone)]
pub struct HttpLlm {
    endpoint: String,
    api_key: Option<String>,
    agent: ureq::Agent,
}

impl HttpLlm {
    pub fn new(cfg: &ProviderConfig) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(cfg.timeout_secs)))
            .http_status_as_error(false)
            .build()
            .into();
        Self {
            endpoint: cfg.llm_endpoint.clone(),
            api_key: cfg.api_key(),
            agent,
        }
    }

    fn body(request: &ChatRequest) -> Value {
        json!({
            "model": request.model,
            "messages": request.messages,
            "response_format": {
                "type": "json_schema",
                "json_schema": { "name": request.schema_name, "schema": request.schema }
            }
        })
    }
}

impl LlmProvider for HttpLlm {
    fn complete(&self, request: &ChatRequest) -> Result<String, ProviderError> {
        if !net::network_allowed() {
            return Err(ProviderError::Unreachable("network access is disabled".into()));
        }
        let mut req = self.agent.post(&self.endpoint);
        if let Some(key) = &self.api_key {
            req = req.header("Authorization", &format!("Bearer {key}"));
        }
        let mut resp = req
            .header("Content-Type", "application/json")
            .send(Self::body(request).to_string())
            .map_err(|e| ProviderError::Unreachable(e.to_string()))?;
        let status = resp.status().as_u16();
        let text = resp
            .body_mut()
            .read_to_string()
            .map_err(|e| ProviderError::Unreachable(format!("unreadable response: {e}")))?;
        let body: Value = serde_json::from_str(&text).unwrap_or(Value::String(text));
        match status {
            200..=299 => body["choices"][0]["message"]["content"]
                .as_str()
                .map(str::to_string)
                .ok_or_else(|| ProviderError::Rejected("response has no message content".into())),
            408 | 429 | 500..=599 => Err(ProviderError::Unreachable(format!("HTTP {status}: {body}"))),
            _ => Err(ProviderError::Rejected(format!("HTTP {status}: {body}"))),
        }
    }
}
