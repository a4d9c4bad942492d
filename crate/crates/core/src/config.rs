use serde::{Deserialize, Serialize};

use crate::orchestrator::Speaker;

pub const MAX_RETRIES_LIMIT: u8 = 5;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VoiceMap {
    pub host: String,
    pub guest: String,
}

impl VoiceMap {
    pub fn voice_for(&self, speaker: Speaker) -> &str {
        match speaker {
            Speaker::Host => &self.host,
            Speaker::Guest => &self.guest,
        }
    }
}

impl Default for VoiceMap {
    fn default() -> Self {
        Self {
            host: "radioHostVoice".into(),
            guest: "guestVoice".into(),
        }
    }
}

/// Endpoints and policies for the LLM and TTS providers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProviderConfig {
    /// Chat-completion URL, e.g. `https://api.openai.com/v1/chat/completions`.
    pub llm_endpoint: String,
    pub model_id: String,
    /// Speech URL, e.g. `https://api.openai.com/v1/audio/speech`.
    pub tts_endpoint: String,
    pub tts_model: String,
    pub voice_map: VoiceMap,
    pub max_retries: u8,
    pub timeout_secs: u64,
    /// Environment variable holding the bearer token for both endpoints.
    pub api_key_env: String,
}

impl Default for ProviderConfig {
    fn default() -> Self {
        Self {
            llm_endpoint: "https://api.openai.com/v1/chat/completions".into(),
            model_id: "gpt-4o".into(),
            tts_endpoint: "https://api.openai.com/v1/audio/speech".into(),
            tts_model: "tts-1".into(),
            voice_map: VoiceMap::default(),
            max_retries: 2,
            timeout_secs: 120,
            api_key_env: "PAPERWAVE_API_KEY".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid provider config: {0}")]
pub struct ConfigError(pub String);

impl ProviderConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.max_retries > MAX_RETRIES_LIMIT {
            return Err(ConfigError(format!(
                "max_retries {} exceeds {MAX_RETRIES_LIMIT}",
                self.max_retries
            )));
        }
        if self.voice_map.host.trim().is_empty() || self.voice_map.guest.trim().is_empty() {
            return Err(ConfigError("voice_map must name a voice for host and guest".into()));
        }
        if self.model_id.trim().is_empty() {
            return Err(ConfigError("model_id is empty".into()));
        }
        if self.timeout_secs == 0 {
            return Err(ConfigError("timeout_secs must be positive".into()));
        }
        Ok(())
    }

    pub fn api_key(&self) -> Option<String> {
        std::env::var(&self.api_key_env).ok().filter(|k| !k.is_empty())
    }
}
