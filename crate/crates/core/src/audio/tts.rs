use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Duration;

use parking_lot::Mutex;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{decode_wav, AudioClip, MASTER_CHANNELS, MASTER_RATE};
use crate::config::{ProviderConfig, VoiceMap};
use crate::language::Language;
use crate::limiter::RequestLimiter;
use crate::net;
use crate::orchestrator::Turn;

/// Speaking rate of the mock voice.
pub const MOCK_WORDS_PER_SECOND: f64 = 2.5;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TtsError {
    #[error("ProviderUnreachable: {0}")]
    ProviderUnreachable(String),
    #[error("SynthesisRejected: {0}")]
    SynthesisRejected(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TtsRequest {
    pub text: String,
    pub voice_id: String,
    pub language: Language,
}

pub trait TtsProvider: Send + Sync {
    /// Returns speech at the provider's native rate and layout.
    fn synthesize(&self, request: &TtsRequest) -> Result<AudioClip, TtsError>;
}

impl<T: TtsProvider + ?Sized> TtsProvider for std::sync::Arc<T> {
    fn synthesize(&self, request: &TtsRequest) -> Result<AudioClip, TtsError> {
        (**self).synthesize(request)
    }
}

/// Speaks one turn with the voice mapped to its speaker.
pub fn synthesize_turn(
    provider: &dyn TtsProvider,
    turn: &Turn,
    voices: &VoiceMap,
    language: Language,
) -> Result<AudioClip, TtsError> {
    if turn.text.trim().is_empty() {
        return Err(TtsError::SynthesisRejected("turn text is empty".into()));
    }
    provider.synthesize(&TtsRequest {
        text: turn.text.clone(),
        voice_id: voices.voice_for(turn.speaker).to_string(),
        language,
    })
}

/// Speaks every turn, at most `concurrency` at a time, and conforms each clip
/// to the master rate and layout. Output order matches `turns`.
pub fn synthesize_script(
    provider: &dyn TtsProvider,
    turns: &[Turn],
    voices: &VoiceMap,
    language: Language,
    limiter: &RequestLimiter,
) -> Result<Vec<AudioClip>, TtsError> {
    let slots: Vec<Mutex<Option<Result<AudioClip, TtsError>>>> = turns.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    let workers = limiter.capacity().min(turns.len()).max(1);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(turn) = turns.get(i) else { break };
                let result = {
                    let _permit = limiter.acquire();
                    synthesize_turn(provider, turn, voices, language)
                }
                .and_then(|clip| {
                    clip.conform(MASTER_RATE, MASTER_CHANNELS)
                        .map_err(|e| TtsError::SynthesisRejected(e.to_string()))
                });
                let failed = result.is_err();
                *slots[i].lock() = Some(result);
                if failed {
                    // stop handing out work; remaining slots stay empty
                    next.store(turns.len(), Ordering::Relaxed);
                }
            });
        }
    });
    let mut clips = Vec::with_capacity(turns.len());
    let mut first_error = None;
    for slot in slots {
        match slot.into_inner() {
            Some(Ok(clip)) => clips.push(clip),
            Some(Err(e)) => {
                first_error.get_or_insert(e);
            }
            None => {}
        }
    }
    match first_error {
        Some(e) => Err(e),
        None => Ok(clips),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MockWaveform {
    Silence,
    /// Voiced buzz whose pitch depends on the voice id, pulsed at a syllable rate.
    Tone,
}

/// Deterministic local TTS: each whitespace-separated word lasts
/// `1 / MOCK_WORDS_PER_SECOND` seconds, mono at 44.1 kHz.
#[derive(Debug)]
pub struct MockTts {
    waveform: MockWaveform,
    requests: Mutex<Vec<TtsRequest>>,
}

impl MockTts {
    pub fn new(waveform: MockWaveform) -> Self {
        Self { waveform, requests: Mutex::new(Vec::new()) }
    }

    pub fn silence() -> Self {
        Self::new(MockWaveform::Silence)
    }

    pub fn tone() -> Self {
        Self::new(MockWaveform::Tone)
    }

    pub fn requests(&self) -> Vec<TtsRequest> {
        self.requests.lock().clone()
    }

    pub fn frames_for_text(text: &str) -> usize {
        let words = text.split_whitespace().count() as f64;
        (words / MOCK_WORDS_PER_SECOND * MASTER_RATE as f64).round() as usize
    }
}

impl TtsProvider for MockTts {
    fn synthesize(&self, request: &TtsRequest) -> Result<AudioClip, TtsError> {
        self.requests.lock().push(request.clone());
        let frames = Self::frames_for_text(&request.text);
        if frames == 0 {
            return Err(TtsError::SynthesisRejected("nothing to speak".into()));
        }
        let samples = match self.waveform {
            MockWaveform::Silence => vec![0.0; frames],
            MockWaveform::Tone => buzz(frames, &request.voice_id),
        };
        AudioClip::new(samples, MASTER_RATE, 1).map_err(|e| TtsError::SynthesisRejected(e.to_string()))
    }
}

fn buzz(frames: usize, voice: &str) -> Vec<f32> {
    use std::f64::consts::TAU;
    let hash = voice.bytes().fold(0x811c_9dc5u32, |h, b| (h ^ b as u32).wrapping_mul(0x0100_0193));
    let pitch = 100.0 + (hash % 120) as f64;
    let period = (MASTER_RATE as f64 / pitch).round() as usize;
    let cycle: Vec<f64> = (0..period)
        .map(|i| {
            let ph = TAU * i as f64 / period as f64;
            ph.sin() + 0.5 * (2.0 * ph).sin() + 0.25 * (3.0 * ph).sin()
        })
        .collect();
    let syllable = MASTER_RATE as usize / 4;
    let envelope: Vec<f64> = (0..syllable)
        .map(|i| 0.5 - 0.5 * (TAU * i as f64 / syllable as f64).cos())
        .collect();
    let edge = (MASTER_RATE as usize / 100).min(frames / 2).max(1);
    (0..frames)
        .map(|i| {
            let fade = (i.min(frames - 1 - i) as f64 / edge as f64).min(1.0);
            (0.3 * cycle[i % period] * envelope[i % syllable] * fade) as f32
        })
        .collect()
}

/// OpenAI-compatible speech endpoint returning WAV.
#[derive(Debug, Clone)]
pub struct HttpTts {
    endpoint: String,
    model: String,
    api_key: Option<String>,
    agent: ureq::Agent,
}

impl HttpTts {
    pub fn new(cfg: &ProviderConfig) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(cfg.timeout_secs)))
            .http_status_as_error(false)
            .build()
            .into();
        Self {
            endpoint: cfg.tts_endpoint.clone(),
            model: cfg.tts_model.clone(),
            api_key: cfg.api_key(),
            agent,
        }
    }

    fn body(&self, request: &TtsRequest) -> serde_json::Value {
        json!({
            "model": self.model,
            "input": request.text,
            "voice": request.voice_id,
            "language": request.language.code(),
            "response_format": "wav",
        })
    }
}

impl TtsProvider for HttpTts {
    fn synthesize(&self, request: &TtsRequest) -> Result<AudioClip, TtsError> {
        if !net::network_allowed() {
            return Err(TtsError::ProviderUnreachable("network access is disabled".into()));
        }
        let mut req = self.agent.post(&self.endpoint);
        if let Some(key) = &self.api_key {
            req = req.header("Authorization", &format!("Bearer {key}"));
        }
        let mut resp = req
            .header("Content-Type", "application/json")
            .send(self.body(request).to_string())
            .map_err(|e| TtsError::ProviderUnreachable(e.to_string()))?;
        let status = resp.status().as_u16();
        let bytes = resp
            .body_mut()
            .with_config()
            .limit(512 * 1024 * 1024)
            .read_to_vec()
            .map_err(|e| TtsError::ProviderUnreachable(format!("unreadable response: {e}")))?;
        match status {
            200..=299 => decode_wav(&bytes).map_err(|e| TtsError::SynthesisRejected(e.to_string())),
            408 | 429 | 500..=599 => Err(TtsError::ProviderUnreachable(format!(
                "HTTP {status}: {}",
                String::from_utf8_lossy(&bytes)
            ))),
            _ => Err(TtsError::SynthesisRejected(format!(
                "HTTP {status}: {}",
                String::from_utf8_lossy(&bytes)
            ))),
        }
    }
}
