//! Speech synthesis, mixing, loudness normalization and encoding.

pub mod bgm;
pub mod clip;
pub mod encode;
pub mod loudness;
pub mod mix;
pub mod tts;

pub use bgm::{synth_pad, BgmLibrary};
pub use clip::{AudioClip, SUPPORTED_RATES};
pub use encode::{decode_wav, encode_master, CommandMp3Encoder, MasterFormat, Mp3Encoder};
pub use loudness::{integrated_loudness, loudness_of, sample_peak};
pub use mix::{assemble_episode, frames_for, master_episode, MixReport, MixSpec};
pub use tts::{synthesize_script, synthesize_turn, HttpTts, MockTts, MockWaveform, TtsError, TtsProvider, TtsRequest};

pub const MASTER_RATE: u32 = 44_100;
pub const MASTER_CHANNELS: u16 = 2;
/// Output ceiling after normalization, in dBFS.
pub const PEAK_CEILING_DBFS: f64 = -1.0;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AudioError {
    #[error("invalid clip: {0}")]
    InvalidClip(String),
    #[error("invalid mix spec: {0}")]
    InvalidMixSpec(String),
    #[error("RateMismatch: clip {index} is {rate} Hz/{channels} ch, master is {MASTER_RATE} Hz/{MASTER_CHANNELS} ch")]
    RateMismatch { index: usize, rate: u32, channels: u16 },
    #[error("EmptyClipList: nothing to assemble")]
    EmptyClipList,
    #[error("EncoderUnavailable: {0}")]
    EncoderUnavailable(String),
    #[error("encoding failed: {0}")]
    Encode(String),
    #[error("cannot decode audio: {0}")]
    Decode(String),
    #[error("background music: {0}")]
    Bgm(String),
}

pub fn db_to_gain(db: f64) -> f64 {
    10f64.powf(db / 20.0)
}
