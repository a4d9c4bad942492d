use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::time::Duration;

use paperwave_core::audio::{BgmLibrary, CommandMp3Encoder, MasterFormat, MixSpec};
use paperwave_core::pipeline::{BgmSource, PipelineSettings};
use paperwave_core::planner::DEFAULT_SECONDS_PER_TURN;
use paperwave_core::ingest::DEFAULT_CHUNK_CHARS;
use paperwave_core::ProviderConfig;
use serde::{Deserialize, Serialize};

pub const DEFAULT_MAX_UPLOAD_BYTES: usize = 50 * 1024 * 1024;
pub const MAX_WORKERS: usize = 8;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("invalid config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct JobRunnerConfig {
    pub worker_count: usize,
    pub poll_interval_secs: f64,
}

impl Default for JobRunnerConfig {
    fn default() -> Self {
        Self { worker_count: 2, poll_interval_secs: 1.0 }
    }
}

impl JobRunnerConfig {
    pub fn poll_interval(&self) -> Duration {
        Duration::from_secs_f64(self.poll_interval_secs)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(1..=MAX_WORKERS).contains(&self.worker_count) {
            return Err(ConfigError::Invalid(format!("jobs.worker_count must be in 1..={MAX_WORKERS}")));
        }
        if !(self.poll_interval_secs.is_finite() && self.poll_interval_secs > 0.0 && self.poll_interval_secs <= 3600.0) {
            return Err(ConfigError::Invalid("jobs.poll_interval_secs must be in (0, 3600]".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AudioConfig {
    /// Directory of WAV files rotated per episode; the built-in pad when unset.
    pub bgm_dir: Option<PathBuf>,
    pub disable_bgm: bool,
    pub format: MasterFormat,
    /// Command line of an external MP3 encoder reading WAV on stdin.
    pub mp3_command: Vec<String>,
    pub seconds_per_turn: f64,
    pub chunk_chars: usize,
}

impl Default for AudioConfig {
    fn default() -> Self {
        Self {
            bgm_dir: None,
            disable_bgm: false,
            format: MasterFormat::WavPcm16,
            mp3_command: Vec::new(),
            seconds_per_turn: DEFAULT_SECONDS_PER_TURN,
            chunk_chars: DEFAULT_CHUNK_CHARS,
        }
    }
}

impl AudioConfig {
    pub fn mp3_encoder(&self) -> Option<CommandMp3Encoder> {
        let (program, args) = self.mp3_command.split_first()?;
        Some(CommandMp3Encoder { program: program.into(), args: args.to_vec() })
    }
}

/// Everything `serve` needs, read from one TOML file. Credentials come from
/// the environment variable named by `provider.api_key_env`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServiceConfig {
    pub bind: SocketAddr,
    pub store_dir: PathBuf,
    pub max_upload_bytes: usize,
    /// Use the local mock providers and forbid outbound network access.
    pub offline: bool,
    /// Cap on concurrent provider requests across all jobs.
    pub request_limit: usize,
    pub jobs: JobRunnerConfig,
    pub provider: ProviderConfig,
    pub mix: MixSpec,
    pub audio: AudioConfig,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            bind: SocketAddr::from(([127, 0, 0, 1], 8080)),
            store_dir: PathBuf::from("paperwave-data"),
            max_upload_bytes: DEFAULT_MAX_UPLOAD_BYTES,
            offline: false,
            request_limit: 4,
            jobs: JobRunnerConfig::default(),
            provider: ProviderConfig::default(),
            mix: MixSpec::default(),
            audio: AudioConfig::default(),
        }
    }
}

impl ServiceConfig {
    /// Parses TOML; relative `store_dir` and `audio.bgm_dir` are resolved
    /// against `base_dir`.
    pub fn from_toml(text: &str, base_dir: &Path) -> Result<Self, ConfigError> {
        let mut cfg: ServiceConfig = toml::from_str(text)?;
        if cfg.store_dir.is_relative() {
            cfg.store_dir = base_dir.join(&cfg.store_dir);
        }
        if let Some(dir) = cfg.audio.bgm_dir.as_mut().filter(|d| d.is_relative()) {
            *dir = base_dir.join(&*dir);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.into(), source })?;
        Self::from_toml(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.jobs.validate()?;
        self.provider.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        self.mix.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        if self.max_upload_bytes == 0 {
            return Err(ConfigError::Invalid("max_upload_bytes must be positive".into()));
        }
        if self.request_limit == 0 {
            return Err(ConfigError::Invalid("request_limit must be positive".into()));
        }
        if !(5.0..=60.0).contains(&self.audio.seconds_per_turn) {
            return Err(ConfigError::Invalid("audio.seconds_per_turn must be in 5..=60".into()));
        }
        Ok(())
    }

    pub fn pipeline_settings(&self) -> Result<PipelineSettings, ConfigError> {
        let bgm = match (&self.audio.bgm_dir, self.audio.disable_bgm) {
            (_, true) => BgmSource::None,
            (Some(dir), false) => {
                BgmSource::Library(BgmLibrary::from_dir(dir).map_err(|e| ConfigError::Invalid(e.to_string()))?)
            }
            (None, false) => BgmSource::BuiltIn,
        };
        Ok(PipelineSettings {
            provider: self.provider.clone(),
            mix: self.mix.clone(),
            bgm,
            seconds_per_turn: self.audio.seconds_per_turn,
            chunk_chars: self.audio.chunk_chars,
            format: self.audio.format,
        })
    }
}
