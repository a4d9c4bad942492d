//! The full recording pipeline: ingest, plan, script, speak, mix, encode.

use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use tracing::{info, info_span};

use crate::audio::{
    self, encode_master, master_episode, synth_pad, synthesize_script, AudioError, BgmLibrary,
    MasterFormat, MixSpec, MockTts, Mp3Encoder, TtsError, TtsProvider,
};
use crate::config::ProviderConfig;
use crate::ingest::{chunk_bundle, extract_text, IngestError, DEFAULT_CHUNK_CHARS};
use crate::limiter::RequestLimiter;
use crate::options::RecordingOptions;
use crate::orchestrator::{HttpLlm, LlmProvider, Orchestrator, OrchestratorError, Script, SyntheticLlm};
use crate::planner::{PlannerError, TurnBudget, DEFAULT_SECONDS_PER_TURN};
use crate::store::{Episode, EpisodeStatus, Store, StoreError, Transition};

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("{filename}: {source}")]
    Ingest { filename: String, source: IngestError },
    #[error(transparent)]
    EmptyInput(IngestError),
    #[error(transparent)]
    Planner(#[from] PlannerError),
    #[error(transparent)]
    Orchestrator(#[from] OrchestratorError),
    #[error(transparent)]
    Tts(#[from] TtsError),
    #[error(transparent)]
    Audio(#[from] AudioError),
    #[error(transparent)]
    Store(#[from] StoreError),
}

/// Where background music comes from.
#[derive(Debug, Clone, Default)]
pub enum BgmSource {
    None,
    /// Synthesized pad.
    #[default]
    BuiltIn,
    Library(BgmLibrary),
}

#[derive(Debug, Clone)]
pub struct PipelineSettings {
    pub provider: ProviderConfig,
    /// `bgm_clip` is ignored; music is chosen per episode from `bgm`.
    pub mix: MixSpec,
    pub bgm: BgmSource,
    pub seconds_per_turn: f64,
    pub chunk_chars: usize,
    pub format: MasterFormat,
}

impl Default for PipelineSettings {
    fn default() -> Self {
        Self {
            provider: ProviderConfig::default(),
            mix: MixSpec::default(),
            bgm: BgmSource::default(),
            seconds_per_turn: DEFAULT_SECONDS_PER_TURN,
            chunk_chars: DEFAULT_CHUNK_CHARS,
            format: MasterFormat::WavPcm16,
        }
    }
}

#[derive(Clone)]
pub struct Providers {
    pub llm: Arc<dyn LlmProvider>,
    pub tts: Arc<dyn TtsProvider>,
    pub mp3: Option<Arc<dyn Mp3Encoder>>,
    /// Caps concurrent LLM and TTS requests, shared across jobs.
    pub limiter: RequestLimiter,
}

impl Providers {
    /// HTTP clients for the configured endpoints.
    pub fn http(cfg: &ProviderConfig, limiter: RequestLimiter) -> Self {
        Self {
            llm: Arc::new(HttpLlm::new(cfg)),
            tts: Arc::new(audio::HttpTts::new(cfg)),
            mp3: None,
            limiter,
        }
    }

    /// Deterministic local stand-ins that never touch the network.
    pub fn offline(limiter: RequestLimiter) -> Self {
        Self {
            llm: Arc::new(SyntheticLlm::new()),
            tts: Arc::new(MockTts::tone()),
            mp3: None,
            limiter,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    pub stage: String,
    pub elapsed_ms: f64,
}

#[derive(Debug, Clone)]
pub struct Produced {
    pub script: Script,
    pub audio: Vec<u8>,
    pub format: MasterFormat,
    pub duration_sec: f64,
    pub loudness_lufs: f64,
    pub peak_dbfs: f64,
    pub timings: Vec<StageTiming>,
}

/// A source PDF given to the pipeline.
#[derive(Debug, Clone, Copy)]
pub struct SourcePdf<'a> {
    pub filename: &'a str,
    pub bytes: &'a [u8],
}

struct Stopwatch {
    timings: Vec<StageTiming>,
    started: Instant,
}

impl Stopwatch {
    fn new() -> Self {
        Self { timings: Vec::new(), started: Instant::now() }
    }

    fn lap(&mut self, stage: &str) {
        let elapsed_ms = self.started.elapsed().as_secs_f64() * 1000.0;
        info!(stage, elapsed_ms, "stage finished");
        self.timings.push(StageTiming { stage: stage.to_string(), elapsed_ms });
        self.started = Instant::now();
    }
}

/// Runs every stage for one episode and returns the encoded master.
pub fn produce(
    papers: &[SourcePdf<'_>],
    options: &RecordingOptions,
    bgm_rotation: usize,
    settings: &PipelineSettings,
    providers: &Providers,
) -> Result<Produced, PipelineError> {
    let mut clock = Stopwatch::new();

    let docs = papers
        .iter()
        .map(|p| {
            extract_text(p.bytes).map_err(|source| PipelineError::Ingest { filename: p.filename.to_string(), source })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let bundle = chunk_bundle(docs, settings.chunk_chars).map_err(PipelineError::EmptyInput)?;
    clock.lap("ingest");

    let budget = TurnBudget::for_duration(options.minutes, settings.seconds_per_turn)?;
    clock.lap("plan");

    let provider_cfg = ProviderConfig { model_id: options.model_id.clone(), ..settings.provider.clone() };
    let script = Orchestrator::new(providers.llm.as_ref(), &provider_cfg)
        .with_limiter(providers.limiter.clone())
        .script_episode(&bundle, &budget, options.language)?;
    clock.lap("orchestrate");

    let clips = synthesize_script(
        providers.tts.as_ref(),
        &script.turns,
        &provider_cfg.voice_map,
        options.language,
        &providers.limiter,
    )?;
    clock.lap("tts");

    let bgm_clip = match &settings.bgm {
        BgmSource::None => None,
        BgmSource::BuiltIn => Some(synth_pad()),
        BgmSource::Library(lib) => Some(lib.load(bgm_rotation)?),
    };
    let spec = MixSpec { bgm_clip, ..settings.mix.clone() };
    let (master, report) = master_episode(&clips, &spec)?;
    drop(clips);
    clock.lap("mix");

    let audio = encode_master(&master, settings.format, providers.mp3.as_deref())?;
    clock.lap("encode");

    Ok(Produced {
        script,
        audio,
        format: settings.format,
        duration_sec: master.duration_secs(),
        loudness_lufs: report.loudness_lufs,
        peak_dbfs: 20.0 * (report.peak as f64).log10(),
        timings: clock.timings,
    })
}

/// Runs the pipeline for an episode already in `recording` and records the
/// outcome in the store. The pipeline result is returned alongside the final
/// episode; a pipeline failure is not an error of this function.
pub fn record_claimed(
    store: &Store,
    episode_id: &str,
    settings: &PipelineSettings,
    providers: &Providers,
) -> Result<(Episode, Result<Produced, PipelineError>), StoreError> {
    let span = info_span!("episode", episode_id);
    let _enter = span.enter();
    let ep = store.get(episode_id)?;
    if ep.status != EpisodeStatus::Recording {
        return Err(StoreError::IllegalTransition {
            id: ep.id,
            from: ep.status,
            to: EpisodeStatus::Recording,
        });
    }
    let started = Instant::now();
    let result = load_and_produce(store, &ep, settings, providers);
    let outcome = match &result {
        Ok(p) => {
            let audio_ref = store.put_blob(&p.audio)?;
            Transition::Complete { audio_ref, duration_sec: p.duration_sec }
        }
        Err(e) => Transition::Failed { reason: e.to_string() },
    };
    let ep = store.transition(episode_id, outcome)?;
    info!(
        status = %ep.status,
        duration_sec = ep.duration_sec,
        failure_reason = %ep.failure_reason,
        total_ms = started.elapsed().as_secs_f64() * 1000.0,
        "episode finished"
    );
    Ok((ep, result))
}

fn load_and_produce(
    store: &Store,
    ep: &Episode,
    settings: &PipelineSettings,
    providers: &Providers,
) -> Result<Produced, PipelineError> {
    let options = store.job_options(&ep.id)?;
    let blobs = ep
        .source_papers
        .iter()
        .map(|p| store.get_blob(&p.sha256))
        .collect::<Result<Vec<_>, _>>()?;
    let papers: Vec<SourcePdf<'_>> = ep
        .source_papers
        .iter()
        .zip(&blobs)
        .map(|(p, b)| SourcePdf { filename: &p.filename, bytes: b })
        .collect();
    let rotation = store.creation_ordinal(&ep.id)?;
    produce(&papers, &options, rotation, settings, providers)
}
