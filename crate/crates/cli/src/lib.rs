//! The `paperwave` command line.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use paperwave_core::options::{field, RawRecordingFields, RecordingOptions, ValidationFailed};
use paperwave_core::pipeline::record_claimed;
use paperwave_core::store::{Episode, EpisodeStatus, NewPaper, PageRequest, Store, StoreError, Transition};
use paperwave_service::ServiceConfig;

pub const EXIT_INVALID: u8 = 2;
pub const EXIT_PIPELINE: u8 = 3;
pub const EXIT_UNKNOWN_ID: u8 = 4;

#[derive(Debug, Parser)]
#[command(name = "paperwave", version, about = "Turn research papers into interview-style podcast episodes")]
pub struct Cli {
    /// Episode store directory.
    #[arg(long, global = true, env = "PAPERWAVE_STORE", default_value = "paperwave-data")]
    pub store: PathBuf,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Record an episode from one or more PDFs, inline.
    Record(RecordArgs),
    /// Inspect stored episodes.
    #[command(subcommand)]
    Episodes(EpisodesCommand),
    /// Run the HTTP service and job runner.
    Serve {
        #[arg(long)]
        config: PathBuf,
    },
}

/// Option values stay strings here so validation happens in exactly one
/// place, shared with the HTTP form.
#[derive(Debug, Clone, Args)]
pub struct RecordArgs {
    #[arg(long = "pdf", value_name = "PATH")]
    pub pdfs: Vec<PathBuf>,
    #[arg(long)]
    pub title: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub minutes: Option<String>,
    #[arg(long)]
    pub language: Option<String>,
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long)]
    pub description: Option<String>,
    /// Comma-separated.
    #[arg(long)]
    pub keywords: Option<String>,
    #[arg(long)]
    pub cover_image_url: Option<String>,
    #[arg(long)]
    pub channel: Option<String>,
    /// Use local mock providers and forbid network access.
    #[arg(long)]
    pub offline: bool,
    /// Provider, mix and audio settings (same file format as `serve`).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Where `<id>/episode.json`, `<id>/audio.*` and `<id>/script.json` go.
    #[arg(long, default_value = "paperwave-episodes")]
    pub out: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum EpisodesCommand {
    List {
        #[arg(long)]
        channel: Option<String>,
        #[arg(long)]
        json: bool,
        #[arg(long, default_value_t = 1)]
        page: usize,
        #[arg(long, default_value_t = paperwave_core::store::DEFAULT_PAGE_SIZE)]
        per_page: usize,
    },
    /// Copy an episode's mastered audio to a file.
    Export {
        id: String,
        #[arg(long)]
        out: PathBuf,
    },
}

/// A failure with the exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub error: anyhow::Error,
}

impl Failure {
    fn new(code: u8, error: impl Into<anyhow::Error>) -> Self {
        Self { code, error: error.into() }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        Self { code: 1, error }
    }
}

impl From<StoreError> for Failure {
    fn from(e: StoreError) -> Self {
        let code = match e {
            StoreError::UnknownEpisode(_) | StoreError::UnknownChannel(_) => EXIT_UNKNOWN_ID,
            _ => 1,
        };
        Self::new(code, e)
    }
}

/// Command-line spelling of a validation field.
pub fn flag_for(field_name: &str) -> String {
    match field_name {
        field::DURATION => "--minutes".into(),
        field::MODEL_ID => "--model".into(),
        field::CHANNEL_ID => "--channel".into(),
        field::SOURCE_PAPERS => "--pdf".into(),
        other => format!("--{}", other.replace('_', "-")),
    }
}

impl RecordArgs {
    pub fn raw_fields(&self) -> RawRecordingFields {
        RawRecordingFields {
            title: self.title.clone(),
            minutes: self.minutes.clone(),
            language: self.language.clone(),
            model_id: self.model.clone(),
            description: self.description.clone(),
            keywords: self.keywords.clone(),
            cover_image_url: self.cover_image_url.clone(),
            channel_id: self.channel.clone(),
            source_paper_count: self.pdfs.len(),
        }
    }

    pub fn validate(&self) -> Result<RecordingOptions, ValidationFailed> {
        RecordingOptions::from_fields(&self.raw_fields())
    }
}

fn invalid_flags(v: &ValidationFailed) -> Failure {
    let lines: Vec<String> = v.errors.iter().map(|e| format!("{}: {}", flag_for(&e.field), e.message)).collect();
    Failure::new(EXIT_INVALID, anyhow::anyhow!("invalid arguments\n  {}", lines.join("\n  ")))
}

fn load_config(path: Option<&Path>) -> anyhow::Result<ServiceConfig> {
    match path {
        Some(p) => ServiceConfig::load(p).with_context(|| format!("loading {}", p.display())),
        None => Ok(ServiceConfig::default()),
    }
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

fn record(store_dir: &Path, args: &RecordArgs, stdout: &mut dyn Write) -> Result<(), Failure> {
    let options = args.validate().map_err(|v| invalid_flags(&v))?;
    let mut papers = Vec::with_capacity(args.pdfs.len());
    for path in &args.pdfs {
        let bytes = fs::read(path)
            .map_err(|e| Failure::new(EXIT_INVALID, anyhow::anyhow!("--pdf {}: {e}", path.display())))?;
        let filename = path.file_name().map_or_else(|| "paper.pdf".into(), |n| n.to_string_lossy().into_owned());
        papers.push(NewPaper { filename, bytes });
    }
    let mut cfg = load_config(args.config.as_deref()).map_err(|e| Failure::new(EXIT_INVALID, e))?;
    cfg.offline |= args.offline;
    let settings = cfg.pipeline_settings().map_err(|e| Failure::new(EXIT_INVALID, e))?;
    let providers = paperwave_service::providers_for(&cfg);

    let store = Store::open(store_dir)?;
    let ep = store.create_episode(&options, &papers)?;
    store.transition(&ep.id, Transition::Recording)?;
    let (ep, produced) = record_claimed(&store, &ep.id, &settings, &providers)?;

    let dir = args.out.join(&ep.id);
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    write_json(&dir.join("episode.json"), &ep)?;
    match produced {
        Ok(p) => {
            write_json(&dir.join("script.json"), &p.script)?;
            let audio = dir.join(format!("audio.{}", p.format.extension()));
            fs::write(&audio, &p.audio).with_context(|| format!("writing {}", audio.display()))?;
            writeln!(stdout, "{}", ep.id).context("writing to stdout")?;
            Ok(())
        }
        Err(_) => Err(Failure::new(
            EXIT_PIPELINE,
            anyhow::anyhow!("episode {} failed: {}", ep.id, ep.failure_reason),
        )),
    }
}

fn format_duration(secs: f64) -> String {
    let total = secs.round() as u64;
    format!("{}:{:02}", total / 60, total % 60)
}

pub const LIST_HEADER: &str = "ID                                STATUS     DURATION  CHANNEL          CREATED                      TITLE";

fn list_row(ep: &Episode) -> String {
    let created = ep.created_at.format("%Y-%m-%dT%H:%M:%S%.6fZ");
    let duration = if ep.status == EpisodeStatus::Complete { format_duration(ep.duration_sec) } else { "-".into() };
    format!(
        "{:<33} {:<10} {:>8}  {:<16} {:<28} {}",
        ep.id, ep.status, duration, ep.channel_id, created, ep.title
    )
}

fn episodes(store_dir: &Path, cmd: &EpisodesCommand, stdout: &mut dyn Write) -> Result<(), Failure> {
    let store = Store::open(store_dir)?;
    match cmd {
        EpisodesCommand::List { channel, json, page, per_page } => {
            let page = store.list_episodes(channel.as_deref(), PageRequest { page: *page, per_page: *per_page })?;
            if *json {
                writeln!(stdout, "{}", serde_json::to_string_pretty(&page).context("serializing")?)
            } else {
                let mut out = String::from(LIST_HEADER);
                for ep in &page.items {
                    out.push('\n');
                    out.push_str(&list_row(ep));
                }
                writeln!(stdout, "{out}")
            }
            .context("writing to stdout")?;
            Ok(())
        }
        EpisodesCommand::Export { id, out } => {
            let ep = store.get(id)?;
            if ep.status != EpisodeStatus::Complete {
                return Err(anyhow::anyhow!("episode {id} is {}; only complete episodes have audio", ep.status).into());
            }
            let bytes = store.get_blob(&ep.audio_ref)?;
            fs::write(out, bytes).with_context(|| format!("writing {}", out.display()))?;
            Ok(())
        }
    }
}

fn serve(config: &Path, store_override: Option<&Path>) -> Result<(), Failure> {
    let mut cfg = ServiceConfig::load(config).map_err(|e| Failure::new(EXIT_INVALID, e))?;
    if let Some(dir) = store_override {
        cfg.store_dir = dir.to_path_buf();
    }
    let runtime = tokio::runtime::Runtime::new().context("starting runtime")?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind(cfg.bind)
            .await
            .with_context(|| format!("binding {}", cfg.bind))?;
        let providers = paperwave_service::providers_for(&cfg);
        let shutdown = async {
            let _ = tokio::signal::ctrl_c().await;
        };
        paperwave_service::serve(listener, cfg, providers, shutdown).await?;
        anyhow::Ok(())
    })?;
    Ok(())
}

/// Runs a parsed command. `store_from_flag` says whether `--store` (or its
/// environment variable) was given explicitly, which lets it override the
/// service config's `store_dir`.
pub fn run(cli: &Cli, store_from_flag: bool, stdout: &mut dyn Write) -> Result<(), Failure> {
    match &cli.command {
        Command::Record(args) => record(&cli.store, args, stdout),
        Command::Episodes(cmd) => episodes(&cli.store, cmd, stdout),
        Command::Serve { config } => serve(config, store_from_flag.then_some(cli.store.as_path())),
    }
}

pub fn exit_code(result: Result<(), Failure>) -> ExitCode {
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flag_names() {
        assert_eq!(flag_for("duration"), "--minutes");
        assert_eq!(flag_for("cover_image_url"), "--cover-image-url");
        assert_eq!(flag_for("source_papers"), "--pdf");
        assert_eq!(flag_for("title"), "--title");
    }

    #[test]
    fn durations_format_as_minutes_and_seconds() {
        assert_eq!(format_duration(1304.0), "21:44");
        assert_eq!(format_duration(59.6), "1:00");
    }
}
