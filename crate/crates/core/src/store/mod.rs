//! File-backed episode store.
//!
//! Layout under the root directory:
//!
//! ```text
//! episodes/<id>.json   canonical Episode JSON
//! jobs/<id>.json       RecordingOptions for the job runner
//! channels/<id>.json   Channel
//! blobs/<sha256>       content-addressed PDFs and mastered audio
//! ```
//!
//! Every document is written to a temporary file and renamed into place. The
//! store keeps an in-memory index loaded at open; one process should own a
//! root for writing at a time.

mod episode;

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use chrono::{DateTime, Utc};
use parking_lot::{Mutex, RwLock};
use serde::{de::DeserializeOwned, Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use episode::{truncate_micros, Channel, Episode, EpisodeStatus, SourcePaper};

use crate::options::RecordingOptions;

pub const INTERRUPTED_REASON: &str = "interrupted";
pub const DEFAULT_PAGE_SIZE: usize = 50;
pub const MAX_PAGE_SIZE: usize = 200;

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("UnknownEpisode: {0}")]
    UnknownEpisode(String),
    #[error("UnknownChannel: {0}")]
    UnknownChannel(String),
    #[error("IllegalTransition: {id} cannot go from {from} to {to}")]
    IllegalTransition { id: String, from: EpisodeStatus, to: EpisodeStatus },
    #[error("InvalidPayload: {0}")]
    InvalidPayload(String),
    #[error("UnknownBlob: {0}")]
    UnknownBlob(String),
    #[error("corrupt store document {path}: {message}")]
    Corrupt { path: PathBuf, message: String },
    #[error("store I/O: {0}")]
    Io(#[from] std::io::Error),
}

/// Target state of a lifecycle transition together with its payload.
#[derive(Debug, Clone, PartialEq)]
pub enum Transition {
    Recording,
    Complete { audio_ref: String, duration_sec: f64 },
    Failed { reason: String },
}

impl Transition {
    pub fn target(&self) -> EpisodeStatus {
        match self {
            Transition::Recording => EpisodeStatus::Recording,
            Transition::Complete { .. } => EpisodeStatus::Complete,
            Transition::Failed { .. } => EpisodeStatus::Failed,
        }
    }
}

/// A PDF as uploaded, before it is written to the blob store.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NewPaper {
    pub filename: String,
    pub bytes: Vec<u8>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PageRequest {
    /// 1-based.
    pub page: usize,
    pub per_page: usize,
}

impl Default for PageRequest {
    fn default() -> Self {
        Self { page: 1, per_page: DEFAULT_PAGE_SIZE }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Page<T> {
    pub items: Vec<T>,
    pub page: usize,
    pub per_page: usize,
    pub total: usize,
}

#[derive(Debug)]
pub struct Store {
    root: PathBuf,
    episodes: RwLock<HashMap<String, Episode>>,
    channels: RwLock<HashMap<String, Channel>>,
    episode_locks: Mutex<HashMap<String, Arc<Mutex<()>>>>,
    /// Serializes claims and channel membership updates.
    claim_lock: Mutex<()>,
    channel_lock: Mutex<()>,
    last_created: Mutex<Option<DateTime<Utc>>>,
    writes: AtomicU64,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn is_blob_key(key: &str) -> bool {
    key.len() == 64 && key.bytes().all(|b| b.is_ascii_digit() || (b'a'..=b'f').contains(&b))
}

fn read_docs<T: DeserializeOwned>(dir: &Path) -> Result<Vec<T>, StoreError> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir)? {
        let path = entry?.path();
        if path.extension().is_some_and(|e| e == "json") {
            let text = std::fs::read_to_string(&path)?;
            let doc = serde_json::from_str(&text)
                .map_err(|e| StoreError::Corrupt { path: path.clone(), message: e.to_string() })?;
            out.push(doc);
        }
    }
    Ok(out)
}

impl Store {
    pub fn open(root: impl Into<PathBuf>) -> Result<Self, StoreError> {
        let root = root.into();
        for sub in ["episodes", "jobs", "channels", "blobs"] {
            std::fs::create_dir_all(root.join(sub))?;
        }
        let episodes: HashMap<String, Episode> = read_docs::<Episode>(&root.join("episodes"))?
            .into_iter()
            .map(|e| (e.id.clone(), e))
            .collect();
        let channels: HashMap<String, Channel> = read_docs::<Channel>(&root.join("channels"))?
            .into_iter()
            .map(|c| (c.id.clone(), c))
            .collect();
        let last_created = episodes.values().map(|e| e.created_at).max();
        Ok(Self {
            root,
            episodes: RwLock::new(episodes),
            channels: RwLock::new(channels),
            episode_locks: Mutex::new(HashMap::new()),
            claim_lock: Mutex::new(()),
            channel_lock: Mutex::new(()),
            last_created: Mutex::new(last_created),
            writes: AtomicU64::new(0),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Number of documents and blobs written since open.
    pub fn write_count(&self) -> u64 {
        self.writes.load(Ordering::SeqCst)
    }

    fn write_atomic(&self, path: &Path, bytes: &[u8]) -> Result<(), StoreError> {
        let tmp = path.with_extension(format!("tmp-{}", uuid::Uuid::new_v4().simple()));
        std::fs::write(&tmp, bytes)?;
        std::fs::rename(&tmp, path)?;
        self.writes.fetch_add(1, Ordering::SeqCst);
        Ok(())
    }

    fn episode_lock(&self, id: &str) -> Arc<Mutex<()>> {
        self.episode_locks.lock().entry(id.to_string()).or_default().clone()
    }

    fn save_episode(&self, ep: &Episode) -> Result<(), StoreError> {
        let path = self.root.join("episodes").join(format!("{}.json", ep.id));
        self.write_atomic(&path, ep.to_canonical_json().as_bytes())?;
        self.episodes.write().insert(ep.id.clone(), ep.clone());
        Ok(())
    }

    fn next_timestamp(&self) -> DateTime<Utc> {
        let mut last = self.last_created.lock();
        let now = truncate_micros(Utc::now());
        let t = match *last {
            Some(prev) if now <= prev => prev + chrono::Duration::microseconds(1),
            _ => now,
        };
        *last = Some(t);
        t
    }

    /// Stores bytes under their SHA-256 and returns the key. Existing blobs
    /// are not rewritten.
    pub fn put_blob(&self, bytes: &[u8]) -> Result<String, StoreError> {
        let key = sha256_hex(bytes);
        let path = self.blob_path_unchecked(&key);
        if !path.exists() {
            self.write_atomic(&path, bytes)?;
        }
        Ok(key)
    }

    fn blob_path_unchecked(&self, key: &str) -> PathBuf {
        self.root.join("blobs").join(key)
    }

    pub fn blob_path(&self, key: &str) -> Result<PathBuf, StoreError> {
        let path = self.blob_path_unchecked(key);
        if is_blob_key(key) && path.is_file() {
            Ok(path)
        } else {
            Err(StoreError::UnknownBlob(key.to_string()))
        }
    }

    pub fn get_blob(&self, key: &str) -> Result<Vec<u8>, StoreError> {
        Ok(std::fs::read(self.blob_path(key)?)?)
    }

    pub fn blob_count(&self) -> Result<usize, StoreError> {
        Ok(std::fs::read_dir(self.root.join("blobs"))?
            .filter_map(Result::ok)
            .filter(|e| is_blob_key(&e.file_name().to_string_lossy()))
            .count())
    }

    /// Persists a pending episode, its job options and its source PDFs, and
    /// files it under its channel.
    pub fn create_episode(&self, options: &RecordingOptions, papers: &[NewPaper]) -> Result<Episode, StoreError> {
        if papers.is_empty() {
            return Err(StoreError::InvalidPayload("at least one source paper is required".into()));
        }
        let mut source_papers = Vec::with_capacity(papers.len());
        for p in papers {
            source_papers.push(SourcePaper { filename: p.filename.clone(), sha256: self.put_blob(&p.bytes)? });
        }
        let ep = Episode {
            id: uuid::Uuid::new_v4().simple().to_string(),
            title: options.title.clone(),
            status: EpisodeStatus::Pending,
            created_at: self.next_timestamp(),
            duration_sec: 0.0,
            language: options.language,
            model_id: options.model_id.clone(),
            channel_id: options.channel_id.clone(),
            description: options.description.clone(),
            keywords: options.keywords.clone(),
            cover_image_url: options.cover_image_url.clone(),
            source_papers,
            audio_ref: String::new(),
            failure_reason: String::new(),
        };
        let job = serde_json::to_vec(options).expect("options serialize");
        self.write_atomic(&self.root.join("jobs").join(format!("{}.json", ep.id)), &job)?;
        self.save_episode(&ep)?;
        self.add_to_channel(&ep.channel_id, &ep.id)?;
        Ok(ep)
    }

    fn add_to_channel(&self, channel_id: &str, episode_id: &str) -> Result<(), StoreError> {
        let _guard = self.channel_lock.lock();
        let mut channel = self.channels.read().get(channel_id).cloned().unwrap_or_else(|| Channel {
            id: channel_id.to_string(),
            display_name: channel_id.to_string(),
            episode_ids: Vec::new(),
        });
        channel.episode_ids.push(episode_id.to_string());
        let path = self.root.join("channels").join(format!("{channel_id}.json"));
        self.write_atomic(&path, &serde_json::to_vec(&channel).expect("channel serializes"))?;
        self.channels.write().insert(channel.id.clone(), channel);
        Ok(())
    }

    pub fn get(&self, id: &str) -> Result<Episode, StoreError> {
        self.episodes
            .read()
            .get(id)
            .cloned()
            .ok_or_else(|| StoreError::UnknownEpisode(id.to_string()))
    }

    pub fn job_options(&self, id: &str) -> Result<RecordingOptions, StoreError> {
        self.get(id)?;
        let path = self.root.join("jobs").join(format!("{id}.json"));
        let text = std::fs::read_to_string(&path)?;
        serde_json::from_str(&text).map_err(|e| StoreError::Corrupt { path, message: e.to_string() })
    }

    /// Applies a lifecycle transition atomically with respect to other
    /// writers of the same episode.
    pub fn transition(&self, id: &str, transition: Transition) -> Result<Episode, StoreError> {
        let lock = self.episode_lock(id);
        let _guard = lock.lock();
        let mut ep = self.get(id)?;
        let to = transition.target();
        if !ep.status.can_become(to) {
            return Err(StoreError::IllegalTransition { id: id.to_string(), from: ep.status, to });
        }
        match transition {
            Transition::Recording => {}
            Transition::Complete { audio_ref, duration_sec } => {
                if audio_ref.is_empty() || !(duration_sec.is_finite() && duration_sec > 0.0) {
                    return Err(StoreError::InvalidPayload(
                        "complete requires audio_ref and a positive duration".into(),
                    ));
                }
                ep.audio_ref = audio_ref;
                ep.duration_sec = duration_sec;
            }
            Transition::Failed { reason } => {
                if reason.trim().is_empty() {
                    return Err(StoreError::InvalidPayload("failed requires a reason".into()));
                }
                ep.failure_reason = reason;
            }
        }
        ep.status = to;
        debug_assert!(ep.check_invariants().is_ok());
        self.save_episode(&ep)?;
        Ok(ep)
    }

    /// Moves the oldest pending episode to recording and returns it. Writes
    /// nothing when no episode is pending.
    pub fn claim_next_pending(&self) -> Result<Option<Episode>, StoreError> {
        let _guard = self.claim_lock.lock();
        let oldest = self
            .episodes
            .read()
            .values()
            .filter(|e| e.status == EpisodeStatus::Pending)
            .min_by(|a, b| a.created_at.cmp(&b.created_at).then_with(|| a.id.cmp(&b.id)))
            .map(|e| e.id.clone());
        match oldest {
            Some(id) => self.transition(&id, Transition::Recording).map(Some),
            None => Ok(None),
        }
    }

    /// Marks every episode left in recording as failed. Returns their ids.
    pub fn recover_interrupted(&self) -> Result<Vec<String>, StoreError> {
        let stuck: Vec<String> = self
            .episodes
            .read()
            .values()
            .filter(|e| e.status == EpisodeStatus::Recording)
            .map(|e| e.id.clone())
            .collect();
        for id in &stuck {
            self.transition(id, Transition::Failed { reason: INTERRUPTED_REASON.into() })?;
        }
        Ok(stuck)
    }

    fn newest_first(mut eps: Vec<Episode>) -> Vec<Episode> {
        eps.sort_by(|a, b| b.created_at.cmp(&a.created_at).then_with(|| b.id.cmp(&a.id)));
        eps
    }

    fn paginate(eps: Vec<Episode>, page: PageRequest) -> Page<Episode> {
        let per_page = page.per_page.clamp(1, MAX_PAGE_SIZE);
        let page_no = page.page.max(1);
        let total = eps.len();
        let items = eps.into_iter().skip((page_no - 1) * per_page).take(per_page).collect();
        Page { items, page: page_no, per_page, total }
    }

    /// Episodes newest first, optionally restricted to one channel.
    pub fn list_episodes(&self, channel_id: Option<&str>, page: PageRequest) -> Result<Page<Episode>, StoreError> {
        let eps: Vec<Episode> = match channel_id {
            Some(cid) => {
                let ids = self
                    .channels
                    .read()
                    .get(cid)
                    .map(|c| c.episode_ids.clone())
                    .ok_or_else(|| StoreError::UnknownChannel(cid.to_string()))?;
                let all = self.episodes.read();
                ids.iter().filter_map(|id| all.get(id).cloned()).collect()
            }
            None => self.episodes.read().values().cloned().collect(),
        };
        Ok(Self::paginate(Self::newest_first(eps), page))
    }

    /// Channels sorted by id.
    pub fn list_channels(&self) -> Vec<Channel> {
        let mut out: Vec<Channel> = self.channels.read().values().cloned().collect();
        out.sort_by(|a, b| a.id.cmp(&b.id));
        out
    }

    pub fn get_channel(&self, id: &str) -> Result<Channel, StoreError> {
        self.channels
            .read()
            .get(id)
            .cloned()
            .ok_or_else(|| StoreError::UnknownChannel(id.to_string()))
    }

    /// Position of the episode in creation order, starting at 0.
    pub fn creation_ordinal(&self, id: &str) -> Result<usize, StoreError> {
        let ep = self.get(id)?;
        Ok(self
            .episodes
            .read()
            .values()
            .filter(|e| (e.created_at, &e.id) < (ep.created_at, &ep.id))
            .count())
    }
}
