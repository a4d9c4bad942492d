use chrono::{DateTime, SubsecRound, Utc};
use serde::{Deserialize, Serialize};

use crate::language::Language;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EpisodeStatus {
    Pending,
    Recording,
    Complete,
    Failed,
}

impl EpisodeStatus {
    pub const ALL: [EpisodeStatus; 4] = [Self::Pending, Self::Recording, Self::Complete, Self::Failed];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Pending => "pending",
            Self::Recording => "recording",
            Self::Complete => "complete",
            Self::Failed => "failed",
        }
    }

    pub fn can_become(self, next: EpisodeStatus) -> bool {
        use EpisodeStatus::*;
        matches!((self, next), (Pending, Recording) | (Recording, Complete) | (Recording, Failed))
    }

    pub fn is_terminal(self) -> bool {
        matches!(self, Self::Complete | Self::Failed)
    }
}

impl std::fmt::Display for EpisodeStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SourcePaper {
    pub filename: String,
    pub sha256: String,
}

/// Episode metadata. Serialized field order is the declaration order below.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Episode {
    pub id: String,
    pub title: String,
    pub status: EpisodeStatus,
    #[serde(with = "micros")]
    pub created_at: DateTime<Utc>,
    pub duration_sec: f64,
    pub language: Language,
    pub model_id: String,
    pub channel_id: String,
    pub description: String,
    pub keywords: Vec<String>,
    pub cover_image_url: String,
    pub source_papers: Vec<SourcePaper>,
    pub audio_ref: String,
    pub failure_reason: String,
}

impl Episode {
    /// Compact UTF-8 JSON with fixed key order.
    pub fn to_canonical_json(&self) -> String {
        serde_json::to_string(self).expect("episode serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }

    /// Checks the status-dependent invariants.
    pub fn check_invariants(&self) -> Result<(), String> {
        if !(self.duration_sec.is_finite() && self.duration_sec >= 0.0) {
            return Err("duration_sec must be a nonnegative number".into());
        }
        match self.status {
            EpisodeStatus::Complete if self.audio_ref.is_empty() || self.duration_sec <= 0.0 => {
                Err("complete episode needs audio_ref and a positive duration".into())
            }
            EpisodeStatus::Failed if self.failure_reason.is_empty() => Err("failed episode needs a reason".into()),
            EpisodeStatus::Pending | EpisodeStatus::Recording
                if self.duration_sec != 0.0 || !self.audio_ref.is_empty() =>
            {
                Err("unfinished episode carries audio".into())
            }
            s if s != EpisodeStatus::Failed && !self.failure_reason.is_empty() => {
                Err("failure_reason set on a non-failed episode".into())
            }
            _ => Ok(()),
        }
    }
}

/// Timestamps are kept at microsecond precision so they survive a JSON
/// round trip unchanged.
pub fn truncate_micros(t: DateTime<Utc>) -> DateTime<Utc> {
    t.trunc_subsecs(6)
}

mod micros {
    use chrono::{DateTime, NaiveDateTime, Utc};
    use serde::{Deserialize, Deserializer, Serializer};

    const FORMAT: &str = "%Y-%m-%dT%H:%M:%S%.6fZ";

    pub fn serialize<S: Serializer>(t: &DateTime<Utc>, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(&t.format(FORMAT))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DateTime<Utc>, D::Error> {
        let s = String::deserialize(d)?;
        NaiveDateTime::parse_from_str(&s, FORMAT)
            .map(|n| n.and_utc())
            .map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Channel {
    pub id: String,
    pub display_name: String,
    pub episode_ids: Vec<String>,
}
