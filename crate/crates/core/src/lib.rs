pub mod audio;
pub mod config;
pub mod ingest;
pub mod language;
pub mod limiter;
pub mod net;
pub mod options;
pub mod orchestrator;
pub mod pipeline;
pub mod planner;
pub mod store;

pub use config::{ProviderConfig, VoiceMap};
pub use language::Language;
pub use limiter::RequestLimiter;
