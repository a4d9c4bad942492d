//! HTTP API over the episode store plus the background job runner.

pub mod api;
pub mod config;
pub mod range;
pub mod runner;
pub mod schemas;

use std::future::Future;
use std::sync::Arc;

use paperwave_core::pipeline::Providers;
use paperwave_core::store::{Store, StoreError};
use paperwave_core::{net, RequestLimiter};
use tokio::net::TcpListener;
use tokio::sync::watch;
use tracing::info;

pub use api::{router, AppState};
pub use config::{ConfigError, JobRunnerConfig, ServiceConfig};
pub use runner::{Claim, JobRunner};

#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("server I/O: {0}")]
    Io(#[from] std::io::Error),
}

/// Providers selected by the config: local mocks when offline (which also
/// switches off outbound network access), HTTP clients otherwise.
pub fn providers_for(cfg: &ServiceConfig) -> Providers {
    let limiter = RequestLimiter::new(cfg.request_limit);
    let mut providers = if cfg.offline {
        net::set_network_allowed(false);
        Providers::offline(limiter)
    } else {
        Providers::http(&cfg.provider, limiter)
    };
    if let Some(enc) = cfg.audio.mp3_encoder() {
        providers.mp3 = Some(Arc::new(enc));
    }
    providers
}

/// Serves the API on `listener` and runs the job runner until `shutdown`
/// resolves. Episodes left in `recording` by a previous process are failed
/// with reason "interrupted" before anything else happens.
pub async fn serve(
    listener: TcpListener,
    cfg: ServiceConfig,
    providers: Providers,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> Result<(), ServiceError> {
    let settings = cfg.pipeline_settings()?;
    let store = {
        let dir = cfg.store_dir.clone();
        tokio::task::spawn_blocking(move || Store::open(dir))
            .await
            .map_err(|e| std::io::Error::other(e.to_string()))??
    };
    let store = Arc::new(store);
    let recovered = store.recover_interrupted()?;
    if !recovered.is_empty() {
        info!(count = recovered.len(), "marked interrupted recordings as failed");
    }

    let (stop_tx, stop_rx) = watch::channel(false);
    let runner = JobRunner::new(Arc::clone(&store), settings, providers, cfg.jobs.clone());
    let workers = runner.spawn(stop_rx);

    let app = router(AppState { store }, cfg.max_upload_bytes);
    info!(addr = %listener.local_addr()?, "listening");
    axum::serve(listener, app)
        .with_graceful_shutdown(async move {
            shutdown.await;
            let _ = stop_tx.send(true);
        })
        .await?;
    for w in workers {
        let _ = w.await;
    }
    info!("stopped");
    Ok(())
}
