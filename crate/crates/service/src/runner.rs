use std::sync::{Arc, Mutex};

use paperwave_core::pipeline::{record_claimed, PipelineSettings, Providers};
use paperwave_core::store::{Store, Transition};
use tokio::sync::watch;
use tokio::task::JoinHandle;
use tracing::{error, info, info_span, Instrument};

use crate::config::JobRunnerConfig;

/// One successful claim: which worker took which episode.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Claim {
    pub worker: usize,
    pub episode_id: String,
}

/// Polls the store for pending episodes and records them, `worker_count`
/// at a time. Pipeline failures end up in the episode, never in the runner.
pub struct JobRunner {
    store: Arc<Store>,
    settings: PipelineSettings,
    providers: Providers,
    cfg: JobRunnerConfig,
    claims: Mutex<Vec<Claim>>,
}

impl JobRunner {
    pub fn new(store: Arc<Store>, settings: PipelineSettings, providers: Providers, cfg: JobRunnerConfig) -> Arc<Self> {
        Arc::new(Self { store, settings, providers, cfg, claims: Mutex::new(Vec::new()) })
    }

    pub fn claims(&self) -> Vec<Claim> {
        self.claims.lock().expect("claim log poisoned").clone()
    }

    /// Starts the workers. They exit after their current job once `shutdown`
    /// becomes true.
    pub fn spawn(self: &Arc<Self>, shutdown: watch::Receiver<bool>) -> Vec<JoinHandle<()>> {
        (0..self.cfg.worker_count)
            .map(|worker| {
                let runner = Arc::clone(self);
                let shutdown = shutdown.clone();
                tokio::spawn(runner.work(worker, shutdown).instrument(info_span!("worker", worker)))
            })
            .collect()
    }

    async fn work(self: Arc<Self>, worker: usize, mut shutdown: watch::Receiver<bool>) {
        info!("worker started");
        while !*shutdown.borrow() {
            let store = Arc::clone(&self.store);
            match tokio::task::spawn_blocking(move || store.claim_next_pending()).await {
                Ok(Ok(Some(ep))) => {
                    self.claims
                        .lock()
                        .expect("claim log poisoned")
                        .push(Claim { worker, episode_id: ep.id.clone() });
                    self.run_one(ep.id).await;
                    continue;
                }
                Ok(Ok(None)) => {}
                Ok(Err(e)) => error!(error = %e, "claiming failed"),
                Err(e) => error!(error = %e, "claim task failed"),
            }
            tokio::select! {
                _ = tokio::time::sleep(self.cfg.poll_interval()) => {}
                changed = shutdown.changed() => {
                    if changed.is_err() {
                        break;
                    }
                }
            }
        }
        info!("worker stopped");
    }

    async fn run_one(self: &Arc<Self>, id: String) {
        let runner = Arc::clone(self);
        let job_id = id.clone();
        let joined = tokio::task::spawn_blocking(move || {
            record_claimed(&runner.store, &job_id, &runner.settings, &runner.providers)
        })
        .await;
        let reason = match joined {
            Ok(Ok(_)) => return,
            Ok(Err(e)) => format!("internal error: {e}"),
            Err(e) => format!("internal error: pipeline task failed: {e}"),
        };
        error!(episode_id = %id, %reason, "job aborted");
        if let Err(e) = self.store.transition(&id, Transition::Failed { reason }) {
            error!(episode_id = %id, error = %e, "could not mark episode failed");
        }
    }
}
