use std::net::TcpListener;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::Duration;

use paperwave_cli::LIST_HEADER;
use paperwave_core::store::{EpisodeStatus, Store};
use paperwave_service::schemas;
use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_paperwave");

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures").join(name)
}

fn paperwave(dir: &Path, args: &[&str]) -> Output {
    Command::new(BIN)
        .current_dir(dir)
        .env("PAPERWAVE_LOG", "warn")
        .env_remove("PAPERWAVE_STORE")
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn record_args<'a>(pdf: &'a str, minutes: &'a str, language: &'a str) -> Vec<&'a str> {
    vec!["record", "--pdf", pdf, "--title", "T", "--minutes", minutes, "--language", language, "--model", "mock"]
}

fn assert_schema(schema_text: &str, instance: &Value) {
    let schema: Value = serde_json::from_str(schema_text).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    let errors: Vec<String> = validator.iter_errors(instance).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{errors:#?}");
}

#[test]
fn empty_store_lists_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let out = paperwave(dir.path(), &["episodes", "list"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert_eq!(stdout(&out), format!("{LIST_HEADER}\n"));

    let out = paperwave(dir.path(), &["episodes", "list", "--json"]);
    let page: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_schema(schemas::EPISODE_PAGE, &page);
    assert_eq!(page["total"], 0);
}

#[test]
fn invalid_flags_exit_2_and_name_the_flag() {
    let dir = tempfile::tempdir().unwrap();
    let pdf = fixture("sample_paper.pdf");
    let pdf = pdf.to_str().unwrap();
    let cases: &[(Vec<&str>, &str)] = &[
        (record_args(pdf, "0", "en"), "--minutes"),
        (record_args(pdf, "121", "en"), "--minutes"),
        (record_args(pdf, "ten", "en"), "--minutes"),
        (record_args(pdf, "5", "de"), "--language"),
        (vec!["record", "--title", "T", "--minutes", "5", "--language", "en", "--model", "m"], "--pdf"),
        (record_args("/nonexistent/paper.pdf", "5", "en"), "--pdf"),
        ([record_args(pdf, "5", "en"), vec!["--cover-image-url", "ftp://x"]].concat(), "--cover-image-url"),
        ([record_args(pdf, "5", "en"), vec!["--channel", "Bad Channel"]].concat(), "--channel"),
        (vec!["record", "--bogus"], "--bogus"),
    ];
    for (args, flag) in cases {
        let out = paperwave(dir.path(), args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", stderr(&out));
        assert!(stderr(&out).contains(flag), "{args:?}: {}", stderr(&out));
    }
    // nothing was created by any of the rejected commands
    let store = Store::open(dir.path().join("paperwave-data")).unwrap();
    assert_eq!(store.list_episodes(None, Default::default()).unwrap().total, 0);
}

#[test]
fn unknown_id_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let out = paperwave(dir.path(), &["episodes", "export", "missing", "--out", "x.wav"]);
    assert_eq!(out.status.code(), Some(4));
    assert!(stderr(&out).contains("missing"));
    let out = paperwave(dir.path(), &["episodes", "list", "--channel", "nowhere"]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn record_list_and_export() {
    let dir = tempfile::tempdir().unwrap();
    let pdf = fixture("sample_paper.pdf");
    let mut args = record_args(pdf.to_str().unwrap(), "3", "ko");
    args.extend(["--offline", "--channel", "lab", "--keywords", "tides,energy"]);
    let out = paperwave(dir.path(), &args);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let id = stdout(&out).trim().to_string();

    let ep_dir = dir.path().join("paperwave-episodes").join(&id);
    let episode: Value = serde_json::from_slice(&std::fs::read(ep_dir.join("episode.json")).unwrap()).unwrap();
    assert_schema(schemas::EPISODE, &episode);
    assert_eq!(episode["status"], "complete");
    assert_eq!(episode["language"], "ko");
    let script: Value = serde_json::from_slice(&std::fs::read(ep_dir.join("script.json")).unwrap()).unwrap();
    assert_eq!(script["language"], "ko");
    assert_eq!(script["turns"].as_array().unwrap().len(), 10);

    let out = paperwave(dir.path(), &["episodes", "list"]);
    let text = stdout(&out);
    assert!(text.starts_with(LIST_HEADER));
    assert!(text.lines().nth(1).unwrap().starts_with(&id));

    let out = paperwave(dir.path(), &["episodes", "list", "--json", "--channel", "lab"]);
    let page: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_schema(schemas::EPISODE_PAGE, &page);
    assert_eq!(page["items"][0], episode);

    let out = paperwave(dir.path(), &["episodes", "export", &id, "--out", "copy.wav"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let exported = std::fs::read(dir.path().join("copy.wav")).unwrap();
    let store = Store::open(dir.path().join("paperwave-data")).unwrap();
    let ep = store.get(&id).unwrap();
    assert_eq!(exported, store.get_blob(&ep.audio_ref).unwrap());
    assert_eq!(exported, std::fs::read(ep_dir.join("audio.wav")).unwrap());
}

#[test]
fn pipeline_failure_exits_3_with_reason() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.pdf");
    std::fs::write(&bad, b"%PDF-1.4 not really").unwrap();
    let mut args = record_args(bad.to_str().unwrap(), "3", "en");
    args.push("--offline");
    let out = paperwave(dir.path(), &args);
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
    assert!(stderr(&out).contains("bad.pdf: "), "{}", stderr(&out));

    let store = Store::open(dir.path().join("paperwave-data")).unwrap();
    let page = store.list_episodes(None, Default::default()).unwrap();
    assert_eq!(page.items[0].status, EpisodeStatus::Failed);
    assert!(!page.items[0].failure_reason.is_empty());

    let out = paperwave(dir.path(), &["episodes", "export", &page.items[0].id, "--out", "x.wav"]);
    assert_eq!(out.status.code(), Some(1));
}

/// Counts TCP connections until dropped.
struct Tripwire {
    addr: String,
    hits: Arc<AtomicUsize>,
    stop: Arc<AtomicBool>,
}

impl Tripwire {
    fn start() -> Self {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        listener.set_nonblocking(true).unwrap();
        let addr = listener.local_addr().unwrap().to_string();
        let hits = Arc::new(AtomicUsize::new(0));
        let stop = Arc::new(AtomicBool::new(false));
        let (h, s) = (Arc::clone(&hits), Arc::clone(&stop));
        std::thread::spawn(move || {
            while !s.load(Ordering::SeqCst) {
                match listener.accept() {
                    // dropped immediately: the client sees a reset
                    Ok(_) => {
                        h.fetch_add(1, Ordering::SeqCst);
                    }
                    Err(_) => std::thread::sleep(Duration::from_millis(5)),
                }
            }
        });
        Self { addr, hits, stop }
    }

    fn config(&self, dir: &Path) -> PathBuf {
        let path = dir.join("paperwave.toml");
        std::fs::write(
            &path,
            format!(
                "[provider]\nllm_endpoint = \"http://{a}/v1/chat/completions\"\ntts_endpoint = \"http://{a}/v1/audio/speech\"\ntimeout_secs = 5\n",
                a = self.addr
            ),
        )
        .unwrap();
        path
    }
}

impl Drop for Tripwire {
    fn drop(&mut self) {
        self.stop.store(true, Ordering::SeqCst);
    }
}

#[test]
fn offline_record_never_touches_the_network() {
    let dir = tempfile::tempdir().unwrap();
    let wire = Tripwire::start();
    let config = wire.config(dir.path());
    let pdf = fixture("sample_paper.pdf");
    let mut args = record_args(pdf.to_str().unwrap(), "3", "en");
    args.extend(["--config", config.to_str().unwrap()]);

    let mut offline = args.clone();
    offline.push("--offline");
    let out = paperwave(dir.path(), &offline);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert_eq!(wire.hits.load(Ordering::SeqCst), 0);

    // the tripwire does notice a run that goes online
    let out = paperwave(dir.path(), &args);
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
    assert!(stderr(&out).contains("ProviderUnreachable"), "{}", stderr(&out));
    assert!(wire.hits.load(Ordering::SeqCst) >= 1);
}
