#![allow(dead_code)]

use std::sync::Arc;

use axum::body::{to_bytes, Body};
use axum::http::{Request, Response, StatusCode};
use axum::Router;
use paperwave_core::store::Store;
use paperwave_service::{router, AppState};
use serde_json::Value;
use tower::ServiceExt;

pub const SAMPLE: &[u8] = include_bytes!("../../../core/tests/fixtures/sample_paper.pdf");
pub const HELLO: &[u8] = include_bytes!("../../../core/tests/fixtures/hello.pdf");

pub const BOUNDARY: &str = "paperwave-test-boundary";

pub enum Part<'a> {
    Text(&'a str, &'a str),
    File(&'a str, &'a str, &'a [u8]),
}

pub fn multipart(parts: &[Part<'_>]) -> Vec<u8> {
    let mut body = Vec::new();
    for part in parts {
        body.extend_from_slice(format!("--{BOUNDARY}\r\n").as_bytes());
        match part {
            Part::Text(name, value) => {
                body.extend_from_slice(format!("Content-Disposition: form-data; name=\"{name}\"\r\n\r\n").as_bytes());
                body.extend_from_slice(value.as_bytes());
            }
            Part::File(name, filename, bytes) => {
                body.extend_from_slice(
                    format!(
                        "Content-Disposition: form-data; name=\"{name}\"; filename=\"{filename}\"\r\nContent-Type: application/pdf\r\n\r\n"
                    )
                    .as_bytes(),
                );
                body.extend_from_slice(bytes);
            }
        }
        body.extend_from_slice(b"\r\n");
    }
    body.extend_from_slice(format!("--{BOUNDARY}--\r\n").as_bytes());
    body
}

pub fn recording_request(parts: &[Part<'_>]) -> Request<Body> {
    Request::post("/recordings")
        .header("content-type", format!("multipart/form-data; boundary={BOUNDARY}"))
        .body(Body::from(multipart(parts)))
        .unwrap()
}

pub fn valid_parts<'a>(minutes: &'a str, pdf: &'a [u8]) -> Vec<Part<'a>> {
    vec![
        Part::Text("title", "Tidal Scheduling"),
        Part::Text("minutes", minutes),
        Part::Text("language", "en"),
        Part::Text("model_id", "mock"),
        Part::File("pdf", "paper.pdf", pdf),
    ]
}

pub struct TestApp {
    pub dir: tempfile::TempDir,
    pub store: Arc<Store>,
    pub app: Router,
}

impl TestApp {
    pub fn new() -> Self {
        Self::with_limit(50 * 1024 * 1024)
    }

    pub fn with_limit(max_upload_bytes: usize) -> Self {
        let dir = tempfile::tempdir().unwrap();
        let store = Arc::new(Store::open(dir.path()).unwrap());
        let app = router(AppState { store: Arc::clone(&store) }, max_upload_bytes);
        Self { dir, store, app }
    }

    pub async fn send(&self, req: Request<Body>) -> Response<Body> {
        self.app.clone().oneshot(req).await.unwrap()
    }

    pub async fn get(&self, uri: &str) -> (StatusCode, Value) {
        let resp = self.send(Request::get(uri).body(Body::empty()).unwrap()).await;
        json_of(resp).await
    }
}

pub async fn body_bytes(resp: Response<Body>) -> Vec<u8> {
    to_bytes(resp.into_body(), usize::MAX).await.unwrap().to_vec()
}

pub async fn json_of(resp: Response<Body>) -> (StatusCode, Value) {
    let status = resp.status();
    let bytes = body_bytes(resp).await;
    let value = serde_json::from_slice(&bytes)
        .unwrap_or_else(|e| panic!("non-JSON body ({e}): {}", String::from_utf8_lossy(&bytes)));
    (status, value)
}

/// Panics with every schema violation listed.
pub fn assert_schema(schema_text: &str, instance: &Value) {
    let schema: Value = serde_json::from_str(schema_text).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    let errors: Vec<String> = validator.iter_errors(instance).map(|e| format!("{} at {}", e, e.instance_path())).collect();
    assert!(errors.is_empty(), "schema violations: {errors:#?}\ninstance: {instance:#}");
}
