mod common;

use axum::body::Body;
use axum::http::{header, Request, StatusCode};
use common::*;
use paperwave_core::audio::{encode_master, AudioClip, MasterFormat};
use paperwave_core::store::{EpisodeStatus, Transition};
use paperwave_service::schemas;
use serde_json::Value;

fn field_names(body: &Value) -> Vec<&str> {
    body["fields"].as_array().unwrap().iter().map(|f| f["field"].as_str().unwrap()).collect()
}

/// 18.0 s of a quiet 440 Hz tone, so every byte of the data chunk varies.
fn eighteen_second_wav() -> Vec<u8> {
    let frames = 18 * 44_100;
    let samples: Vec<f32> = (0..frames)
        .flat_map(|i| {
            let v = 0.3 * (i as f32 * 440.0 * std::f32::consts::TAU / 44_100.0).sin();
            [v, v]
        })
        .collect();
    encode_master(&AudioClip::new(samples, 44_100, 2).unwrap(), MasterFormat::WavPcm16, None).unwrap()
}

/// Creates an episode through the API, then completes the oldest pending
/// episode directly in the store and returns its id.
async fn completed_episode(app: &TestApp, audio: &[u8]) -> String {
    let (status, _) = json_of(app.send(recording_request(&valid_parts("3", SAMPLE))).await).await;
    assert_eq!(status, StatusCode::ACCEPTED);
    let id = app.store.claim_next_pending().unwrap().unwrap().id;
    let audio_ref = app.store.put_blob(audio).unwrap();
    app.store.transition(&id, Transition::Complete { audio_ref, duration_sec: 18.0 }).unwrap();
    id
}

#[tokio::test]
async fn valid_upload_is_accepted_as_pending() {
    let app = TestApp::new();
    let resp = app.send(recording_request(&valid_parts("15", SAMPLE))).await;
    let (status, ep) = json_of(resp).await;
    assert_eq!(status, StatusCode::ACCEPTED);
    assert_schema(schemas::EPISODE, &ep);
    assert_eq!(ep["status"], "pending");
    assert_eq!(ep["title"], "Tidal Scheduling");
    assert_eq!(ep["channel_id"], "default");
    assert_eq!(ep["source_papers"][0]["filename"], "paper.pdf");
    assert_eq!(
        ep["source_papers"][0]["sha256"].as_str().unwrap(),
        paperwave_core::store::sha256_hex(SAMPLE)
    );

    let (status, fetched) = app.get(&format!("/episodes/{}", ep["id"].as_str().unwrap())).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(fetched, ep);
}

#[tokio::test]
async fn field_aliases_and_optional_metadata() {
    let app = TestApp::new();
    let parts = [
        Part::Text("title", "Two papers"),
        Part::Text("duration", "5"),
        Part::Text("language", "ja"),
        Part::Text("model", "gpt-4o"),
        Part::Text("keywords", "audio, tides"),
        Part::Text("channel", "science"),
        Part::File("pdfs", "a.pdf", SAMPLE),
        Part::File("pdfs", "b.pdf", HELLO),
    ];
    let (status, ep) = json_of(app.send(recording_request(&parts)).await).await;
    assert_eq!(status, StatusCode::ACCEPTED, "{ep}");
    assert_schema(schemas::EPISODE, &ep);
    assert_eq!(ep["language"], "ja");
    assert_eq!(ep["model_id"], "gpt-4o");
    assert_eq!(ep["channel_id"], "science");
    assert_eq!(ep["keywords"], serde_json::json!(["audio", "tides"]));
    assert_eq!(ep["source_papers"].as_array().unwrap().len(), 2);
}

#[tokio::test]
async fn missing_pdf_is_a_field_error() {
    let app = TestApp::new();
    let parts = [
        Part::Text("title", "No paper"),
        Part::Text("minutes", "10"),
        Part::Text("language", "en"),
        Part::Text("model_id", "mock"),
    ];
    let (status, body) = json_of(app.send(recording_request(&parts)).await).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_schema(schemas::ERROR, &body);
    assert_eq!(body["error"], "ValidationFailed");
    assert_eq!(field_names(&body), ["source_papers"]);
    assert_eq!(app.store.write_count(), 0);
}

#[tokio::test]
async fn zero_minutes_and_unknown_fields_are_rejected() {
    let app = TestApp::new();
    let mut parts = valid_parts("0", SAMPLE);
    parts.push(Part::Text("voice", "alloy"));
    let (status, body) = json_of(app.send(recording_request(&parts)).await).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_schema(schemas::ERROR, &body);
    assert_eq!(field_names(&body), ["duration", "voice"]);
    assert_eq!(app.store.list_episodes(None, Default::default()).unwrap().total, 0);
}

#[tokio::test]
async fn every_bad_field_is_reported_at_once() {
    let app = TestApp::new();
    let parts = [
        Part::Text("minutes", "500"),
        Part::Text("language", "xx"),
        Part::Text("cover_image_url", "ftp://nope"),
        Part::File("pdf", "p.pdf", SAMPLE),
    ];
    let (status, body) = json_of(app.send(recording_request(&parts)).await).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let fields = field_names(&body);
    for f in ["title", "duration", "language", "model_id", "cover_image_url"] {
        assert!(fields.contains(&f), "{f} missing from {fields:?}");
    }
}

#[tokio::test]
async fn oversized_upload_gets_413() {
    let app = TestApp::with_limit(4 * 1024);
    let big = vec![b'x'; 16 * 1024];
    let (status, body) = json_of(app.send(recording_request(&valid_parts("5", &big))).await).await;
    assert_eq!(status, StatusCode::PAYLOAD_TOO_LARGE);
    assert_schema(schemas::ERROR, &body);
    assert_eq!(body["error"], "PayloadTooLarge");
    assert_eq!(app.store.write_count(), 0);
}

#[tokio::test]
async fn unknown_ids_are_404() {
    let app = TestApp::new();
    for uri in ["/episodes/nope", "/episodes/nope/audio", "/channels/nope/episodes"] {
        let (status, body) = app.get(uri).await;
        assert_eq!(status, StatusCode::NOT_FOUND, "{uri}");
        assert_schema(schemas::ERROR, &body);
    }
}

#[tokio::test]
async fn bad_query_is_400() {
    let app = TestApp::new();
    let (status, body) = app.get("/episodes?page=abc").await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_schema(schemas::ERROR, &body);
}

#[tokio::test]
async fn audio_of_unfinished_episode_is_409() {
    let app = TestApp::new();
    let (_, ep) = json_of(app.send(recording_request(&valid_parts("5", SAMPLE))).await).await;
    let (status, body) = app.get(&format!("/episodes/{}/audio", ep["id"].as_str().unwrap())).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_schema(schemas::ERROR, &body);
    assert_eq!(body["error"], "AudioNotReady");
}

#[tokio::test]
async fn full_audio_download() {
    let app = TestApp::new();
    let wav = eighteen_second_wav();
    let id = completed_episode(&app, &wav).await;
    let resp = app.send(Request::get(format!("/episodes/{id}/audio")).body(Body::empty()).unwrap()).await;
    assert_eq!(resp.status(), StatusCode::OK);
    assert_eq!(resp.headers()[header::CONTENT_TYPE], "audio/wav");
    assert_eq!(resp.headers()[header::ACCEPT_RANGES], "bytes");
    assert_eq!(body_bytes(resp).await, wav);
}

#[tokio::test]
async fn range_request_returns_exact_second_half() {
    let app = TestApp::new();
    let wav = eighteen_second_wav();
    assert_eq!(wav.len(), 44 + 18 * 44_100 * 4);
    let id = completed_episode(&app, &wav).await;

    // second half of the PCM data: 9.0 s in
    let start = 44 + 9 * 44_100 * 4;
    let resp = app
        .send(
            Request::get(format!("/episodes/{id}/audio"))
                .header(header::RANGE, format!("bytes={start}-"))
                .body(Body::empty())
                .unwrap(),
        )
        .await;
    assert_eq!(resp.status(), StatusCode::PARTIAL_CONTENT);
    assert_eq!(
        resp.headers()[header::CONTENT_RANGE],
        format!("bytes {start}-{}/{}", wav.len() - 1, wav.len()).as_str()
    );
    assert_eq!(body_bytes(resp).await, &wav[start..]);

    let resp = app
        .send(
            Request::get(format!("/episodes/{id}/audio"))
                .header(header::RANGE, "bytes=-44")
                .body(Body::empty())
                .unwrap(),
        )
        .await;
    assert_eq!(resp.status(), StatusCode::PARTIAL_CONTENT);
    assert_eq!(body_bytes(resp).await, &wav[wav.len() - 44..]);

    let resp = app
        .send(
            Request::get(format!("/episodes/{id}/audio"))
                .header(header::RANGE, format!("bytes={}-", wav.len()))
                .body(Body::empty())
                .unwrap(),
        )
        .await;
    assert_eq!(resp.status(), StatusCode::RANGE_NOT_SATISFIABLE);
    assert_eq!(resp.headers()[header::CONTENT_RANGE], format!("bytes */{}", wav.len()).as_str());
}

#[tokio::test]
async fn listings_match_their_schemas() {
    let app = TestApp::new();
    let (status, empty) = app.get("/episodes").await;
    assert_eq!(status, StatusCode::OK);
    assert_schema(schemas::EPISODE_PAGE, &empty);
    assert_eq!(empty["total"], 0);

    let mut ids = Vec::new();
    for channel in ["default", "science", "science"] {
        let mut parts = valid_parts("5", SAMPLE);
        parts.push(Part::Text("channel_id", channel));
        let (_, ep) = json_of(app.send(recording_request(&parts)).await).await;
        ids.push(ep["id"].as_str().unwrap().to_string());
    }
    assert_eq!(completed_episode(&app, &eighteen_second_wav()).await, ids[0]);
    let failed = &ids[1];
    assert_eq!(&app.store.claim_next_pending().unwrap().unwrap().id, failed);
    app.store.transition(failed, Transition::Failed { reason: "ProviderUnreachable: down".into() }).unwrap();
    assert_eq!(app.store.get(failed).unwrap().status, EpisodeStatus::Failed);

    let (_, page) = app.get("/episodes?per_page=2").await;
    assert_schema(schemas::EPISODE_PAGE, &page);
    assert_eq!(page["total"], 4);
    assert_eq!(page["items"].as_array().unwrap().len(), 2);
    let (_, page2) = app.get("/episodes?per_page=2&page=2").await;
    assert_schema(schemas::EPISODE_PAGE, &page2);
    // newest first across pages
    let order: Vec<&str> = page["items"]
        .as_array()
        .unwrap()
        .iter()
        .chain(page2["items"].as_array().unwrap())
        .map(|e| e["created_at"].as_str().unwrap())
        .collect();
    assert!(order.windows(2).all(|w| w[0] > w[1]), "{order:?}");

    let (_, science) = app.get("/episodes?channel=science").await;
    assert_schema(schemas::EPISODE_PAGE, &science);
    assert_eq!(science["total"], 2);
    let (_, science2) = app.get("/channels/science/episodes").await;
    assert_eq!(science, science2);

    let (status, channels) = app.get("/channels").await;
    assert_eq!(status, StatusCode::OK);
    assert_schema(schemas::CHANNEL_LIST, &channels);
    let counts: Vec<(&str, u64)> = channels["items"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| (c["id"].as_str().unwrap(), c["episode_count"].as_u64().unwrap()))
        .collect();
    assert_eq!(counts, [("default", 2), ("science", 2)]);
}

#[tokio::test]
async fn health() {
    let app = TestApp::new();
    let (status, body) = app.get("/health").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["status"], "ok");
}
