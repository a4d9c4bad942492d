use std::sync::Arc;

use axum::body::Body;
use axum::extract::rejection::QueryRejection;
use axum::extract::{DefaultBodyLimit, Multipart, Path, Query, State};
use axum::http::{header, HeaderMap, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use paperwave_core::options::{FieldError, RawRecordingFields, RecordingOptions, ValidationFailed};
use paperwave_core::store::{Channel, Episode, EpisodeStatus, NewPaper, Page, PageRequest, Store, StoreError};
use serde::{Deserialize, Serialize};

use crate::range::{parse_range, ByteRange, RangeError};

#[derive(Clone)]
pub struct AppState {
    pub store: Arc<Store>,
}

/// JSON error body: `{"error": name, "message": text, "fields": [...]}`.
#[derive(Debug, Serialize, Deserialize)]
pub struct ApiError {
    #[serde(skip)]
    pub status: StatusCode,
    pub error: String,
    pub message: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub fields: Vec<FieldError>,
}

impl ApiError {
    fn new(status: StatusCode, error: &str, message: impl Into<String>) -> Self {
        Self { status, error: error.into(), message: message.into(), fields: Vec::new() }
    }

    fn internal(message: impl Into<String>) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "Internal", message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(&self)).into_response()
    }
}

impl From<ValidationFailed> for ApiError {
    fn from(v: ValidationFailed) -> Self {
        Self {
            status: StatusCode::BAD_REQUEST,
            error: "ValidationFailed".into(),
            message: v.to_string(),
            fields: v.errors,
        }
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        match &e {
            StoreError::UnknownEpisode(_) => Self::new(StatusCode::NOT_FOUND, "UnknownEpisode", e.to_string()),
            StoreError::UnknownChannel(_) => Self::new(StatusCode::NOT_FOUND, "UnknownChannel", e.to_string()),
            StoreError::IllegalTransition { .. } => Self::new(StatusCode::CONFLICT, "IllegalTransition", e.to_string()),
            _ => Self::internal(e.to_string()),
        }
    }
}

impl From<QueryRejection> for ApiError {
    fn from(e: QueryRejection) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "InvalidQuery", e.body_text())
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
pub struct PageQuery {
    page: Option<usize>,
    per_page: Option<usize>,
}

impl PageQuery {
    fn request(self) -> PageRequest {
        let d = PageRequest::default();
        PageRequest { page: self.page.unwrap_or(d.page), per_page: self.per_page.unwrap_or(d.per_page) }
    }
}

#[derive(Debug, Deserialize)]
pub struct EpisodesQuery {
    channel: Option<String>,
    // not flattened: serde's flatten hands numbers through as strings
    page: Option<usize>,
    per_page: Option<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ChannelView {
    pub id: String,
    pub display_name: String,
    pub episode_count: usize,
    pub episode_ids: Vec<String>,
}

impl From<Channel> for ChannelView {
    fn from(c: Channel) -> Self {
        Self { id: c.id, display_name: c.display_name, episode_count: c.episode_ids.len(), episode_ids: c.episode_ids }
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ChannelList {
    pub items: Vec<ChannelView>,
}

pub fn router(state: AppState, max_upload_bytes: usize) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/recordings", post(create_recording))
        .route("/episodes", get(list_episodes))
        .route("/episodes/{id}", get(get_episode))
        .route("/episodes/{id}/audio", get(get_audio))
        .route("/channels", get(list_channels))
        .route("/channels/{id}/episodes", get(channel_episodes))
        .layer(DefaultBodyLimit::max(max_upload_bytes))
        .with_state(state)
}

async fn health() -> Json<serde_json::Value> {
    Json(serde_json::json!({ "status": "ok" }))
}

fn multipart_error(e: axum::extract::multipart::MultipartError) -> ApiError {
    let status = e.status();
    if status == StatusCode::PAYLOAD_TOO_LARGE {
        ApiError::new(status, "PayloadTooLarge", e.body_text())
    } else {
        ApiError::new(StatusCode::BAD_REQUEST, "InvalidMultipart", e.body_text())
    }
}

fn is_pdf_part(name: &str) -> bool {
    matches!(name, "pdf" | "pdfs" | "file" | "files" | "source_papers")
}

/// Multipart fields: `title`, `minutes`, `language`, `model_id`,
/// `description`, `keywords`, `cover_image_url`, `channel_id`, and one or more
/// file parts named `pdf`.
async fn create_recording(State(state): State<AppState>, mut multipart: Multipart) -> Result<Response, ApiError> {
    let mut raw = RawRecordingFields::default();
    let mut papers = Vec::new();
    let mut unknown = Vec::new();
    while let Some(part) = multipart.next_field().await.map_err(multipart_error)? {
        let name = part.name().unwrap_or_default().to_string();
        if is_pdf_part(&name) {
            let filename = part.file_name().map(str::to_string).unwrap_or_else(|| format!("paper-{}.pdf", papers.len() + 1));
            let bytes = part.bytes().await.map_err(multipart_error)?;
            if !bytes.is_empty() {
                papers.push(NewPaper { filename, bytes: bytes.to_vec() });
            }
            continue;
        }
        let value = part.text().await.map_err(multipart_error)?;
        let slot = match name.as_str() {
            "title" => &mut raw.title,
            "minutes" | "duration" => &mut raw.minutes,
            "language" => &mut raw.language,
            "model_id" | "model" => &mut raw.model_id,
            "description" => &mut raw.description,
            "keywords" => &mut raw.keywords,
            "cover_image_url" => &mut raw.cover_image_url,
            "channel_id" | "channel" => &mut raw.channel_id,
            _ => {
                unknown.push(name);
                continue;
            }
        };
        *slot = Some(value);
    }
    raw.source_paper_count = papers.len();
    let options = RecordingOptions::from_fields(&raw);
    let options = match (options, unknown.is_empty()) {
        (Ok(o), true) => o,
        (result, _) => {
            let mut errors = result.err().map(|v| v.errors).unwrap_or_default();
            errors.extend(unknown.into_iter().map(|f| FieldError { field: f, message: "unknown field".into() }));
            return Err(ValidationFailed { errors }.into());
        }
    };
    let store = state.store.clone();
    let episode = tokio::task::spawn_blocking(move || store.create_episode(&options, &papers))
        .await
        .map_err(|e| ApiError::internal(e.to_string()))??;
    tracing::info!(episode_id = %episode.id, "recording accepted");
    Ok((StatusCode::ACCEPTED, Json(episode)).into_response())
}

async fn list_episodes(
    State(state): State<AppState>,
    query: Result<Query<EpisodesQuery>, QueryRejection>,
) -> Result<Json<Page<Episode>>, ApiError> {
    let Query(q) = query?;
    Ok(Json(state.store.list_episodes(q.channel.as_deref(), PageQuery { page: q.page, per_page: q.per_page }.request())?))
}

async fn get_episode(State(state): State<AppState>, Path(id): Path<String>) -> Result<Json<Episode>, ApiError> {
    Ok(Json(state.store.get(&id)?))
}

async fn list_channels(State(state): State<AppState>) -> Json<ChannelList> {
    Json(ChannelList { items: state.store.list_channels().into_iter().map(ChannelView::from).collect() })
}

async fn channel_episodes(
    State(state): State<AppState>,
    Path(id): Path<String>,
    query: Result<Query<PageQuery>, QueryRejection>,
) -> Result<Json<Page<Episode>>, ApiError> {
    let Query(q) = query?;
    Ok(Json(state.store.list_episodes(Some(&id), q.request())?))
}

fn sniff_content_type(head: &[u8]) -> &'static str {
    if head.starts_with(b"RIFF") {
        "audio/wav"
    } else {
        "audio/mpeg"
    }
}

async fn get_audio(
    State(state): State<AppState>,
    Path(id): Path<String>,
    headers: HeaderMap,
) -> Result<Response, ApiError> {
    let ep = state.store.get(&id)?;
    if ep.status != EpisodeStatus::Complete {
        return Err(ApiError::new(
            StatusCode::CONFLICT,
            "AudioNotReady",
            format!("episode {id} is {}, audio exists only once it is complete", ep.status),
        ));
    }
    let path = state.store.blob_path(&ep.audio_ref)?;
    let bytes = tokio::fs::read(&path).await.map_err(|e| ApiError::internal(e.to_string()))?;
    let total = bytes.len() as u64;
    let content_type = HeaderValue::from_static(sniff_content_type(&bytes[..bytes.len().min(4)]));

    let range = headers.get(header::RANGE).and_then(|v| v.to_str().ok());
    let (status, ByteRange { start, end }) = match range.map(|r| parse_range(r, total)) {
        None | Some(Err(RangeError::Unsupported)) => (StatusCode::OK, ByteRange { start: 0, end: total }),
        Some(Ok(r)) => (StatusCode::PARTIAL_CONTENT, r),
        Some(Err(RangeError::Unsatisfiable)) => {
            return Ok(Response::builder()
                .status(StatusCode::RANGE_NOT_SATISFIABLE)
                .header(header::CONTENT_RANGE, format!("bytes */{total}"))
                .header(header::ACCEPT_RANGES, "bytes")
                .body(Body::empty())
                .expect("static response parts"));
        }
    };
    let body = bytes[start as usize..end as usize].to_vec();
    let mut resp = Response::builder()
        .status(status)
        .header(header::CONTENT_TYPE, content_type)
        .header(header::ACCEPT_RANGES, "bytes")
        .header(header::CONTENT_LENGTH, body.len());
    if status == StatusCode::PARTIAL_CONTENT {
        resp = resp.header(header::CONTENT_RANGE, format!("bytes {start}-{}/{total}", end - 1));
    }
    Ok(resp.body(Body::from(body)).expect("valid response parts"))
}

