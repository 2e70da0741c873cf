use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::header::CONTENT_TYPE;
use axum::routing::{get, post};
use axum::{Json, Router};
use larex_core::{profile, Edit, EditLog, SegmentationProfile};
use serde::Deserialize;

use crate::error::{Result, ServiceError};
use crate::jobs::{JobManager, JobProgress};
use crate::library::{BookInfo, ConsistencyReport, FinalizeResponse, Library, PageInfo, SegmentationResponse};

#[derive(Clone)]
pub struct AppState {
    pub library: Arc<Library>,
    pub jobs: Arc<JobManager>,
}

impl AppState {
    pub fn new(library: Library, line_workers: usize) -> Self {
        let library = Arc::new(library);
        Self {
            jobs: Arc::new(JobManager::new(library.clone(), line_workers)),
            library,
        }
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/books", get(list_books))
        .route("/books/{book}/pages", get(list_pages))
        .route("/books/{book}/profile", get(get_profile).put(put_profile))
        .route("/books/{book}/pages/{page}/segmentation", post(segmentation))
        .route("/books/{book}/pages/{page}/edits", get(edit_log).post(apply_edit))
        .route("/books/{book}/pages/{page}/finalize", post(finalize))
        .route("/books/{book}/pages/{page}/consistency", get(consistency))
        .route("/books/{book}/linejobs", post(start_line_job))
        .route("/books/{book}/linejobs/{job}", get(line_job).delete(cancel_line_job))
        .with_state(state)
}

/// Pages touch the disk and run the pipeline; keep that off the reactor.
async fn blocking<T: Send + 'static>(f: impl FnOnce() -> Result<T> + Send + 'static) -> Result<T> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ServiceError::Internal(e.to_string()))?
}

fn parse_json<T: serde::de::DeserializeOwned>(body: &[u8]) -> Result<T> {
    serde_json::from_slice(body).map_err(|e| ServiceError::BadRequest(e.to_string()))
}

async fn list_books(State(s): State<AppState>) -> Result<Json<Vec<BookInfo>>> {
    let lib = s.library.clone();
    blocking(move || lib.list_books()).await.map(Json)
}

async fn list_pages(State(s): State<AppState>, Path(book): Path<String>) -> Result<Json<Vec<PageInfo>>> {
    let lib = s.library.clone();
    blocking(move || lib.list_pages(&book)).await.map(Json)
}

type JsonText = ([(axum::http::HeaderName, &'static str); 1], String);

fn json_text(s: String) -> JsonText {
    ([(CONTENT_TYPE, "application/json")], s)
}

async fn get_profile(State(s): State<AppState>, Path(book): Path<String>) -> Result<JsonText> {
    let lib = s.library.clone();
    blocking(move || Ok(profile::to_json(&lib.profile(&book)?)?)).await.map(json_text)
}

/// Body: a profile document as stored on disk (`schemaVersion` + `profile`).
async fn put_profile(State(s): State<AppState>, Path(book): Path<String>, body: Bytes) -> Result<JsonText> {
    let text = std::str::from_utf8(&body).map_err(|e| ServiceError::BadRequest(e.to_string()))?.to_string();
    let lib = s.library.clone();
    blocking(move || {
        let p = profile::from_json(&text)?;
        lib.save_profile(&book, &p)?;
        Ok(profile::to_json(&p)?)
    })
    .await
    .map(json_text)
}

#[derive(Debug, Default, Deserialize)]
#[serde(rename_all = "camelCase")]
struct SegmentationRequest {
    profile: Option<SegmentationProfile>,
}

/// Empty body or `{}` segments with the book profile; `{"profile": {...}}`
/// previews an override without persisting it.
async fn segmentation(
    State(s): State<AppState>,
    Path((book, page)): Path<(String, String)>,
    body: Bytes,
) -> Result<Json<SegmentationResponse>> {
    let req: SegmentationRequest = if body.iter().all(u8::is_ascii_whitespace) {
        SegmentationRequest::default()
    } else {
        parse_json(&body)?
    };
    let lib = s.library.clone();
    blocking(move || lib.segmentation(&book, &page, req.profile)).await.map(Json)
}

async fn edit_log(State(s): State<AppState>, Path((book, page)): Path<(String, String)>) -> Result<Json<EditLog>> {
    let lib = s.library.clone();
    blocking(move || lib.edit_log(&book, &page)).await.map(Json)
}

async fn apply_edit(
    State(s): State<AppState>,
    Path((book, page)): Path<(String, String)>,
    body: Bytes,
) -> Result<Json<SegmentationResponse>> {
    let edit: Edit = parse_json(&body)?;
    let lib = s.library.clone();
    blocking(move || lib.apply_edit(&book, &page, edit)).await.map(Json)
}

#[derive(Debug, Default, Deserialize)]
#[serde(rename_all = "camelCase")]
struct FinalizeRequest {
    #[serde(default)]
    lines: bool,
}

async fn finalize(
    State(s): State<AppState>,
    Path((book, page)): Path<(String, String)>,
    body: Bytes,
) -> Result<Json<FinalizeResponse>> {
    let req: FinalizeRequest = if body.iter().all(u8::is_ascii_whitespace) {
        FinalizeRequest::default()
    } else {
        parse_json(&body)?
    };
    let lib = s.library.clone();
    blocking(move || lib.finalize(&book, &page, req.lines)).await.map(Json)
}

async fn consistency(
    State(s): State<AppState>,
    Path((book, page)): Path<(String, String)>,
) -> Result<Json<ConsistencyReport>> {
    let lib = s.library.clone();
    blocking(move || lib.consistency(&book, &page)).await.map(Json)
}

#[derive(Debug, Default, Deserialize)]
#[serde(rename_all = "camelCase")]
struct LineJobRequest {
    #[serde(default)]
    page_ids: Vec<String>,
}

async fn start_line_job(
    State(s): State<AppState>,
    Path(book): Path<String>,
    body: Bytes,
) -> Result<Json<JobProgress>> {
    let req: LineJobRequest = if body.iter().all(u8::is_ascii_whitespace) {
        LineJobRequest::default()
    } else {
        parse_json(&body)?
    };
    let jobs = s.jobs.clone();
    blocking(move || jobs.start(&book, req.page_ids)).await.map(Json)
}

async fn line_job(State(s): State<AppState>, Path((book, job)): Path<(String, u64)>) -> Result<Json<JobProgress>> {
    s.jobs.progress(&book, job).map(Json)
}

async fn cancel_line_job(
    State(s): State<AppState>,
    Path((book, job)): Path<(String, u64)>,
) -> Result<Json<JobProgress>> {
    s.jobs.cancel(&book, job).map(Json)
}
