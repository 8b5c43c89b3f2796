use std::path::PathBuf;
use std::sync::Arc;

use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;
use serde_json::json;

use crate::config::{safe_media_path, DeviceReport};
use crate::service::{StudyService, VoteRequest};
use crate::StudyError;

#[derive(Clone)]
pub struct AppState {
    pub service: Arc<StudyService>,
    pub media_root: Option<PathBuf>,
}

impl StudyError {
    fn status(&self) -> StatusCode {
        match self {
            StudyError::UnknownSession(_) | StudyError::UnknownPlaylist(_) => StatusCode::NOT_FOUND,
            StudyError::WrongState { .. }
            | StudyError::OutOfOrder { .. }
            | StudyError::DuplicateVote { .. }
            | StudyError::SessionIncomplete { .. }
            | StudyError::NoPendingSlot
            | StudyError::SessionExpired => StatusCode::CONFLICT,
            StudyError::Store(_) | StudyError::Config(_) => StatusCode::INTERNAL_SERVER_ERROR,
            _ => StatusCode::UNPROCESSABLE_ENTITY,
        }
    }
}

impl IntoResponse for StudyError {
    fn into_response(self) -> Response {
        let body = json!({ "error": self.kind(), "message": self.to_string() });
        (self.status(), Json(body)).into_response()
    }
}

type ApiResult<T> = Result<Json<T>, StudyError>;

async fn create_session(State(s): State<AppState>, Json(device): Json<DeviceReport>) -> Result<impl IntoResponse, StudyError> {
    Ok((StatusCode::CREATED, Json(s.service.create_session(device)?)))
}

async fn get_session(State(s): State<AppState>, Path(id): Path<String>) -> ApiResult<crate::service::SessionInfo> {
    Ok(Json(s.service.session(&id)?))
}

async fn get_playlist(State(s): State<AppState>, Path(id): Path<u32>) -> ApiResult<crate::service::PlaylistSummary> {
    Ok(Json(s.service.playlist(id)?))
}

async fn training_complete(State(s): State<AppState>, Path(id): Path<String>) -> ApiResult<crate::service::SessionInfo> {
    Ok(Json(s.service.training_complete(&id)?))
}

async fn next_item(State(s): State<AppState>, Path(id): Path<String>) -> ApiResult<crate::service::NextItem> {
    Ok(Json(s.service.next_item(&id)?))
}

async fn vote(State(s): State<AppState>, Json(req): Json<VoteRequest>) -> ApiResult<crate::service::VoteAck> {
    Ok(Json(s.service.submit_vote(&req)?))
}

async fn complete(State(s): State<AppState>, Path(id): Path<String>) -> Result<Json<serde_json::Value>, StudyError> {
    let code = s.service.complete_session(&id)?;
    Ok(Json(json!({ "session_id": id, "completion_code": code })))
}

#[derive(Deserialize)]
struct ExportQuery {
    playlist: Option<u32>,
}

async fn export(State(s): State<AppState>, Query(q): Query<ExportQuery>) -> impl IntoResponse {
    ([(header::CONTENT_TYPE, "application/x-ndjson")], s.service.export_jsonl(q.playlist))
}

fn content_type(path: &str) -> &'static str {
    match path.rsplit('.').next().map(|e| e.to_ascii_lowercase()).as_deref() {
        Some("png") => "image/png",
        Some("jpg" | "jpeg") => "image/jpeg",
        Some("ppm" | "pgm") => "image/x-portable-anymap",
        Some("mp4") => "video/mp4",
        Some("webm") => "video/webm",
        Some("json") => "application/json",
        _ => "application/octet-stream",
    }
}

async fn media(State(s): State<AppState>, Path(path): Path<String>) -> Response {
    let Some(root) = s.media_root.as_ref() else {
        return StatusCode::NOT_FOUND.into_response();
    };
    if !safe_media_path(&path) {
        return StatusCode::NOT_FOUND.into_response();
    }
    match tokio::fs::read(root.join(&path)).await {
        Ok(bytes) => (
            [
                (header::CONTENT_TYPE, content_type(&path)),
                (header::CACHE_CONTROL, "public, max-age=86400, immutable"),
            ],
            bytes,
        )
            .into_response(),
        Err(_) => StatusCode::NOT_FOUND.into_response(),
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/api/session", post(create_session))
        .route("/api/session/{id}", get(get_session))
        .route("/api/session/{id}/training-complete", post(training_complete))
        .route("/api/session/{id}/next", get(next_item))
        .route("/api/session/{id}/complete", post(complete))
        .route("/api/playlist/{id}", get(get_playlist))
        .route("/api/vote", post(vote))
        .route("/api/export", get(export))
        .route("/media/{*path}", get(media))
        .with_state(state)
}

/// Serves until the listener fails or ctrl-c arrives.
pub async fn serve(listener: tokio::net::TcpListener, state: AppState) -> std::io::Result<()> {
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
