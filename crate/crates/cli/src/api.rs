//! HTTP API under `/v1`. Responses are the module documents as JSON; errors
//! are `{"error": name, "message": ..., "report": ...}`.

use std::sync::Arc;

use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;
use serde_json::json;

use privjourney::gateway::Gateway;
use privjourney::storyboard::ReportFormat;
use privjourney::workspace::Workspace;

use crate::error::AppError;
use crate::ops::{self, StoryRequest};

#[derive(Clone)]
pub struct AppState {
    pub workspace: Arc<Workspace>,
    pub gateway: Arc<Gateway>,
}

impl AppState {
    pub fn new(workspace: Workspace, gateway: Gateway) -> Self {
        Self { workspace: Arc::new(workspace), gateway: Arc::new(gateway) }
    }
}

impl IntoResponse for AppError {
    fn into_response(self) -> Response {
        let status = StatusCode::from_u16(self.status()).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        (status, Json(self)).into_response()
    }
}

type ApiResult<T> = Result<T, AppError>;

/// Run blocking pipeline work off the async executor.
async fn blocking<T, F>(state: &AppState, f: F) -> ApiResult<T>
where
    T: Send + 'static,
    F: FnOnce(&Workspace, &Gateway) -> ApiResult<T> + Send + 'static,
{
    let (ws, gw) = (state.workspace.clone(), state.gateway.clone());
    tokio::task::spawn_blocking(move || f(&ws, &gw))
        .await
        .map_err(|e| AppError::new("InternalError", e.to_string()))?
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/v1/health", get(health))
        .route("/v1/personas", get(list_personas))
        .route("/v1/personas/build", post(build_personas))
        .route("/v1/personas/{id}", get(get_persona))
        .route("/v1/features", get(list_features).post(upload_feature))
        .route("/v1/features/validate", post(validate_feature))
        .route("/v1/features/{id}", get(get_feature))
        .route("/v1/stories", get(list_stories).post(create_story))
        .route("/v1/stories/{id}", get(get_story))
        .route("/v1/stories/{id}/storyboard", get(get_storyboard))
        .route("/v1/stories/{id}/report", get(get_report))
        .route("/v1/findings", get(list_batches).post(submit_findings))
        .route("/v1/findings/{batch}", get(get_batch))
        .route("/v1/findings/{batch}/tally", get(get_tally))
        .route("/v1/kappa", post(kappa))
        .with_state(state)
}

async fn health(State(state): State<AppState>) -> Json<serde_json::Value> {
    Json(json!({ "status": "ok", "mode": state.gateway.mode() }))
}

#[derive(Debug, Default, Deserialize)]
struct PersonaQuery {
    dimension: Option<String>,
    protected_info: Option<String>,
}

async fn list_personas(State(state): State<AppState>, Query(q): Query<PersonaQuery>) -> ApiResult<Response> {
    let personas = ops::personas(&state.workspace, q.dimension.as_deref(), q.protected_info.as_deref())?;
    Ok(Json(personas).into_response())
}

#[derive(Debug, Deserialize)]
struct BuildRequest {
    count: usize,
}

async fn build_personas(State(state): State<AppState>, Json(req): Json<BuildRequest>) -> ApiResult<Response> {
    let library = blocking(&state, move |ws, gw| ops::build_personas(ws, gw, req.count)).await?;
    Ok((StatusCode::CREATED, Json(library)).into_response())
}

async fn get_persona(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<Response> {
    Ok(Json(ops::persona(&state.workspace, &id)?).into_response())
}

async fn list_features(State(state): State<AppState>) -> Json<Vec<privjourney::FeatureSpec>> {
    Json(state.workspace.features())
}

async fn upload_feature(State(state): State<AppState>, body: String) -> ApiResult<Response> {
    let spec = state.workspace.put_feature(&body)?;
    Ok((StatusCode::CREATED, Json(spec)).into_response())
}

async fn validate_feature(body: String) -> ApiResult<Response> {
    Ok(Json(ops::validate_feature_text(&body)?).into_response())
}

async fn get_feature(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<Response> {
    Ok(Json(state.workspace.feature(&id)?).into_response())
}

async fn list_stories(State(state): State<AppState>) -> ApiResult<Response> {
    Ok(Json(state.workspace.stories()).into_response())
}

async fn create_story(State(state): State<AppState>, Json(req): Json<StoryRequest>) -> ApiResult<Response> {
    let story = blocking(&state, move |ws, gw| ops::create_story(ws, gw, &req)).await?;
    Ok((StatusCode::CREATED, Json(story)).into_response())
}

async fn get_story(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<Response> {
    Ok(Json(state.workspace.story(&id)?).into_response())
}

async fn get_storyboard(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<Response> {
    Ok(Json(ops::storyboard(&state.workspace, &id)?).into_response())
}

#[derive(Debug, Deserialize)]
struct ReportQuery {
    format: Option<String>,
}

async fn get_report(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<ReportQuery>,
) -> ApiResult<Response> {
    let format: ReportFormat =
        q.format.as_deref().unwrap_or("structured").parse().map_err(AppError::bad_request)?;
    let (text, _) = ops::render(&state.workspace, &id, format)?;
    let content_type = match format {
        ReportFormat::Structured => "application/json",
        ReportFormat::Markdown => "text/markdown; charset=utf-8",
        ReportFormat::Html => "text/html; charset=utf-8",
    };
    Ok(([(header::CONTENT_TYPE, content_type)], text).into_response())
}

async fn list_batches(State(state): State<AppState>) -> Json<std::collections::BTreeMap<String, usize>> {
    Json(state.workspace.batches())
}

async fn submit_findings(State(state): State<AppState>, body: String) -> ApiResult<Response> {
    let batch = blocking(&state, move |ws, gw| ops::code_findings(ws, gw, &body)).await?;
    Ok((StatusCode::CREATED, Json(batch)).into_response())
}

async fn get_batch(State(state): State<AppState>, Path(batch): Path<String>) -> ApiResult<Response> {
    Ok(Json(ops::coded_batch(&state.workspace, &batch)?).into_response())
}

async fn get_tally(State(state): State<AppState>, Path(batch): Path<String>) -> ApiResult<Response> {
    Ok(Json(ops::coded_batch(&state.workspace, &batch)?.tally).into_response())
}

#[derive(Debug, Deserialize)]
struct KappaQuery {
    a: Option<String>,
    b: Option<String>,
}

async fn kappa(Query(q): Query<KappaQuery>, body: String) -> ApiResult<Response> {
    Ok(Json(ops::kappa(&body, q.a.as_deref(), q.b.as_deref())?).into_response())
}
