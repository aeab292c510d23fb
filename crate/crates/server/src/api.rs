//! HTTP routes. All handlers go through one mutex, so mutations are serialized and reads
//! see a consistent snapshot.

use std::sync::{Arc, Mutex, MutexGuard};

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use dqs_core::{LabelValue, StrategyKind};
use serde::{Deserialize, Serialize};

use crate::session::SessionError;
use crate::Service;

pub type AppState = Arc<Mutex<Service>>;

#[derive(Debug, Serialize, Deserialize)]
pub struct ErrorBody {
    pub code: String,
    pub message: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct RoundBody {
    pub strategy: StrategyKind,
    pub budget: usize,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct PendingBody {
    pub round: usize,
    pub pending: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct LabelBody {
    pub id: String,
    pub value: LabelValue,
}

pub struct ApiError(SessionError);

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> Self {
        ApiError(e)
    }
}

impl From<JsonRejection> for ApiError {
    fn from(e: JsonRejection) -> Self {
        ApiError(SessionError::BadRequest(e.body_text()))
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = match self.0 {
            SessionError::NotFound(_) => StatusCode::NOT_FOUND,
            SessionError::Conflict(_) => StatusCode::CONFLICT,
            SessionError::BadRequest(_) => StatusCode::BAD_REQUEST,
            SessionError::Internal(_) => StatusCode::INTERNAL_SERVER_ERROR,
        };
        let body = ErrorBody {
            code: self.0.code().to_string(),
            message: self.0.to_string(),
        };
        (status, Json(body)).into_response()
    }
}

fn lock(state: &AppState) -> MutexGuard<'_, Service> {
    state.lock().unwrap_or_else(|p| p.into_inner())
}

async fn get_session(State(state): State<AppState>) -> Json<crate::Summary> {
    Json(lock(&state).session().summary())
}

async fn post_round(
    State(state): State<AppState>,
    body: Result<Json<RoundBody>, JsonRejection>,
) -> Result<Json<PendingBody>, ApiError> {
    let Json(body) = body?;
    let mut svc = lock(&state);
    let pending = svc.start_round(body.strategy, body.budget)?;
    Ok(Json(PendingBody {
        round: svc.session().round(),
        pending,
    }))
}

async fn get_query(
    State(state): State<AppState>,
    Path(id): Path<String>,
) -> Result<Json<crate::QueryPayload>, ApiError> {
    Ok(Json(lock(&state).session().get_query(&id)?))
}

async fn post_label(
    State(state): State<AppState>,
    body: Result<Json<LabelBody>, JsonRejection>,
) -> Result<Json<crate::Summary>, ApiError> {
    let Json(body) = body?;
    Ok(Json(lock(&state).submit_label(&body.id, body.value)?))
}

async fn get_report(State(state): State<AppState>) -> Json<crate::SessionReport> {
    Json(lock(&state).session().report())
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/session", get(get_session))
        .route("/session/rounds", post(post_round))
        .route("/queries/{id}", get(get_query))
        .route("/labels", post(post_label))
        .route("/report", get(get_report))
        .with_state(state)
}
