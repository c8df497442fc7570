//! HTTP session API.
//!
//! - `POST /sessions` `{model?, variant?, humanRole?, start}` → 201 `{sessionId, position, ...}`
//! - `GET /sessions/{id}` → full state with the legal-move schema
//! - `POST /sessions/{id}/move` `{move}` → `{verdict, engineReply?, position, witnessSoFar}`;
//!   422 with the violated inequality when the move breaks the rules
//! - `DELETE /sessions/{id}` → 204

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use fixwit_core::game::{Player, Variant};
use serde::Deserialize;
use serde_json::{json, Value};
use uuid::Uuid;

use crate::error::CliError;
use crate::model::Model;
use crate::session::{MoveOutcome, RoleArg, Session, VariantArg};

pub struct Defaults {
    pub model: Option<Arc<Model>>,
    pub variant: Variant,
    pub human: Player,
    pub start: Option<String>,
    pub max_iter: Option<usize>,
}

impl Default for Defaults {
    fn default() -> Self {
        Defaults { model: None, variant: Variant::Primal, human: Player::Exists, start: None, max_iter: None }
    }
}

#[derive(Clone)]
pub struct AppState {
    defaults: Arc<Defaults>,
    sessions: Arc<Mutex<HashMap<Uuid, Arc<Mutex<Session>>>>>,
}

impl AppState {
    pub fn new(defaults: Defaults) -> Self {
        AppState { defaults: Arc::new(defaults), sessions: Arc::default() }
    }

    fn get(&self, id: &str) -> Result<Arc<Mutex<Session>>, ApiError> {
        let id = Uuid::parse_str(id).map_err(|_| ApiError::not_found(id))?;
        self.sessions.lock().expect("session table").get(&id).cloned().ok_or_else(|| ApiError::not_found(&id.to_string()))
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/sessions", post(create))
        .route("/sessions/{id}", get(fetch).delete(remove))
        .route("/sessions/{id}/move", post(play_move))
        .with_state(state)
}

pub struct ApiError {
    status: StatusCode,
    body: Value,
}

impl ApiError {
    fn not_found(id: &str) -> Self {
        ApiError { status: StatusCode::NOT_FOUND, body: json!({"error": format!("no session {id}")}) }
    }
}

impl From<CliError> for ApiError {
    fn from(e: CliError) -> Self {
        let status = if e.exit_code() == 2 { StatusCode::BAD_REQUEST } else { StatusCode::INTERNAL_SERVER_ERROR };
        ApiError { status, body: json!({"error": e.to_string()}) }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct CreateRequest {
    model: Option<Value>,
    variant: Option<VariantArg>,
    human_role: Option<RoleArg>,
    start: Option<String>,
}

async fn create(State(state): State<AppState>, body: Option<Json<CreateRequest>>) -> Result<Response, ApiError> {
    let Some(Json(req)) = body else {
        return Err(CliError::Usage(String::from("expected a JSON body")).into());
    };
    let d = &state.defaults;
    let model = match req.model {
        Some(v) => Arc::new(Model::from_value(v)?),
        None => d.model.clone().ok_or_else(|| CliError::Usage(String::from("no model given and the server has no default")))?,
    };
    let start = req.start.or_else(|| d.start.clone()).ok_or_else(|| CliError::Usage(String::from("missing `start` basis element")))?;
    let variant = req.variant.map(Variant::from).unwrap_or(d.variant);
    let human = req.human_role.map(Player::from).unwrap_or(d.human);
    let max_iter = model.max_iter(d.max_iter)?;
    let session = Session::new(model, variant, human, &start, max_iter)?;
    let mut body = session.state_json();
    let id = Uuid::new_v4();
    body["sessionId"] = json!(id.to_string());
    state.sessions.lock().expect("session table").insert(id, Arc::new(Mutex::new(session)));
    Ok((StatusCode::CREATED, Json(body)).into_response())
}

async fn fetch(State(state): State<AppState>, Path(id): Path<String>) -> Result<Json<Value>, ApiError> {
    let s = state.get(&id)?;
    let s = s.lock().expect("session");
    let mut body = s.state_json();
    body["sessionId"] = json!(id);
    Ok(Json(body))
}

async fn remove(State(state): State<AppState>, Path(id): Path<String>) -> Result<StatusCode, ApiError> {
    let uuid = Uuid::parse_str(&id).map_err(|_| ApiError::not_found(&id))?;
    match state.sessions.lock().expect("session table").remove(&uuid) {
        Some(_) => Ok(StatusCode::NO_CONTENT),
        None => Err(ApiError::not_found(&id)),
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MoveRequest {
    #[serde(rename = "move")]
    mv: Value,
}

async fn play_move(State(state): State<AppState>, Path(id): Path<String>, body: Option<Json<MoveRequest>>) -> Result<Response, ApiError> {
    let Some(Json(req)) = body else {
        return Err(CliError::Usage(String::from("expected {\"move\": ...}")).into());
    };
    let s = state.get(&id)?;
    let mut s = s.lock().expect("session");
    let outcome = s.submit(&req.mv).map_err(|e| match e {
        CliError::Usage(m) if m.contains("game is over") || m.contains("turn") => {
            ApiError { status: StatusCode::CONFLICT, body: json!({"error": m}) }
        }
        other => other.into(),
    })?;
    Ok(match outcome {
        MoveOutcome::Rejected(v) => (
            StatusCode::UNPROCESSABLE_ENTITY,
            Json(json!({"verdict": {"accepted": false, "reason": v.reason}, "position": s.position_json()})),
        )
            .into_response(),
        MoveOutcome::Accepted { verdict, engine_reply } => {
            let mut body = json!({
                "verdict": {"accepted": verdict.accepted, "reason": verdict.reason},
                "position": s.position_json(),
                "legalMoves": s.legal_moves(),
                "witnessSoFar": s.witness_so_far(),
            });
            if let Some(r) = engine_reply {
                body["engineReply"] = r;
            }
            Json(body).into_response()
        }
    })
}

/// Serves the API on `127.0.0.1:port` until the process is stopped.
pub async fn serve(state: AppState, port: u16) -> Result<(), CliError> {
    let addr = format!("127.0.0.1:{port}");
    let listener = tokio::net::TcpListener::bind(&addr).await.map_err(|source| CliError::Io { path: addr.clone(), source })?;
    eprintln!("fixwit: serving the game API on http://{addr}");
    axum::serve(listener, router(state)).await.map_err(|source| CliError::Io { path: addr, source })
}
