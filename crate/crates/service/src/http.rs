//! The `/v1` HTTP routes.

use std::sync::Arc;

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Serialize;

use crate::error::{codes, ServiceError};
use crate::manager::SessionManager;
use crate::protocol::{CreateSessionRequest, QueryRequest, RecordFindingRequest};

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let status = StatusCode::from_u16(self.status()).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        (status, Json(self)).into_response()
    }
}

type Shared = Arc<SessionManager>;

pub fn router(manager: Shared) -> Router {
    Router::new()
        .route("/v1/kbs", get(list_kbs))
        .route("/v1/sessions", post(create_session))
        .route("/v1/sessions/:id/state", get(get_state))
        .route("/v1/sessions/:id/recommendation", get(get_recommendation))
        .route("/v1/sessions/:id/findings", post(post_finding))
        .route("/v1/sessions/:id/query", post(post_query))
        .route("/v1/sessions/:id/trace", get(get_trace))
        .fallback(not_found)
        .with_state(manager)
}

async fn not_found() -> ServiceError {
    ServiceError::new(codes::NOT_FOUND, "no such endpoint")
}

/// Runs a session operation off the async executor.
async fn blocking<T, F>(manager: Shared, op: F) -> Result<Json<T>, ServiceError>
where
    T: Serialize + Send + 'static,
    F: FnOnce(&SessionManager) -> Result<T, ServiceError> + Send + 'static,
{
    tokio::task::spawn_blocking(move || op(&manager))
        .await
        .map_err(|e| ServiceError::new(codes::INTERNAL_ERROR, e.to_string()))?
        .map(Json)
}

fn body<T>(payload: Result<Json<T>, JsonRejection>) -> Result<T, ServiceError> {
    payload
        .map(|Json(v)| v)
        .map_err(|e| ServiceError::malformed(e.body_text()))
}

#[derive(Serialize)]
struct KbList {
    kbs: Vec<String>,
}

async fn list_kbs(State(m): State<Shared>) -> Json<KbList> {
    Json(KbList {
        kbs: m.kbs().ids().map(str::to_string).collect(),
    })
}

async fn create_session(
    State(m): State<Shared>,
    payload: Result<Json<CreateSessionRequest>, JsonRejection>,
) -> Result<impl IntoResponse, ServiceError> {
    let req = body(payload)?;
    let state = blocking(m, move |m| m.create(&req.kb)).await?;
    Ok((StatusCode::CREATED, state))
}

async fn get_state(State(m): State<Shared>, Path(id): Path<String>) -> Result<impl IntoResponse, ServiceError> {
    blocking(m, move |m| m.state(&id)).await
}

async fn get_recommendation(State(m): State<Shared>, Path(id): Path<String>) -> Result<impl IntoResponse, ServiceError> {
    blocking(m, move |m| m.recommendation(&id)).await
}

async fn post_finding(
    State(m): State<Shared>,
    Path(id): Path<String>,
    payload: Result<Json<RecordFindingRequest>, JsonRejection>,
) -> Result<impl IntoResponse, ServiceError> {
    let req = body(payload)?;
    blocking(m, move |m| m.record_finding(&id, &req.finding, req.value.as_ref())).await
}

async fn post_query(
    State(m): State<Shared>,
    Path(id): Path<String>,
    payload: Result<Json<QueryRequest>, JsonRejection>,
) -> Result<impl IntoResponse, ServiceError> {
    let req = body(payload)?;
    blocking(m, move |m| m.query(&id, &req)).await
}

async fn get_trace(State(m): State<Shared>, Path(id): Path<String>) -> Result<impl IntoResponse, ServiceError> {
    blocking(m, move |m| m.trace(&id)).await
}

/// Serves until interrupted.
pub async fn serve(manager: SessionManager, port: u16) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(("127.0.0.1", port)).await?;
    eprintln!("listening on http://{}/v1", listener.local_addr()?);
    axum::serve(listener, router(Arc::new(manager)))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
