//! HTTP service: `POST /grade` and `GET /health`.

use std::collections::HashMap;
use std::io::Write;
use std::sync::{Arc, Mutex};

use axum::body::Bytes;
use axum::extract::State;
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use codegrade::corpus::Engines;
use codegrade::report::StudentHistory;
use codegrade::{Difficulty, HistoryStore};
use serde::Deserialize;
use serde_json::json;

#[derive(Clone)]
pub struct AppState {
    engines: Arc<Engines>,
    store: Option<HistoryStore>,
    // Serializes requests of one student so that load, grade and append
    // happen as one step.
    students: Arc<Mutex<HashMap<String, Arc<Mutex<()>>>>>,
}

impl AppState {
    pub fn new(engines: Engines, store: Option<HistoryStore>) -> Self {
        Self {
            engines: Arc::new(engines),
            store,
            students: Arc::default(),
        }
    }

    fn student_lock(&self, student_id: &str) -> Arc<Mutex<()>> {
        let mut map = self.students.lock().unwrap_or_else(|e| e.into_inner());
        map.entry(student_id.to_string()).or_default().clone()
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/grade", post(grade))
        .with_state(state)
}

async fn health() -> Response {
    json_response(StatusCode::OK, json!({"status": "ok"}).to_string())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GradeRequest {
    source: String,
    language: String,
    level: Option<String>,
    student_id: Option<String>,
}

fn json_response(status: StatusCode, body: String) -> Response {
    (status, [(header::CONTENT_TYPE, "application/json")], body).into_response()
}

fn error(status: StatusCode, message: impl Into<String>) -> Response {
    json_response(status, json!({"error": message.into()}).to_string())
}

async fn grade(State(state): State<AppState>, body: Bytes) -> Response {
    let request: GradeRequest = match serde_json::from_slice(&body) {
        Ok(r) => r,
        Err(e) => return error(StatusCode::BAD_REQUEST, format!("malformed request: {e}")),
    };
    let level = match request.level.as_deref() {
        None => Difficulty::Hard,
        Some(text) => match text.to_ascii_uppercase().parse() {
            Ok(level) => level,
            Err(_) => return error(StatusCode::BAD_REQUEST, format!("unknown level `{text}`")),
        },
    };
    if request.student_id.as_deref() == Some("") {
        return error(StatusCode::BAD_REQUEST, "student_id must not be empty");
    }
    if !state.engines.contains_key(&request.language) {
        return error(
            StatusCode::UNPROCESSABLE_ENTITY,
            format!("unsupported language `{}`", request.language),
        );
    }

    let result = tokio::task::spawn_blocking(move || grade_blocking(&state, request, level)).await;
    match result {
        Ok(Ok(text)) => json_response(StatusCode::OK, text),
        Ok(Err(e)) => {
            eprintln!("grade request failed: {e}");
            error(StatusCode::INTERNAL_SERVER_ERROR, "internal error")
        }
        Err(e) => {
            eprintln!("grade task failed: {e}");
            error(StatusCode::INTERNAL_SERVER_ERROR, "internal error")
        }
    }
}

type BoxError = Box<dyn std::error::Error + Send + Sync>;

fn grade_blocking(
    state: &AppState,
    request: GradeRequest,
    level: Difficulty,
) -> Result<String, BoxError> {
    let engine = &state.engines[&request.language];
    let suffix = match request.language.as_str() {
        "java" => ".java",
        "python" => ".py",
        _ => "",
    };
    let mut file = tempfile::Builder::new().suffix(suffix).tempfile()?;
    file.write_all(request.source.as_bytes())?;
    file.flush()?;

    let report = match (&state.store, &request.student_id) {
        (Some(store), Some(student_id)) => {
            let lock = state.student_lock(student_id);
            let _guard = lock.lock().unwrap_or_else(|e| e.into_inner());
            engine.build_report(
                file.path(),
                level,
                Some(StudentHistory { store, student_id }),
            )?
        }
        _ => engine.build_report(file.path(), level, None)?,
    };
    let mut text = report.to_json();
    text.push('\n');
    Ok(text)
}
