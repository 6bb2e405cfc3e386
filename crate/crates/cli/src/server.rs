//! JSON-over-HTTP session service driven by the preparation UI.
//!
//! Sessions live in a [`SessionStore`] directory, so the service restarts
//! cleanly. Reads load the stored document without locking; mutations on one
//! session are serialized by a per-session lock and checked against the
//! version the client echoes.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post, put};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::json;

use ose_planner::matching::{SelectError, Selection};
use ose_planner::ose::{audit_database, validate_tools, AuditGrid, CuttingSet, OseDatabase, WhatIfError, WhatIfField};
use ose_planner::part::Part;
use ose_planner::pipeline::PipelineError;
use ose_planner::session::{FaceView, Session, SessionError, SessionStore, SessionSummary};
use ose_planner::transform::Tolerances;

/// Inputs used when a create request leaves a field out.
#[derive(Debug, Clone)]
pub struct Defaults {
    pub part: Option<Part>,
    pub db: OseDatabase,
    pub tools: Vec<CuttingSet>,
    pub tolerances: Tolerances,
}

pub struct AppState {
    store: SessionStore,
    defaults: Defaults,
    create: tokio::sync::Mutex<()>,
    locks: Mutex<HashMap<String, Arc<tokio::sync::Mutex<()>>>>,
}

impl AppState {
    pub fn new(store: SessionStore, defaults: Defaults) -> Arc<Self> {
        Arc::new(AppState {
            store,
            defaults,
            create: tokio::sync::Mutex::new(()),
            locks: Mutex::new(HashMap::new()),
        })
    }

    fn lock_for(&self, id: &str) -> Arc<tokio::sync::Mutex<()>> {
        let mut locks = self.locks.lock().expect("lock table poisoned");
        locks.entry(id.to_string()).or_default().clone()
    }
}

pub fn app(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/sessions", post(create_session).get(list_sessions))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/faces", get(get_faces))
        .route("/sessions/{id}/faces/{fid}/candidates", get(get_candidates))
        .route("/sessions/{id}/faces/{fid}/selection", put(put_selection))
        .route("/sessions/{id}/rebuild", post(rebuild))
        .route("/sessions/{id}/plan", get(get_plan))
        .route("/sessions/{id}/whatif", post(whatif))
        .route("/db/audit", get(db_audit))
        .with_state(state)
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    body: serde_json::Value,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        ApiError {
            status,
            body: json!({ "error": message.into() }),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> Self {
        let message = e.to_string();
        match e {
            SessionError::NotFound(_) | SessionError::UnknownFace(_) => ApiError::new(StatusCode::NOT_FOUND, message),
            SessionError::Select(SelectError::NoSuchAlternative(_)) => ApiError::new(StatusCode::NOT_FOUND, message),
            SessionError::Select(_) => ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, message),
            SessionError::Conflict { expected, actual } => ApiError {
                status: StatusCode::CONFLICT,
                body: json!({ "error": message, "expected": expected, "version": actual }),
            },
            SessionError::Pipeline(PipelineError::Validation(report)) => ApiError {
                status: StatusCode::UNPROCESSABLE_ENTITY,
                body: json!({ "error": "input validation failed", "report": report }),
            },
            SessionError::Pipeline(_) => ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, message),
            SessionError::WhatIf(WhatIfError::UnknownOse(_)) => ApiError::new(StatusCode::NOT_FOUND, message),
            SessionError::WhatIf(_) => ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, message),
            SessionError::Store(_) => ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, message),
        }
    }
}

type ApiResult<T> = Result<T, ApiError>;

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CreateRequest {
    pub part: Option<Part>,
    pub osedb: Option<OseDatabase>,
    pub tools: Option<Vec<CuttingSet>>,
    pub tolerances: Option<Tolerances>,
}

/// Parses an optional JSON body; an empty body is the type's default.
fn body_or_default<T: Default + serde::de::DeserializeOwned>(body: &Bytes) -> ApiResult<T> {
    if body.iter().all(u8::is_ascii_whitespace) {
        return Ok(T::default());
    }
    serde_json::from_slice(body).map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, format!("request body: {e}")))
}

async fn create_session(State(st): State<Arc<AppState>>, body: Bytes) -> ApiResult<(StatusCode, Json<SessionSummary>)> {
    let req: CreateRequest = body_or_default(&body)?;
    let part = req
        .part
        .or_else(|| st.defaults.part.clone())
        .ok_or_else(|| ApiError::new(StatusCode::BAD_REQUEST, "no part given and the service has no default part"))?;
    let tools = req.tools.unwrap_or_else(|| st.defaults.tools.clone());
    if let Some(first) = validate_tools(&tools).first() {
        return Err(ApiError::new(
            StatusCode::UNPROCESSABLE_ENTITY,
            format!("tools: {}: {}", first.path, first.message),
        ));
    }
    let db = req.osedb.unwrap_or_else(|| st.defaults.db.clone());
    let tol = req.tolerances.unwrap_or_else(|| st.defaults.tolerances.clone());

    let _guard = st.create.lock().await;
    let id = st.store.next_id()?;
    let session = Session::create(id, part, db, tools, tol)?;
    st.store.save(&session)?;
    Ok((StatusCode::CREATED, Json(session.summary())))
}

async fn list_sessions(State(st): State<Arc<AppState>>) -> ApiResult<Json<Vec<String>>> {
    Ok(Json(st.store.list()?))
}

async fn get_session(State(st): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<Json<SessionSummary>> {
    Ok(Json(st.store.load(&id)?.summary()))
}

async fn get_faces(State(st): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<Json<Vec<FaceView>>> {
    Ok(Json(st.store.load(&id)?.faces()))
}

async fn get_candidates(
    State(st): State<Arc<AppState>>,
    Path((id, fid)): Path<(String, String)>,
) -> ApiResult<Json<Vec<ose_planner::matching::Candidate>>> {
    Ok(Json(st.store.load(&id)?.face(&fid)?.candidates))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelectionRequest {
    pub version: Option<u64>,
    pub selection: Selection,
}

#[derive(Debug, Serialize)]
pub struct SelectionResponse {
    pub version: u64,
    pub stale: bool,
    pub face: FaceView,
}

async fn put_selection(
    State(st): State<Arc<AppState>>,
    Path((id, fid)): Path<(String, String)>,
    body: Bytes,
) -> ApiResult<Json<SelectionResponse>> {
    let req: SelectionRequest = serde_json::from_slice(&body)
        .map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, format!("request body: {e}")))?;
    let lock = st.lock_for(&id);
    let _guard = lock.lock().await;
    let mut s = st.store.load(&id)?;
    s.select(&fid, req.selection, req.version)?;
    st.store.save(&s)?;
    Ok(Json(SelectionResponse {
        version: s.version,
        stale: s.stale,
        face: s.face(&fid)?,
    }))
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VersionRequest {
    pub version: Option<u64>,
}

async fn rebuild(
    State(st): State<Arc<AppState>>,
    Path(id): Path<String>,
    body: Bytes,
) -> ApiResult<Json<SessionSummary>> {
    let req: VersionRequest = body_or_default(&body)?;
    let lock = st.lock_for(&id);
    let _guard = lock.lock().await;
    let mut s = st.store.load(&id)?;
    s.rebuild(req.version)?;
    st.store.save(&s)?;
    Ok(Json(s.summary()))
}

#[derive(Debug, Default, Deserialize)]
pub struct PlanQuery {
    pub format: Option<String>,
}

/// The exported plan document, JSON by default or text with `?format=text`.
/// The `x-plan-stale` header tells whether selections changed since the last
/// rebuild.
async fn get_plan(
    State(st): State<Arc<AppState>>,
    Path(id): Path<String>,
    Query(q): Query<PlanQuery>,
) -> ApiResult<Response> {
    let s = st.store.load(&id)?;
    let doc = s.export();
    let stale = if s.stale { "true" } else { "false" };
    let (ctype, body) = match q.format.as_deref() {
        None | Some("json") => ("application/json", doc.json),
        Some("text") => ("text/plain; charset=utf-8", doc.text),
        Some(other) => {
            return Err(ApiError::new(StatusCode::BAD_REQUEST, format!("unknown format {other}")));
        }
    };
    Ok(([(header::CONTENT_TYPE, ctype), (header::HeaderName::from_static("x-plan-stale"), stale)], body).into_response())
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WhatIfRequest {
    pub ose: String,
    #[serde(default)]
    pub vary: Vec<WhatIfField>,
}

async fn whatif(
    State(st): State<Arc<AppState>>,
    Path(id): Path<String>,
    body: Bytes,
) -> ApiResult<Json<Vec<ose_planner::ose::Variant>>> {
    let req: WhatIfRequest = serde_json::from_slice(&body)
        .map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, format!("request body: {e}")))?;
    let s = st.store.load(&id)?;
    let vary = if req.vary.is_empty() { &WhatIfField::ALL[..] } else { &req.vary[..] };
    Ok(Json(s.what_if(&req.ose, vary)?))
}

#[derive(Debug, Default, Deserialize)]
pub struct AuditQuery {
    pub session: Option<String>,
}

/// Audits the service database, or the database a session was created with.
async fn db_audit(
    State(st): State<Arc<AppState>>,
    Query(q): Query<AuditQuery>,
) -> ApiResult<Json<ose_planner::ose::AuditReport>> {
    let db = match q.session {
        Some(id) => st.store.load(&id)?.db,
        None => st.defaults.db.clone(),
    };
    Ok(Json(audit_database(&db, &AuditGrid::for_database(&db))))
}
