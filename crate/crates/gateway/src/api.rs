//! HTTP session API.
//!
//! A session holds a problem skeleton and collects one decision matrix per
//! maker. Once every maker has a full matrix the session can be run; the
//! run's report is the same document the `pipeline` command prints.

use std::collections::{BTreeMap, HashMap};
use std::path::PathBuf;
use std::sync::{Arc, RwLock};

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post, put};
use axum::Router;
use gdss_core::group::{consensus, whatif_weights, ConsensusConfig};
use gdss_core::model::{validate_problem, ValidationReport};
use gdss_core::pipeline::PipelineReport;
use gdss_core::{
    classify_problem, DecisionMatrix, GroupProblem, MethodId, MethodOptions, ProblemFile, SchemeDescriptor,
    SchemeLookup,
};
use gdss_store::KnowledgeStore;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tokio::sync::Mutex;
use tower_http::services::ServeDir;

use crate::runner::{execute, random_token, render};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Collecting,
    Complete,
    Evaluated,
}

#[derive(Debug)]
struct Evaluated {
    report: PipelineReport,
    method: MethodId,
    descriptor: SchemeDescriptor,
    stored_as: String,
}

#[derive(Debug)]
struct Session {
    id: String,
    skeleton: GroupProblem,
    judgments: BTreeMap<String, DecisionMatrix>,
    evaluated: Option<Evaluated>,
    runs: u32,
}

impl Session {
    /// The session as a problem, judgments in maker order.
    fn problem(&self) -> GroupProblem {
        let mut problem = self.skeleton.clone();
        problem.judgments = problem
            .makers
            .iter()
            .filter_map(|m| self.judgments.get(&m.id).cloned())
            .collect();
        problem
    }

    fn missing_makers(&self) -> Vec<String> {
        self.skeleton
            .makers
            .iter()
            .filter(|m| {
                !self
                    .judgments
                    .get(&m.id)
                    .is_some_and(|j| j.covers(&self.skeleton.alternatives, &self.skeleton.criteria))
            })
            .map(|m| m.id.clone())
            .collect()
    }

    fn phase(&self) -> Phase {
        if self.evaluated.is_some() {
            Phase::Evaluated
        } else if self.missing_makers().is_empty() {
            Phase::Complete
        } else {
            Phase::Collecting
        }
    }

    fn snapshot(&self) -> Value {
        json!({
            "id": self.id,
            "phase": self.phase(),
            "missingMakers": self.missing_makers(),
            "runs": self.runs,
            "storedAs": self.evaluated.as_ref().map(|e| &e.stored_as),
            "result": self.evaluated.as_ref().and_then(|e| e.report.result.as_ref()),
            "problem": self.problem(),
        })
    }

    fn descriptor(&self) -> SchemeDescriptor {
        match &self.evaluated {
            Some(e) => e.descriptor,
            None => {
                let problem = self.problem();
                SchemeDescriptor::of(&problem, classify_problem(&problem).uncertainty_class)
            }
        }
    }
}

pub struct AppState {
    store: Arc<KnowledgeStore>,
    sessions: RwLock<HashMap<String, Arc<Mutex<Session>>>>,
}

impl AppState {
    pub fn new(store: KnowledgeStore) -> Arc<Self> {
        Arc::new(AppState {
            store: Arc::new(store),
            sessions: RwLock::new(HashMap::new()),
        })
    }

    pub fn store(&self) -> &KnowledgeStore {
        &self.store
    }

    fn session(&self, id: &str) -> Result<Arc<Mutex<Session>>, ApiError> {
        self.sessions
            .read()
            .expect("session table poisoned")
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, "UNKNOWN_SESSION", format!("no session {id}")))
    }
}

pub struct ApiError {
    status: StatusCode,
    body: Value,
}

impl ApiError {
    fn new(status: StatusCode, code: &str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            body: json!({"error": {"code": code, "message": message.into()}}),
        }
    }

    fn with(mut self, key: &str, value: Value) -> Self {
        self.body["error"][key] = value;
        self
    }

    fn bad_request(code: &str, message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, code, message)
    }

    fn internal(message: impl Into<String>) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "INTERNAL", message)
    }

    fn phase(message: impl Into<String>, missing: Vec<String>) -> Self {
        Self::new(StatusCode::CONFLICT, "PHASE_CONFLICT", message).with("missingMakers", json!(missing))
    }
}

impl From<gdss_core::Error> for ApiError {
    fn from(e: gdss_core::Error) -> Self {
        ApiError::bad_request(e.code(), e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        respond(self.status, &self.body)
    }
}

fn respond<T: Serialize>(status: StatusCode, body: &T) -> Response {
    (status, [(header::CONTENT_TYPE, "application/json")], render(body)).into_response()
}

type ApiResult = Result<Response, ApiError>;

fn parse_body<T: for<'de> Deserialize<'de>>(body: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request("PARSE_ERROR", e.to_string()))
}

/// Non-strict validation with the absence of whole matrices tolerated,
/// since sessions collect matrices one maker at a time.
fn check_partial(problem: &GroupProblem) -> Result<(), ApiError> {
    let report = validate_problem(problem, false);
    let errors = ValidationReport {
        violations: report
            .violations
            .into_iter()
            .filter(|v| v.severity == gdss_core::model::Severity::Error && v.code != "MISSING_MATRIX")
            .collect(),
    };
    if errors.is_clean() {
        Ok(())
    } else {
        Err(ApiError::bad_request("VALIDATION_FAILED", "problem failed validation")
            .with("violations", json!(errors.violations)))
    }
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> T + Send + 'static) -> Result<T, ApiError> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::internal(e.to_string()))
}

async fn create_session(State(state): State<Arc<AppState>>, body: Bytes) -> ApiResult {
    let file: ProblemFile = parse_body(&body)?;
    let problem = file.problem;
    check_partial(&problem)?;
    let mut skeleton = problem.clone();
    skeleton.judgments.clear();
    let id = random_token();
    let session = Session {
        id: id.clone(),
        skeleton,
        judgments: problem.judgments.into_iter().map(|m| (m.maker.clone(), m)).collect(),
        evaluated: None,
        runs: 0,
    };
    let snapshot = session.snapshot();
    state
        .sessions
        .write()
        .expect("session table poisoned")
        .insert(id, Arc::new(Mutex::new(session)));
    Ok(respond(StatusCode::CREATED, &snapshot))
}

async fn get_session(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult {
    let session = state.session(&id)?;
    let session = session.lock().await;
    Ok(respond(StatusCode::OK, &session.snapshot()))
}

async fn put_judgment(
    State(state): State<Arc<AppState>>,
    Path((id, maker)): Path<(String, String)>,
    body: Bytes,
) -> ApiResult {
    let session = state.session(&id)?;
    let mut session = session.lock().await;
    let mut value: Value = parse_body(&body)?;
    let Some(object) = value.as_object_mut() else {
        return Err(ApiError::bad_request("PARSE_ERROR", "judgment body must be a JSON object"));
    };
    match object.get("maker") {
        None => {
            object.insert("maker".into(), json!(maker));
        }
        Some(m) if m.as_str() == Some(maker.as_str()) => {}
        Some(m) => {
            return Err(ApiError::bad_request(
                "MAKER_MISMATCH",
                format!("body names maker {m} but the path names {maker}"),
            ))
        }
    }
    let matrix: DecisionMatrix =
        serde_json::from_value(value).map_err(|e| ApiError::bad_request("PARSE_ERROR", e.to_string()))?;
    if !session.skeleton.makers.iter().any(|m| m.id == maker) {
        return Err(ApiError::bad_request("UNKNOWN_MAKER", format!("no maker {maker} in session")));
    }
    let mut probe = session.skeleton.clone();
    probe.judgments = vec![matrix.clone()];
    check_partial(&probe)?;
    if session.judgments.get(&maker) != Some(&matrix) {
        session.judgments.insert(maker, matrix);
        session.evaluated = None;
    }
    Ok(respond(StatusCode::OK, &session.snapshot()))
}

async fn run_session(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult {
    let session = state.session(&id)?;
    let mut session = session.lock().await;
    let missing = session.missing_makers();
    if !missing.is_empty() {
        return Err(ApiError::phase("awaiting judgments", missing));
    }
    let problem = session.problem();
    let stored_as = format!("{}-{}", session.id, session.runs + 1);
    let store = Arc::clone(&state.store);
    let key = stored_as.clone();
    let run = blocking(move || execute(&problem, Some(&store), &key))
        .await?
        .map_err(|e| ApiError::internal(e.to_string()).with("code", json!(e.code())))?;
    let Some((method, _)) = run.committed else {
        let failure = run.report.failure().map(|s| s.payload["error"].clone()).unwrap_or(Value::Null);
        return Err(ApiError::bad_request("RUN_FAILED", "pipeline did not produce a ranking")
            .with("cause", failure)
            .with("report", json!(run.report)));
    };
    session.runs += 1;
    let body = render(&run.report);
    session.evaluated = Some(Evaluated {
        report: run.report,
        method,
        descriptor: run.descriptor,
        stored_as,
    });
    Ok((StatusCode::OK, [(header::CONTENT_TYPE, "application/json")], body).into_response())
}

fn require_evaluated(session: &Session) -> Result<&Evaluated, ApiError> {
    session
        .evaluated
        .as_ref()
        .ok_or_else(|| ApiError::phase("session has not been run", session.missing_makers()))
}

async fn get_result(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult {
    let session = state.session(&id)?;
    let session = session.lock().await;
    let evaluated = require_evaluated(&session)?;
    Ok(respond(StatusCode::OK, &evaluated.report.result))
}

async fn get_consensus(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult {
    let session = state.session(&id)?;
    let session = session.lock().await;
    let method = require_evaluated(&session)?.method;
    let problem = session.problem();
    let report = blocking(move || {
        consensus(&problem, method, &MethodOptions::default(), &ConsensusConfig::default())
    })
    .await??;
    Ok(respond(StatusCode::OK, &report))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct WhatIfRequest {
    criterion: String,
    delta: f64,
    #[serde(default)]
    method: Option<MethodId>,
}

async fn post_whatif(State(state): State<Arc<AppState>>, Path(id): Path<String>, body: Bytes) -> ApiResult {
    let request: WhatIfRequest = parse_body(&body)?;
    let session = state.session(&id)?;
    let session = session.lock().await;
    let method = request.method.unwrap_or(require_evaluated(&session)?.method);
    let problem = session.problem();
    let result = blocking(move || {
        whatif_weights(&problem, method, &request.criterion, request.delta, &MethodOptions::default())
    })
    .await??;
    Ok(respond(StatusCode::OK, &result))
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase")]
struct SimilarQuery {
    similar_to: Option<String>,
    k: Option<usize>,
}

async fn get_schemes(State(state): State<Arc<AppState>>, Query(query): Query<SimilarQuery>) -> ApiResult {
    let Some(id) = query.similar_to else {
        return Err(ApiError::bad_request("MISSING_PARAMETER", "similarTo is required"));
    };
    let descriptor = state.session(&id)?.lock().await.descriptor();
    let k = query.k.unwrap_or(5);
    let schemes = state.store.similar(&descriptor, k);
    Ok(respond(
        StatusCode::OK,
        &json!({"similarTo": id, "descriptor": descriptor, "schemes": schemes}),
    ))
}

async fn not_found() -> Response {
    ApiError::new(StatusCode::NOT_FOUND, "NOT_FOUND", "no such route").into_response()
}

pub fn router(state: Arc<AppState>, ui: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/api/sessions", post(create_session))
        .route("/api/sessions/{id}", get(get_session))
        .route("/api/sessions/{id}/judgments/{maker}", put(put_judgment))
        .route("/api/sessions/{id}/run", post(run_session))
        .route("/api/sessions/{id}/result", get(get_result))
        .route("/api/sessions/{id}/consensus", get(get_consensus))
        .route("/api/sessions/{id}/whatif", post(post_whatif))
        .route("/api/schemes", get(get_schemes))
        .with_state(state);
    match ui {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api.fallback(not_found),
    }
}
