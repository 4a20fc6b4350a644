//! JSON service over the engine. Reasoner endpoints are stateless; goal,
//! reject and accept touch session state, and only accept moves the robot.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;
use serde_json::{json, Value};
use tokio::sync::Mutex;

use semnav_core::bench::{compare_outcomes, parse_cases, run_suite};
use semnav_core::kb::reference;
use semnav_core::planner::{resolve, Next, PlanError, PlanSession};
use semnav_core::world::{Cell, GridWorld};
use semnav_core::{EntityName, ErrorKind, Method, Reasoner, ReasonerError, ReasonerResult};

use crate::{BackendChoice, Engine};

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    kind: String,
    subject: String,
}

impl ApiError {
    fn bad(kind: impl Into<String>, subject: impl Into<String>) -> Self {
        Self {
            status: StatusCode::BAD_REQUEST,
            kind: kind.into(),
            subject: subject.into(),
        }
    }

    fn not_found(kind: impl Into<String>, subject: impl Into<String>) -> Self {
        Self {
            status: StatusCode::NOT_FOUND,
            kind: kind.into(),
            subject: subject.into(),
        }
    }
}

impl From<ReasonerError> for ApiError {
    fn from(e: ReasonerError) -> Self {
        ApiError::bad(e.kind.to_string(), e.subject)
    }
}

impl From<PlanError> for ApiError {
    fn from(e: PlanError) -> Self {
        match e {
            PlanError::Reasoner(r) => r.into(),
            PlanError::UnknownEntity(name) => ApiError::bad("UnknownEntity", name),
            PlanError::AmbiguousRequest { ref name, .. } => {
                ApiError::bad("AmbiguousRequest", name.canonical())
            }
            PlanError::UnknownOrdinal(n) => ApiError::bad("UnknownOrdinal", n.to_string()),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = json!({ "error": { "kind": self.kind, "subject": self.subject } });
        (self.status, Json(body)).into_response()
    }
}

type ApiResult = Result<Json<Value>, ApiError>;

pub struct AppState {
    engine: Engine,
    backend: BackendChoice,
    repetitions: usize,
    /// Single writer for robot moves.
    world: Mutex<GridWorld>,
    sessions: std::sync::Mutex<HashMap<String, Arc<Mutex<PlanSession>>>>,
    next_id: AtomicU64,
}

impl AppState {
    /// `backend` is the default for requests that do not name one and must
    /// be a single backend.
    pub fn new(engine: Engine, world: GridWorld, backend: BackendChoice, repetitions: usize) -> Self {
        assert!(
            backend != BackendChoice::Both,
            "the service needs a single default backend"
        );
        Self {
            engine,
            backend,
            repetitions,
            world: Mutex::new(world),
            sessions: Default::default(),
            next_id: AtomicU64::new(1),
        }
    }

    fn session(&self, id: &str) -> Result<Arc<Mutex<PlanSession>>, ApiError> {
        self.sessions
            .lock()
            .expect("session table poisoned")
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::not_found("UnknownSession", id))
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/api/state", get(world_state))
        .route("/api/kb/methods", get(methods))
        .route("/api/kb/query", get(query))
        .route("/api/goal", post(goal))
        .route("/api/session/:id/reject", post(reject))
        .route("/api/session/:id/accept", post(accept))
        .route("/api/bench", get(bench))
        .with_state(state)
}

/// Binds `addr` and serves until interrupted.
pub async fn serve(state: Arc<AppState>, addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}

fn parse_backend(raw: Option<&str>, default: BackendChoice) -> Result<BackendChoice, ApiError> {
    match raw {
        None | Some("") => Ok(default),
        Some("relational") => Ok(BackendChoice::Relational),
        Some("ontology") => Ok(BackendChoice::Ontology),
        Some("both") => Ok(BackendChoice::Both),
        Some(other) => Err(ApiError::bad("UnknownBackend", other)),
    }
}

fn single<'a>(state: &'a AppState, raw: Option<&str>) -> Result<&'a dyn Reasoner, ApiError> {
    let choice = parse_backend(raw, state.backend)?;
    state
        .engine
        .reasoner(choice)
        .ok_or_else(|| ApiError::bad("UnknownBackend", "both"))
}

fn result_json(result: &ReasonerResult) -> Value {
    let answers: Vec<Value> = result
        .iter()
        .map(|(answer, chain)| json!({ "answer": answer, "chain": chain }))
        .collect();
    json!({ "backend": result.backend, "answers": answers })
}

async fn world_state(State(state): State<Arc<AppState>>) -> Json<Value> {
    let world = state.world.lock().await;
    Json(json!(world.state()))
}

async fn methods() -> Json<Value> {
    let list: Vec<Value> = Method::ALL
        .iter()
        .map(|m| json!({ "id": m.id(), "label": m.label(), "input": m.input() }))
        .collect();
    Json(Value::Array(list))
}

#[derive(Debug, Deserialize)]
pub struct QueryParams {
    method: String,
    #[serde(default)]
    input: String,
    backend: Option<String>,
}

async fn query(State(state): State<Arc<AppState>>, Query(params): Query<QueryParams>) -> ApiResult {
    let method = Method::from_id(&params.method)
        .ok_or_else(|| ApiError::not_found("UnknownMethod", params.method.clone()))?;
    let inputs = params
        .input
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| EntityName::new(s).map_err(|_| ReasonerError::new(ErrorKind::UnknownEntity, s)))
        .collect::<Result<Vec<_>, _>>()?;
    let choice = parse_backend(params.backend.as_deref(), state.backend)?;
    if let Some(reasoner) = state.engine.reasoner(choice) {
        let result = reasoner.run_method(method, &inputs)?;
        let mut body = result_json(&result);
        body["method"] = json!(method);
        return Ok(Json(body));
    }
    let outcomes: Vec<_> = state
        .engine
        .both()
        .iter()
        .map(|r| (r.backend(), r.run_method(method, &inputs)))
        .collect();
    let equal = compare_outcomes(&outcomes[0].1, &outcomes[1].1);
    let results: Vec<Value> = outcomes
        .iter()
        .map(|(backend, outcome)| match outcome {
            Ok(result) => result_json(result),
            Err(e) => {
                json!({ "backend": backend, "error": { "kind": e.kind.to_string(), "subject": e.subject } })
            }
        })
        .collect();
    Ok(Json(
        json!({ "method": method, "results": results, "equal": equal }),
    ))
}

#[derive(Debug, Deserialize)]
pub struct GoalBody {
    request: String,
    backend: Option<String>,
}

#[derive(Debug, Deserialize)]
pub struct OrdinalBody {
    ordinal: usize,
}

fn next_json(id: &str, session: &mut PlanSession) -> Value {
    match session.next_proposal() {
        Next::Proposal(p) => json!({ "session": id, "proposal": p }),
        Next::Exhausted => json!({
            "session": id,
            "exhausted": true,
            "unrealizable": session.unrealizable(),
        }),
    }
}

async fn goal(State(state): State<Arc<AppState>>, Json(body): Json<GoalBody>) -> ApiResult {
    let reasoner = single(&state, body.backend.as_deref())?;
    let mut session = resolve(&body.request, &state.engine.kb, reasoner)?;
    let id = format!("s{}", state.next_id.fetch_add(1, Ordering::Relaxed));
    let reply = next_json(&id, &mut session);
    state
        .sessions
        .lock()
        .expect("session table poisoned")
        .insert(id, Arc::new(Mutex::new(session)));
    Ok(Json(reply))
}

async fn reject(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    Json(body): Json<OrdinalBody>,
) -> ApiResult {
    let session = state.session(&id)?;
    let mut session = session.lock().await;
    session.reject(body.ordinal)?;
    Ok(Json(next_json(&id, &mut session)))
}

async fn accept(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    Json(body): Json<OrdinalBody>,
) -> ApiResult {
    let session = state.session(&id)?;
    let mut session = session.lock().await;
    let mut world = state.world.lock().await;
    let destination = session.open(body.ordinal)?.destination.clone();
    let trajectory = world
        .plan_path(&destination)
        .map_err(|e| ApiError::bad(e.kind(), destination.canonical()))?;
    let cells: Vec<Cell> = world
        .execute(&trajectory)
        .map_err(|e| ApiError::bad(e.kind(), destination.canonical()))?;
    session.accept(body.ordinal)?;
    Ok(Json(json!({
        "session": id,
        "destination": destination,
        "trajectory": cells,
        "robot": world.robot(),
        "arrived_in": world.region_of(world.robot()),
    })))
}

#[derive(Debug, Deserialize)]
pub struct BenchParams {
    reps: Option<usize>,
}

async fn bench(State(state): State<Arc<AppState>>, Query(params): Query<BenchParams>) -> ApiResult {
    let reps = params.reps.unwrap_or(state.repetitions);
    let cases = parse_cases(reference::REFERENCE_CASES, reps)
        .map_err(|e| ApiError::bad("InvalidRepetitions", e.to_string()))?;
    let engine = state.engine.clone();
    let report = tokio::task::spawn_blocking(move || run_suite(&cases, &engine.kb, &engine.both()))
        .await
        .map_err(|e| ApiError {
            status: StatusCode::INTERNAL_SERVER_ERROR,
            kind: "Internal".into(),
            subject: e.to_string(),
        })?;
    let mut body = json!(report);
    body["all_equal"] = json!(report.all_equal());
    Ok(Json(body))
}
