//! `/v1` JSON API over alignment sessions, plus the static workbench route.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU32, Ordering};
use std::sync::{Arc, RwLock};

use alignforge::engine::{classify_expressibility, node_text, Action, Correspondence, MoveKind, Phase, Side};
use alignforge::error::Error;
use alignforge::rdf::Iri;
use alignforge::rules::{check, parse_rules};
use alignforge::session::Workspace;
use alignforge::taxonomy::Direction;
use alignforge::term::PropertyTerm;
use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{Html, IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tower_http::services::ServeDir;

use crate::{decision_from_parts, now};

#[derive(Debug, Serialize)]
pub struct ApiError {
    #[serde(skip)]
    status: StatusCode,
    pub code: String,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub location: Option<Value>,
}

impl ApiError {
    fn new(status: StatusCode, code: &str, message: impl Into<String>) -> Self {
        ApiError { status, code: code.into(), message: message.into(), location: None }
    }

    fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "bad_request", message)
    }

    fn not_found(message: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, "not_found", message)
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::UnknownCandidate(_) => StatusCode::NOT_FOUND,
            Error::IllegalTransition(_) | Error::TrivialAccept(_) | Error::IllegalMove(_) => StatusCode::CONFLICT,
            Error::Io { .. } => StatusCode::INTERNAL_SERVER_ERROR,
            _ => StatusCode::UNPROCESSABLE_ENTITY,
        };
        let location = match &e {
            Error::Syntax { line, column, .. } => Some(json!({ "line": line, "column": column })),
            Error::MalformedTerm { offset, .. } => Some(json!({ "offset": offset })),
            Error::Rule { line, .. } | Error::SessionLog { line, .. } => Some(json!({ "line": line })),
            _ => None,
        };
        ApiError { status, code: e.code().into(), message: e.to_string(), location }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(&self)).into_response()
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;

type Session = Arc<RwLock<Workspace>>;

pub struct AppState {
    template: Workspace,
    sessions: RwLock<BTreeMap<u32, Session>>,
    next_id: AtomicU32,
    log_dir: Option<PathBuf>,
    static_dir: Option<PathBuf>,
}

impl AppState {
    /// `template` is the workspace each new session starts from. With a
    /// `log_dir`, every session persists its log to `session-<id>.jsonl`.
    pub fn new(template: Workspace, log_dir: Option<PathBuf>, static_dir: Option<PathBuf>) -> Arc<Self> {
        Arc::new(AppState {
            template,
            sessions: RwLock::new(BTreeMap::new()),
            next_id: AtomicU32::new(1),
            log_dir,
            static_dir,
        })
    }

    /// Registers an already-prepared workspace as a session.
    pub fn adopt(&self, ws: Workspace) -> u32 {
        let id = self.next_id.fetch_add(1, Ordering::SeqCst);
        self.sessions.write().unwrap().insert(id, Arc::new(RwLock::new(ws)));
        id
    }

    fn session(&self, id: u32) -> Result<Session, ApiError> {
        self.sessions
            .read()
            .unwrap()
            .get(&id)
            .cloned()
            .ok_or_else(|| ApiError::not_found(format!("unknown session {id}")))
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    let api = Router::new()
        .route("/ontology/classes", get(classes))
        .route("/ontology/neighbors", get(neighbors))
        .route("/session", post(create_session))
        .route("/session/{id}/candidates", get(candidates))
        .route("/session/{id}/candidate/{cid}/validity", get(validity))
        .route("/session/{id}/candidate/{cid}/moves", get(moves))
        .route("/session/{id}/candidate/{cid}/expressibility", get(expressibility))
        .route("/session/{id}/decide", post(decide))
        .route("/session/{id}/alignment", get(alignment))
        .route("/session/{id}/log", get(session_log))
        .route("/eval", post(eval))
        .route("/rules/check", post(rules_check));
    let app = Router::new().nest("/v1", api);
    let app = match &state.static_dir {
        Some(dir) => app.fallback_service(ServeDir::new(dir)),
        None => app.route("/", get(index)),
    };
    app.with_state(state)
}

pub async fn serve(state: Arc<AppState>, port: u16) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(("127.0.0.1", port)).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(state)).await
}

async fn index() -> Html<&'static str> {
    Html("<!doctype html><title>alignforge</title><p>alignforge service. The JSON API lives under <code>/v1</code>.</p>\n")
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct ClassView {
    iri: String,
    label: String,
    side: Option<&'static str>,
    parents: Vec<String>,
}

fn side_name(ws: &Workspace, iri: &Iri) -> Option<&'static str> {
    if ws.ctx.on_side(iri, Side::Target) {
        Some("target")
    } else if ws.ctx.on_side(iri, Side::Source) {
        Some("source")
    } else {
        None
    }
}

async fn classes(State(st): State<Arc<AppState>>) -> Json<Vec<ClassView>> {
    let ws = &st.template;
    let l = &ws.ctx.taxonomy.classes;
    let p = &ws.ctx.prefixes;
    Json(
        l.iris()
            .map(|i| ClassView {
                iri: i.as_str().into(),
                label: p.display(i),
                side: side_name(ws, i),
                parents: l.neighbors(i, Direction::Up).iter().map(|u| p.display(u)).collect(),
            })
            .collect(),
    )
}

#[derive(Deserialize)]
struct NeighborQuery {
    iri: String,
    #[serde(default)]
    kind: Option<String>,
}

async fn neighbors(State(st): State<Arc<AppState>>, Query(q): Query<NeighborQuery>) -> ApiResult<Value> {
    let ws = &st.template;
    let p = &ws.ctx.prefixes;
    let iri =
        if q.iri.contains("://") || q.iri.starts_with("urn:") { Iri::new(&q.iri) } else { p.expand_curie(&q.iri)? };
    let t = &ws.ctx.taxonomy;
    let lattice = if t.is_class(&iri) {
        &t.classes
    } else if t.is_property(&iri) {
        t.property_lattice(&iri)
    } else {
        return Err(ApiError::not_found(format!("{} is not in the taxonomy", q.iri)));
    };
    let show = |v: Vec<Iri>| v.iter().map(|i| p.display(i)).collect::<Vec<_>>();
    let up = show(lattice.neighbors(&iri, Direction::Up));
    let down = show(lattice.neighbors(&iri, Direction::Down));
    Ok(Json(match q.kind.as_deref() {
        None => json!({ "iri": p.display(&iri), "up": up, "down": down }),
        Some("up") => json!({ "iri": p.display(&iri), "up": up }),
        Some("down") => json!({ "iri": p.display(&iri), "down": down }),
        Some(k) => return Err(ApiError::bad_request(format!("kind must be up or down, not {k}"))),
    }))
}

#[derive(Deserialize, Default)]
struct NewSession {
    #[serde(default)]
    log: Option<String>,
}

async fn create_session(State(st): State<Arc<AppState>>, body: Bytes) -> Result<(StatusCode, Json<Value>), ApiError> {
    let req: NewSession = if body.iter().all(u8::is_ascii_whitespace) {
        NewSession::default()
    } else {
        serde_json::from_slice(&body).map_err(|e| ApiError::bad_request(e.to_string()))?
    };
    let mut ws = st.template.restart();
    if let Some(log) = &req.log {
        ws.replay(log)?;
    }
    let id = st.next_id.fetch_add(1, Ordering::SeqCst);
    if let Some(dir) = &st.log_dir {
        let path = dir.join(format!("session-{id}.jsonl"));
        std::fs::write(&path, ws.log_jsonl()).map_err(|e| Error::Io { path: path.clone(), source: e })?;
        ws.persist_to(path);
    }
    let n = ws.candidates.len();
    st.sessions.write().unwrap().insert(id, Arc::new(RwLock::new(ws)));
    Ok((StatusCode::CREATED, Json(json!({ "id": id, "candidates": n }))))
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct CandidateView<'a> {
    #[serde(flatten)]
    c: &'a Correspondence,
    sigma_text: String,
    tau_text: String,
    text: String,
}

fn view<'a>(ws: &Workspace, c: &'a Correspondence) -> CandidateView<'a> {
    let p = &ws.ctx.prefixes;
    CandidateView { c, sigma_text: c.sigma.to_text(p), tau_text: c.tau.to_text(p), text: c.to_text(p) }
}

async fn candidates(State(st): State<Arc<AppState>>, Path(id): Path<u32>) -> ApiResult<Value> {
    let s = st.session(id)?;
    let ws = s.read().unwrap();
    let views: Vec<_> = ws.candidates.iter().map(|c| view(&ws, c)).collect();
    Ok(Json(json!({ "candidates": views, "warnings": ws.warnings })))
}

async fn validity(State(st): State<Arc<AppState>>, Path((id, cid)): Path<(u32, u32)>) -> ApiResult<Value> {
    let s = st.session(id)?;
    let ws = s.read().unwrap();
    Ok(Json(serde_json::to_value(ws.check(cid)?).expect("serializable")))
}

#[derive(Deserialize)]
struct PhaseQuery {
    #[serde(default)]
    phase: Option<String>,
}

async fn moves(
    State(st): State<Arc<AppState>>,
    Path((id, cid)): Path<(u32, u32)>,
    Query(q): Query<PhaseQuery>,
) -> ApiResult<Value> {
    let phase = match q.phase.as_deref() {
        None | Some("relax") => Phase::Relax,
        Some("strengthen") => Phase::Strengthen,
        Some(p) => return Err(ApiError::bad_request(format!("phase must be relax or strengthen, not {p}"))),
    };
    let s = st.session(id)?;
    let ws = s.read().unwrap();
    Ok(Json(serde_json::to_value(ws.suggest(cid, phase)?).expect("serializable")))
}

async fn expressibility(State(st): State<Arc<AppState>>, Path((id, cid)): Path<(u32, u32)>) -> ApiResult<Value> {
    let s = st.session(id)?;
    let ws = s.read().unwrap();
    let c = ws.candidate(cid)?;
    Ok(Json(serde_json::to_value(classify_expressibility(c, &ws.ctx.taxonomy)).expect("serializable")))
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct DecideRequest {
    candidate: u32,
    action: Action,
    #[serde(default)]
    move_kind: Option<MoveKind>,
    #[serde(default)]
    term_text: Option<String>,
    #[serde(default)]
    reason: Option<String>,
}

async fn decide(
    State(st): State<Arc<AppState>>,
    Path(id): Path<u32>,
    Json(req): Json<DecideRequest>,
) -> ApiResult<Value> {
    let d = decision_from_parts(req.action, req.move_kind, req.term_text, req.reason).map_err(ApiError::bad_request)?;
    let s = st.session(id)?;
    let mut ws = s.write().unwrap();
    let c = ws.decide(req.candidate, &d, now())?.clone();
    Ok(Json(serde_json::to_value(view(&ws, &c)).expect("serializable")))
}

async fn alignment(State(st): State<Arc<AppState>>, Path(id): Path<u32>) -> ApiResult<Value> {
    let s = st.session(id)?;
    let ws = s.read().unwrap();
    let a = ws.alignment()?;
    let (ttl, rules) = ws.artifacts()?;
    let rejected: Vec<_> = a.rejected.iter().map(|(id, why)| json!({ "id": id, "reason": why })).collect();
    Ok(Json(json!({
        "ttl": ttl,
        "rules": rules,
        "statements": a.owl.len(),
        "ruleRequired": a.rule_required,
        "rejected": rejected,
    })))
}

async fn session_log(State(st): State<Arc<AppState>>, Path(id): Path<u32>) -> Result<String, ApiError> {
    let s = st.session(id)?;
    let ws = s.read().unwrap();
    Ok(ws.log_jsonl())
}

#[derive(Deserialize)]
struct EvalRequest {
    term: String,
    #[serde(default)]
    pair: Option<String>,
    #[serde(default)]
    side: Option<String>,
}

async fn eval(State(st): State<Arc<AppState>>, Json(req): Json<EvalRequest>) -> ApiResult<Value> {
    let ws = &st.template;
    let p = &ws.ctx.prefixes;
    let term = PropertyTerm::parse(&req.term, p)?;
    let target = match req.side.as_deref() {
        None | Some("source") => false,
        Some("target") => true,
        Some(s) => return Err(ApiError::bad_request(format!("side must be source or target, not {s}"))),
    };
    let mut out = Vec::new();
    for pair in ws.ctx.pairs.iter().filter(|x| req.pair.as_ref().is_none_or(|n| *n == x.name)) {
        let g = if target { &pair.target } else { &pair.source };
        let ext: Vec<_> =
            g.eval(&term, &ws.ctx.taxonomy).iter().map(|(a, b)| [node_text(a, p), node_text(b, p)]).collect();
        out.push(json!({ "pair": pair.name, "pairs": ext }));
    }
    if out.is_empty() {
        return Err(ApiError::not_found(format!("no scenario pair {}", req.pair.unwrap_or_default())));
    }
    Ok(Json(json!({ "term": term.to_text(p), "results": out })))
}

#[derive(Deserialize)]
struct RulesRequest {
    rules: String,
    #[serde(default)]
    pair: Option<String>,
}

async fn rules_check(State(st): State<Arc<AppState>>, Json(req): Json<RulesRequest>) -> ApiResult<Value> {
    let ws = &st.template;
    let p = &ws.ctx.prefixes;
    let rules = parse_rules(&req.rules, p)?;
    let mut out = Vec::new();
    for pair in ws.ctx.pairs.iter().filter(|x| req.pair.as_ref().is_none_or(|n| *n == x.name)) {
        let g = pair.source.merge(&pair.target);
        for r in &rules {
            let m = check(r, &g, &ws.ctx.taxonomy);
            let violated: Vec<BTreeMap<&str, String>> =
                m.violated().map(|b| b.iter().map(|(k, v)| (k.as_str(), node_text(v, p))).collect()).collect();
            out.push(json!({ "pair": pair.name, "rule": r.name, "bindings": m.bindings.len(), "violated": violated }));
        }
    }
    Ok(Json(json!({ "results": out })))
}
