//! HTTP/JSON service over a directory-backed workspace of knowledge bases.
//!
//! Each KB is stored as `<kb_id>.tcl` next to one `index.json` holding names
//! and revision lineage. `kb_id` is a prefix of the SHA-256 of the source.

use std::collections::HashMap;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};
use std::time::{SystemTime, UNIX_EPOCH};

use axum::extract::{Path as UrlPath, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use tcl_core::revision::RevisionError;
use tcl_core::scenario::parse_bits;
use tcl_core::text::{parse_concept_assertion, parse_facts};
use tcl_core::{
    build_revised_kb, categorization_score, infer_compound, parse_concept, parse_kb, query_probability,
    serialize_kb, validate, Combination, ConceptExpr, KnowledgeBase, ParseError, Probability, Rank,
    RationalClosure, RevisedKB, ScenarioError, ScenarioStatus,
};

use crate::exec::Parallel;
use crate::output::{combine_json, rational_json};
use crate::{cli::DEFAULT_PRIOR, combination_spec};

const ID_LEN: usize = 16;
const INDEX: &str = "index.json";

pub fn kb_id(source: &str) -> String {
    let digest = Sha256::digest(source.as_bytes());
    hex::encode(digest)[..ID_LEN].to_string()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Entry {
    pub kb_id: String,
    pub name: String,
    pub parent: Option<String>,
    pub created_at: u64,
    /// Compound concept of a revision, in concept syntax.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compound: Option<String>,
}

#[derive(Default, Serialize, Deserialize)]
struct Index {
    entries: Vec<Entry>,
}

pub struct Workspace {
    dir: PathBuf,
    entries: Vec<Entry>,
}

impl Workspace {
    pub fn open(dir: impl Into<PathBuf>) -> io::Result<Self> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir)?;
        let path = dir.join(INDEX);
        let entries = if path.exists() {
            let index: Index = serde_json::from_str(&std::fs::read_to_string(&path)?)
                .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))?;
            index.entries
        } else {
            Vec::new()
        };
        Ok(Workspace { dir, entries })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    pub fn get(&self, id: &str) -> Option<&Entry> {
        self.entries.iter().find(|e| e.kb_id == id)
    }

    pub fn source(&self, id: &str) -> io::Result<String> {
        std::fs::read_to_string(self.dir.join(format!("{}.tcl", id)))
    }

    /// Stores `source`; returns the entry and whether it is new.
    pub fn add(
        &mut self,
        name: &str,
        source: &str,
        parent: Option<&str>,
        compound: Option<String>,
    ) -> io::Result<(Entry, bool)> {
        let id = kb_id(source);
        if let Some(e) = self.get(&id) {
            return Ok((e.clone(), false));
        }
        std::fs::write(self.dir.join(format!("{}.tcl", id)), source)?;
        let created_at = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        let entry = Entry {
            kb_id: id,
            name: name.to_string(),
            parent: parent.map(String::from),
            created_at,
            compound,
        };
        self.entries.push(entry.clone());
        self.save()?;
        Ok((entry, true))
    }

    fn save(&self) -> io::Result<()> {
        let index = Index { entries: self.entries.clone() };
        let tmp = self.dir.join(format!("{}.tmp", INDEX));
        std::fs::write(&tmp, serde_json::to_string_pretty(&index).expect("serializable"))?;
        std::fs::rename(tmp, self.dir.join(INDEX))
    }

    /// Ancestors from the root down to `id`.
    pub fn lineage(&self, id: &str) -> Vec<Entry> {
        let mut chain = Vec::new();
        let mut cur = self.get(id);
        while let Some(e) = cur {
            if chain.iter().any(|c: &Entry| c.kb_id == e.kb_id) {
                break;
            }
            chain.push(e.clone());
            cur = e.parent.as_deref().and_then(|p| self.get(p));
        }
        chain.reverse();
        chain
    }
}

pub struct AppState {
    workspace: RwLock<Workspace>,
    max_inclusions: usize,
}

impl AppState {
    pub fn new(workspace: Workspace, max_inclusions: usize) -> Arc<Self> {
        Arc::new(AppState { workspace: RwLock::new(workspace), max_inclusions })
    }
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    body: Value,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        ApiError { status, body: json!({ "error": message.into() }) }
    }

    fn not_found(id: &str) -> Self {
        ApiError::new(StatusCode::NOT_FOUND, format!("unknown knowledge base {}", id))
    }

    fn unprocessable(message: impl Into<String>) -> Self {
        ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, message)
    }

    fn internal(e: impl std::fmt::Display) -> Self {
        ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string())
    }
}

impl From<ParseError> for ApiError {
    fn from(e: ParseError) -> Self {
        ApiError {
            status: StatusCode::UNPROCESSABLE_ENTITY,
            body: json!({
                "error": e.message,
                "line": e.line,
                "column": e.column,
                "snippet": e.snippet,
            }),
        }
    }
}

impl From<ScenarioError> for ApiError {
    fn from(e: ScenarioError) -> Self {
        match e {
            ScenarioError::SizeLimit { .. } => ApiError::new(StatusCode::PAYLOAD_TOO_LARGE, e.to_string()),
            ScenarioError::NotSelected => ApiError::new(StatusCode::CONFLICT, e.to_string()),
            _ => ApiError::unprocessable(e.to_string()),
        }
    }
}

impl From<RevisionError> for ApiError {
    fn from(e: RevisionError) -> Self {
        match e {
            RevisionError::NotSelected => ApiError::new(StatusCode::CONFLICT, e.to_string()),
            RevisionError::Scenario(s) => s.into(),
            _ => ApiError::unprocessable(e.to_string()),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

fn load(state: &AppState, id: &str) -> ApiResult<(Entry, KnowledgeBase)> {
    let ws = state.workspace.read().expect("workspace lock");
    let entry = ws.get(id).cloned().ok_or_else(|| ApiError::not_found(id))?;
    let source = ws.source(id).map_err(ApiError::internal)?;
    drop(ws);
    Ok((entry, parse_kb(&source)?))
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> ApiResult<T> + Send + 'static) -> ApiResult<T> {
    tokio::task::spawn_blocking(f).await.map_err(ApiError::internal)?
}

fn revised(entry: &Entry, kb: KnowledgeBase, compound: Option<&str>) -> ApiResult<RevisedKB> {
    let compound = match compound.or(entry.compound.as_deref()) {
        Some(c) => parse_concept(c)?,
        None => infer_compound(&kb)
            .ok_or_else(|| ApiError::unprocessable("cannot infer the compound concept; pass \"compound\""))?,
    };
    Ok(RevisedKB::from_kb(kb, compound))
}

/// Accepts a JSON string or number holding an exact decimal.
fn probability(v: &Value) -> ApiResult<Probability> {
    let text = match v {
        Value::String(s) => s.clone(),
        Value::Number(n) => n.to_string(),
        _ => return Err(ApiError::unprocessable("probability must be a string or number")),
    };
    Probability::parse(&text).map_err(|e| ApiError::unprocessable(format!("probability {}: {}", text, e)))
}

#[derive(Deserialize)]
struct CreateBody {
    name: String,
    source: String,
}

async fn create(State(state): State<Arc<AppState>>, Json(body): Json<CreateBody>) -> ApiResult<Response> {
    let kb = parse_kb(&body.source)?;
    let mut warnings: Vec<String> = validate(&kb).iter().map(|v| v.to_string()).collect();
    if kb.is_empty() {
        warnings.push("knowledge base is empty".into());
    }
    let (entry, created) = state
        .workspace
        .write()
        .expect("workspace lock")
        .add(&body.name, &body.source, None, None)
        .map_err(ApiError::internal)?;
    let status = if created { StatusCode::CREATED } else { StatusCode::OK };
    Ok((status, Json(json!({ "kb_id": entry.kb_id, "warnings": warnings }))).into_response())
}

async fn list(State(state): State<Arc<AppState>>) -> Json<Value> {
    let ws = state.workspace.read().expect("workspace lock");
    Json(json!({ "entries": ws.entries() }))
}

async fn fetch(State(state): State<Arc<AppState>>, UrlPath(id): UrlPath<String>) -> ApiResult<Json<Value>> {
    let (entry, kb) = load(&state, &id)?;
    Ok(Json(json!({ "entry": entry, "kb": serialize_kb(&kb) })))
}

async fn lineage(State(state): State<Arc<AppState>>, UrlPath(id): UrlPath<String>) -> ApiResult<Json<Value>> {
    let ws = state.workspace.read().expect("workspace lock");
    if ws.get(&id).is_none() {
        return Err(ApiError::not_found(&id));
    }
    Ok(Json(json!({ "lineage": ws.lineage(&id) })))
}

#[derive(Deserialize)]
struct CombineBody {
    head: String,
    modifiers: Vec<String>,
    exactly_k: Option<usize>,
    #[serde(default)]
    include_all: bool,
    compound: Option<String>,
}

async fn combine(
    State(state): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
    Json(body): Json<CombineBody>,
) -> ApiResult<Json<Value>> {
    let (_, kb) = load(&state, &id)?;
    let max = state.max_inclusions;
    blocking(move || {
        let spec = combination_spec(&body.head, &body.modifiers, body.exactly_k, max, body.compound.as_deref())?;
        let result = Combination::new(&kb, &spec)?.select(&Parallel);
        Ok(Json(combine_json(&result, body.include_all)))
    })
    .await
}

#[derive(Deserialize)]
struct ReviseBody {
    head: String,
    modifiers: Vec<String>,
    scenario_bits: String,
    alias: Option<String>,
    exactly_k: Option<usize>,
    compound: Option<String>,
    name: Option<String>,
}

async fn revise(
    State(state): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
    Json(body): Json<ReviseBody>,
) -> ApiResult<Response> {
    let (entry, kb) = load(&state, &id)?;
    let max = state.max_inclusions;
    let (source, compound, alias) = blocking(move || {
        let spec = combination_spec(&body.head, &body.modifiers, body.exactly_k, max, body.compound.as_deref())?;
        let result = Combination::new(&kb, &spec)?.select(&Parallel);
        let bits = parse_bits(&body.scenario_bits)
            .ok_or_else(|| ApiError::unprocessable(format!("{:?} is not a bit string", body.scenario_bits)))?;
        let chosen = result
            .find(&bits)
            .filter(|r| r.status == ScenarioStatus::Selected)
            .ok_or(ScenarioError::NotSelected)?;
        let rev = build_revised_kb(&kb, &spec, chosen, body.alias.as_deref())?;
        Ok((serialize_kb(&rev.kb), rev.compound.to_string(), body.alias.or(body.name)))
    })
    .await?;
    let name = alias.unwrap_or_else(|| format!("{} revised", entry.name));
    let (child, _) = state
        .workspace
        .write()
        .expect("workspace lock")
        .add(&name, &source, Some(&entry.kb_id), Some(compound))
        .map_err(ApiError::internal)?;
    Ok((StatusCode::CREATED, Json(json!({ "kb_id": child.kb_id }))).into_response())
}

#[derive(Deserialize)]
struct QueryBody {
    assertion: String,
    prior: Value,
    compound: Option<String>,
}

async fn query(
    State(state): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
    Json(body): Json<QueryBody>,
) -> ApiResult<Json<Value>> {
    let (entry, kb) = load(&state, &id)?;
    blocking(move || {
        let rev = revised(&entry, kb, body.compound.as_deref())?;
        let (c, a) = parse_concept_assertion(&body.assertion)?;
        let p = query_probability(&rev, &c, &a, &probability(&body.prior)?)?;
        Ok(Json(json!({ "probability": rational_json(p.value()) })))
    })
    .await
}

#[derive(Deserialize)]
struct ScoreBody {
    individual: String,
    candidate: String,
    /// Lines in facts-file syntax, `[<prior> ::] <concept>(<individual>)`.
    facts: Vec<String>,
    prior: Option<Value>,
    compound: Option<String>,
}

async fn score(
    State(state): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
    Json(body): Json<ScoreBody>,
) -> ApiResult<Json<Value>> {
    let (entry, kb) = load(&state, &id)?;
    blocking(move || {
        let rev = revised(&entry, kb, body.compound.as_deref())?;
        let default = match &body.prior {
            Some(v) => probability(v)?,
            None => Probability::parse(DEFAULT_PRIOR).expect("valid default"),
        };
        let mut facts = Vec::new();
        for (p, c, a) in parse_facts(&body.facts.join("\n"))? {
            if a != body.individual {
                return Err(ApiError::unprocessable(format!("fact about {} does not concern {}", a, body.individual)));
            }
            facts.push((c, p.unwrap_or_else(|| default.clone())));
        }
        let candidate: ConceptExpr = parse_concept(&body.candidate)?;
        let total = categorization_score(&rev, &candidate, &body.individual, &facts)?;
        Ok(Json(json!({ "score": rational_json(&total) })))
    })
    .await
}

async fn rank(
    State(state): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
    Query(params): Query<HashMap<String, String>>,
) -> ApiResult<Json<Value>> {
    let (_, kb) = load(&state, &id)?;
    let text = params.get("concept").cloned().ok_or_else(|| ApiError::unprocessable("missing concept"))?;
    blocking(move || {
        let c = parse_concept(&text)?;
        let r = match RationalClosure::new(&kb).rank(&c) {
            Rank::Finite(n) => json!(n),
            Rank::Infinite => json!("inf"),
        };
        Ok(Json(json!({ "rank": r })))
    })
    .await
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/api/kbs", post(create).get(list))
        .route("/api/kbs/{id}", get(fetch))
        .route("/api/kbs/{id}/lineage", get(lineage))
        .route("/api/kbs/{id}/combine", post(combine))
        .route("/api/kbs/{id}/revise", post(revise))
        .route("/api/kbs/{id}/query", post(query))
        .route("/api/kbs/{id}/score", post(score))
        .route("/api/kbs/{id}/rank", get(rank))
        .with_state(state)
}

pub async fn serve(port: u16, workspace: PathBuf, max_inclusions: usize) -> io::Result<()> {
    let state = AppState::new(Workspace::open(workspace)?, max_inclusions);
    let listener = tokio::net::TcpListener::bind(("0.0.0.0", port)).await?;
    axum::serve(listener, router(state)).await
}
