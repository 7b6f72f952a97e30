//! HTTP JSON API over the chromaharmony engine.
//!
//! Stateless endpoints evaluate and generate palettes. Sessions keep an
//! incremental engine state in memory, expire after an idle TTL and are
//! mutated one request at a time.

use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderMap, HeaderValue, Method, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{delete, get, post};
use axum::{Json, Router};
use chromaharmony::engine::{evaluate_palette, evaluate_palette_weighted, suggest_next, Session};
use chromaharmony::generate::{generate_line_palette, GenHuePattern, GenSpec};
use chromaharmony::{Color, HarmonyError, HarmonyParams};
use chromaharmony_cli::config::ParamOverrides;
use chromaharmony_cli::wire::{parse_color_value, PaletteJson, ReportJson, SuggestionJson, SwatchJson};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::collections::HashMap;
use std::sync::{Arc, Mutex};
use std::time::Duration;
use tokio::time::Instant;
use tower_http::cors::{AllowOrigin, CorsLayer};

pub const DEFAULT_TTL: Duration = Duration::from_secs(24 * 60 * 60);
pub const DEFAULT_SUGGESTIONS: usize = 5;
pub const MAX_SUGGESTIONS: usize = 50;

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub ttl: Duration,
    /// `None` disables CORS; `"*"` allows any origin.
    pub cors_origin: Option<String>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            ttl: DEFAULT_TTL,
            cors_origin: None,
        }
    }
}

impl ServiceConfig {
    /// Reads `CHROMAHARMONY_TTL_SECS` and `CHROMAHARMONY_CORS_ORIGIN`.
    pub fn from_env() -> Result<Self, String> {
        let mut cfg = Self::default();
        if let Ok(v) = std::env::var("CHROMAHARMONY_TTL_SECS") {
            let secs: u64 = v
                .parse()
                .map_err(|_| format!("CHROMAHARMONY_TTL_SECS={v:?} is not a whole number of seconds"))?;
            cfg.ttl = Duration::from_secs(secs);
        }
        cfg.cors_origin = std::env::var("CHROMAHARMONY_CORS_ORIGIN")
            .ok()
            .filter(|s| !s.is_empty());
        Ok(cfg)
    }
}

struct SessionSlot {
    session: Session,
    revision: u64,
    last_touched: Instant,
}

type SlotHandle = Arc<tokio::sync::Mutex<SessionSlot>>;

#[derive(Clone)]
pub struct AppState {
    sessions: Arc<Mutex<HashMap<String, SlotHandle>>>,
    ttl: Duration,
}

impl AppState {
    pub fn new(ttl: Duration) -> Self {
        Self {
            sessions: Arc::new(Mutex::new(HashMap::new())),
            ttl,
        }
    }

    pub fn session_count(&self) -> usize {
        self.sessions.lock().expect("session map poisoned").len()
    }

    /// Drops every session idle for longer than the TTL.
    pub async fn prune_expired(&self) -> usize {
        let handles: Vec<(String, SlotHandle)> = {
            let map = self.sessions.lock().expect("session map poisoned");
            map.iter().map(|(k, v)| (k.clone(), v.clone())).collect()
        };
        let mut stale = Vec::new();
        for (id, h) in handles {
            if h.lock().await.last_touched.elapsed() > self.ttl {
                stale.push(id);
            }
        }
        let mut map = self.sessions.lock().expect("session map poisoned");
        for id in &stale {
            map.remove(id);
        }
        stale.len()
    }

    fn insert(&self, session: Session) -> String {
        let id = uuid::Uuid::new_v4().simple().to_string();
        let slot = SessionSlot {
            session,
            revision: 0,
            last_touched: Instant::now(),
        };
        self.sessions
            .lock()
            .expect("session map poisoned")
            .insert(id.clone(), Arc::new(tokio::sync::Mutex::new(slot)));
        id
    }

    /// Locks a live session, refreshing its idle timer. Expired sessions are
    /// removed and reported as missing.
    async fn checkout(&self, id: &str) -> Result<tokio::sync::OwnedMutexGuard<SessionSlot>, ApiError> {
        let handle = self
            .sessions
            .lock()
            .expect("session map poisoned")
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::not_found(id))?;
        let mut slot = handle.lock_owned().await;
        if slot.last_touched.elapsed() > self.ttl {
            self.sessions.lock().expect("session map poisoned").remove(id);
            return Err(ApiError::not_found(id));
        }
        slot.last_touched = Instant::now();
        Ok(slot)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
    /// JSON path of the offending input, e.g. `colors[1]`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    body: ErrorBody,
}

impl ApiError {
    fn new(status: StatusCode, error: impl Into<String>, field: Option<String>) -> Self {
        Self {
            status,
            body: ErrorBody {
                error: error.into(),
                field,
            },
        }
    }

    fn bad_request(error: impl Into<String>, field: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, error, Some(field.into()))
    }

    fn not_found(id: &str) -> Self {
        Self::new(StatusCode::NOT_FOUND, format!("no session {id:?}"), None)
    }

    fn engine(e: HarmonyError) -> Self {
        let status = match e {
            HarmonyError::EmptyPalette => StatusCode::UNPROCESSABLE_ENTITY,
            HarmonyError::OutOfRange { .. }
            | HarmonyError::NonFinite(_)
            | HarmonyError::InvalidParam { .. }
            | HarmonyError::LengthMismatch(..)
            | HarmonyError::TooFewColors(_) => StatusCode::BAD_REQUEST,
            HarmonyError::DegenerateFit | HarmonyError::SingularCovariance => StatusCode::UNPROCESSABLE_ENTITY,
        };
        Self::new(status, e.to_string(), None)
    }
}

impl From<JsonRejection> for ApiError {
    fn from(r: JsonRejection) -> Self {
        Self::new(StatusCode::BAD_REQUEST, r.body_text(), None)
    }
}

impl From<QueryRejection> for ApiError {
    fn from(r: QueryRejection) -> Self {
        Self::new(StatusCode::BAD_REQUEST, r.body_text(), None)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

fn resolve_params(o: Option<ParamOverrides>) -> ApiResult<HarmonyParams> {
    o.unwrap_or_default()
        .apply(HarmonyParams::default())
        .map_err(|e| ApiError::bad_request(e.to_string(), "params"))
}

fn parse_colors(values: &[Value], field: &str) -> ApiResult<Vec<Color>> {
    values
        .iter()
        .enumerate()
        .map(|(i, v)| {
            parse_color_value(v)
                .map(|p| p.color)
                .map_err(|e| ApiError::bad_request(e.to_string(), format!("{field}[{i}]")))
        })
        .collect()
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvaluateRequest {
    pub colors: Vec<Value>,
    #[serde(default)]
    pub weights: Option<Vec<f64>>,
    #[serde(default)]
    pub params: Option<ParamOverrides>,
}

async fn evaluate(body: Result<Json<EvaluateRequest>, JsonRejection>) -> ApiResult<Json<ReportJson>> {
    let Json(req) = body?;
    let p = resolve_params(req.params)?;
    let colors = parse_colors(&req.colors, "colors")?;
    let report = match &req.weights {
        Some(w) => evaluate_palette_weighted(&colors, w, &p),
        None => evaluate_palette(&colors, &p),
    }
    .map_err(|e| match e {
        HarmonyError::LengthMismatch(..) => ApiError::bad_request(e.to_string(), "weights"),
        other => ApiError::engine(other),
    })?;
    Ok(Json(ReportJson::from(&report)))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenerateRequest {
    pub r: f64,
    pub phi: f64,
    pub k: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub pattern: Option<String>,
    #[serde(default)]
    pub params: Option<ParamOverrides>,
}

async fn generate(body: Result<Json<GenerateRequest>, JsonRejection>) -> ApiResult<Json<PaletteJson>> {
    let Json(req) = body?;
    let p = resolve_params(req.params)?;
    if req.k < 2 {
        return Err(ApiError::bad_request(
            format!("k must be at least 2, got {}", req.k),
            "k",
        ));
    }
    let pattern_override = req
        .pattern
        .as_deref()
        .map(|s| s.parse::<GenHuePattern>())
        .transpose()
        .map_err(|e| ApiError::bad_request(e, "pattern"))?;
    let spec = GenSpec {
        r: req.r,
        phi: req.phi,
        k: req.k,
        seed: req.seed,
        pattern_override,
    };
    let res = generate_line_palette(&spec, &p).map_err(ApiError::engine)?;
    Ok(Json(PaletteJson::new(&spec, &res)))
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateSessionRequest {
    #[serde(default)]
    pub params: Option<ParamOverrides>,
    #[serde(default)]
    pub colors: Vec<Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SessionJson {
    pub id: String,
    pub revision: u64,
    pub ttl_secs: u64,
    pub colors: Vec<SwatchJson>,
    pub report: ReportJson,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuggestionsJson {
    pub id: String,
    pub revision: u64,
    pub suggestions: Vec<SuggestionJson>,
}

fn session_json(id: &str, slot: &SessionSlot, ttl: Duration) -> SessionJson {
    SessionJson {
        id: id.to_string(),
        revision: slot.revision,
        ttl_secs: ttl.as_secs(),
        colors: slot.session.colors().iter().map(SwatchJson::from).collect(),
        report: ReportJson::from(&slot.session.report()),
    }
}

fn with_etag<T: IntoResponse>(status: StatusCode, revision: u64, body: T) -> Response {
    let mut resp = (status, body).into_response();
    let tag = HeaderValue::from_str(&format!("\"{revision}\"")).expect("numeric etag");
    resp.headers_mut().insert(header::ETAG, tag);
    resp
}

/// Rejects a mutation whose `If-Match` names a stale revision.
fn check_if_match(headers: &HeaderMap, current: u64) -> ApiResult<()> {
    let Some(raw) = headers.get(header::IF_MATCH) else {
        return Ok(());
    };
    let text = raw
        .to_str()
        .map_err(|_| ApiError::bad_request("If-Match is not ASCII", "If-Match"))?
        .trim();
    if text == "*" {
        return Ok(());
    }
    let wanted: u64 = text
        .trim_start_matches("W/")
        .trim_matches('"')
        .parse()
        .map_err(|_| ApiError::bad_request(format!("If-Match {text:?} is not a revision"), "If-Match"))?;
    if wanted != current {
        return Err(ApiError::new(
            StatusCode::CONFLICT,
            format!("session is at revision {current}, request expected {wanted}"),
            None,
        ));
    }
    Ok(())
}

async fn create_session(
    State(state): State<AppState>,
    body: Option<Json<CreateSessionRequest>>,
) -> ApiResult<Response> {
    let req = body.map(|Json(b)| b).unwrap_or_default();
    let p = resolve_params(req.params)?;
    let colors = parse_colors(&req.colors, "colors")?;
    let mut session = Session::new(p).map_err(ApiError::engine)?;
    for c in colors {
        session.add_color(c);
    }
    let id = state.insert(session);
    let slot = state.checkout(&id).await?;
    let body = session_json(&id, &slot, state.ttl);
    let mut resp = with_etag(StatusCode::CREATED, slot.revision, Json(body));
    let loc = HeaderValue::from_str(&format!("/api/sessions/{id}")).expect("ascii id");
    resp.headers_mut().insert(header::LOCATION, loc);
    Ok(resp)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AddColorRequest {
    pub color: Value,
}

async fn add_color(
    State(state): State<AppState>,
    Path(id): Path<String>,
    headers: HeaderMap,
    body: Result<Json<AddColorRequest>, JsonRejection>,
) -> ApiResult<Response> {
    let Json(req) = body?;
    let color = parse_color_value(&req.color)
        .map_err(|e| ApiError::bad_request(e.to_string(), "color"))?
        .color;
    let mut slot = state.checkout(&id).await?;
    check_if_match(&headers, slot.revision)?;
    slot.session.add_color(color);
    slot.revision += 1;
    Ok(with_etag(
        StatusCode::OK,
        slot.revision,
        Json(session_json(&id, &slot, state.ttl)),
    ))
}

async fn undo_color(State(state): State<AppState>, Path(id): Path<String>, headers: HeaderMap) -> ApiResult<Response> {
    let mut slot = state.checkout(&id).await?;
    check_if_match(&headers, slot.revision)?;
    if slot.session.undo().is_none() {
        return Err(ApiError::new(
            StatusCode::CONFLICT,
            "session has no colors to remove",
            None,
        ));
    }
    slot.revision += 1;
    Ok(with_etag(
        StatusCode::OK,
        slot.revision,
        Json(session_json(&id, &slot, state.ttl)),
    ))
}

async fn get_report(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<Response> {
    let slot = state.checkout(&id).await?;
    Ok(with_etag(
        StatusCode::OK,
        slot.revision,
        Json(session_json(&id, &slot, state.ttl)),
    ))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuggestQuery {
    pub n: Option<usize>,
}

async fn get_suggestions(
    State(state): State<AppState>,
    Path(id): Path<String>,
    query: Result<Query<SuggestQuery>, QueryRejection>,
) -> ApiResult<Response> {
    let Query(q) = query?;
    let n = q.n.unwrap_or(DEFAULT_SUGGESTIONS);
    if n == 0 || n > MAX_SUGGESTIONS {
        return Err(ApiError::bad_request(
            format!("n must be in 1..={MAX_SUGGESTIONS}"),
            "n",
        ));
    }
    let slot = state.checkout(&id).await?;
    let session = slot.session.clone();
    let revision = slot.revision;
    drop(slot);
    let found = tokio::task::spawn_blocking(move || suggest_next(&session, n))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string(), None))?
        .map_err(ApiError::engine)?;
    let body = SuggestionsJson {
        id,
        revision,
        suggestions: found.iter().map(SuggestionJson::from).collect(),
    };
    Ok(with_etag(StatusCode::OK, revision, Json(body)))
}

async fn healthz() -> &'static str {
    "ok"
}

fn cors_layer(origin: &str) -> Result<CorsLayer, String> {
    let allow = if origin == "*" {
        AllowOrigin::any()
    } else {
        AllowOrigin::exact(HeaderValue::from_str(origin).map_err(|_| format!("bad CORS origin {origin:?}"))?)
    };
    Ok(CorsLayer::new()
        .allow_origin(allow)
        .allow_methods([Method::GET, Method::POST, Method::DELETE])
        .allow_headers([header::CONTENT_TYPE, header::IF_MATCH])
        .expose_headers([header::ETAG, header::LOCATION]))
}

pub fn router(state: AppState, config: &ServiceConfig) -> Result<Router, String> {
    let mut app = Router::new()
        .route("/healthz", get(healthz))
        .route("/api/evaluate", post(evaluate))
        .route("/api/generate", post(generate))
        .route("/api/sessions", post(create_session))
        .route("/api/sessions/{id}/colors", post(add_color))
        .route("/api/sessions/{id}/colors/last", delete(undo_color))
        .route("/api/sessions/{id}/report", get(get_report))
        .route("/api/sessions/{id}/suggestions", get(get_suggestions))
        .with_state(state);
    if let Some(origin) = &config.cors_origin {
        app = app.layer(cors_layer(origin)?);
    }
    Ok(app)
}

/// Router with a fresh session store.
pub fn app(config: &ServiceConfig) -> Result<(Router, AppState), String> {
    let state = AppState::new(config.ttl);
    Ok((router(state.clone(), config)?, state))
}
