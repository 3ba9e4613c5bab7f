//! JSON API over the normalizer, attack generators and classifiers.
//!
//! | route | purpose |
//! |---|---|
//! | `POST /normalize` | normalized text plus edit trace |
//! | `POST /attack` | seeded attack on a text |
//! | `POST /score` | classifier scores, raw and optionally normalized |
//! | `GET /health` | readiness |
//! | `GET /sessions/{id}` | JSONL export of a red-team session |

mod sessions;

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, OnceLock};
use std::time::{SystemTime, UNIX_EPOCH};

use axum::body::Bytes;
use axum::extract::{DefaultBodyLimit, Path, State};
use axum::http::{header, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tower_http::cors::{AllowOrigin, CorsLayer};
use tower_http::services::ServeDir;

use atn_core::attacks::{apply_attack, sample_params, AttackKind, AttackParams, AttackSpec};
use atn_core::classifier::{ClassifierError, ClassifierHandle, Prediction};
use atn_core::evaluation::RecordInput;
use atn_core::normalizer::{normalize, normalize_text, Edit, NormalizerConfig, PassSet};

pub use sessions::{AppendError, Attempt, SessionStore};

pub const MAX_BODY_BYTES: usize = 64 * 1024;
pub const DEFAULT_SESSION_ATTEMPTS: usize = 500;

/// Everything the handlers need; immutable once installed.
pub struct ServiceConfig {
    pub normalizer: NormalizerConfig,
    /// The first classifier is the default for `/score`.
    pub classifiers: Vec<ClassifierHandle>,
    pub sessions: SessionStore,
}

impl ServiceConfig {
    pub fn new(normalizer: NormalizerConfig, classifiers: Vec<ClassifierHandle>) -> Self {
        ServiceConfig {
            normalizer,
            classifiers,
            sessions: SessionStore::new(DEFAULT_SESSION_ATTEMPTS, None).expect("in-memory store"),
        }
    }
}

#[derive(Default)]
pub struct AppState {
    config: OnceLock<ServiceConfig>,
}

impl AppState {
    /// State that answers 503 until [`AppState::install`] is called.
    pub fn starting() -> Arc<Self> {
        Arc::new(AppState::default())
    }

    pub fn ready(config: ServiceConfig) -> Arc<Self> {
        let state = Self::starting();
        state.install(config);
        state
    }

    pub fn install(&self, config: ServiceConfig) {
        if self.config.set(config).is_err() {
            log::warn!("service configuration already installed; ignoring the new one");
        }
    }

    fn get(&self) -> Result<&ServiceConfig, ApiError> {
        self.config.get().ok_or_else(|| ApiError::new(StatusCode::SERVICE_UNAVAILABLE, "service is starting"))
    }
}

#[derive(Debug, Default, Clone)]
pub struct RouterOptions {
    /// Allowed CORS origins; empty allows any origin.
    pub cors_origins: Vec<String>,
    /// Directory served for unmatched GET paths (the playground build).
    pub static_dir: Option<PathBuf>,
}

pub fn router(state: Arc<AppState>, options: &RouterOptions) -> Router {
    let cors = if options.cors_origins.is_empty() {
        CorsLayer::permissive()
    } else {
        let origins: Vec<HeaderValue> = options.cors_origins.iter().filter_map(|o| o.parse().ok()).collect();
        CorsLayer::new()
            .allow_origin(AllowOrigin::list(origins))
            .allow_methods(tower_http::cors::Any)
            .allow_headers(tower_http::cors::Any)
    };
    let mut app = Router::new()
        .route("/normalize", post(normalize_handler))
        .route("/attack", post(attack_handler))
        .route("/score", post(score_handler))
        .route("/health", get(health_handler))
        .route("/sessions/{id}", get(session_handler))
        .with_state(state);
    if let Some(dir) = &options.static_dir {
        app = app.fallback_service(ServeDir::new(dir));
    }
    app.layer(DefaultBodyLimit::max(MAX_BODY_BYTES)).layer(cors)
}

/// Serves until ctrl-c.
pub async fn serve(addr: SocketAddr, state: Arc<AppState>, options: &RouterOptions) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(state, options))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
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

    fn with(mut self, key: &str, value: Value) -> Self {
        self.body[key] = value;
        self
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

fn parse_body<T: DeserializeOwned>(body: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, format!("malformed body: {e}")))
}

#[derive(Deserialize)]
struct NormalizeRequest {
    text: String,
    #[serde(default)]
    passes: Option<Vec<String>>,
}

#[derive(Serialize)]
struct NormalizeResponse {
    normalized: String,
    edits: Vec<Edit>,
}

fn config_for(base: &NormalizerConfig, passes: Option<&[String]>) -> Result<Option<NormalizerConfig>, ApiError> {
    match passes {
        None => Ok(None),
        Some(names) => {
            let set = PassSet::from_names(names).map_err(|e| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, e.to_string()))?;
            Ok(Some(base.with_passes(set)))
        }
    }
}

async fn normalize_handler(State(state): State<Arc<AppState>>, body: Bytes) -> Result<Json<NormalizeResponse>, ApiError> {
    let cfg = state.get()?;
    let req: NormalizeRequest = parse_body(&body)?;
    let custom = config_for(&cfg.normalizer, req.passes.as_deref())?;
    let result = normalize(&req.text, custom.as_ref().unwrap_or(&cfg.normalizer));
    Ok(Json(NormalizeResponse { normalized: result.output, edits: result.edits }))
}

#[derive(Deserialize)]
struct AttackRequest {
    text: String,
    kind: String,
    #[serde(default)]
    seed: Option<u64>,
    #[serde(default)]
    params: Option<AttackParams>,
}

#[derive(Serialize)]
struct AttackResponse {
    attacked: String,
    kind: AttackKind,
    params_used: AttackParams,
    seed_used: u64,
}

fn kind_list() -> Value {
    Value::Array(AttackKind::ALL.iter().map(|k| Value::String(k.as_str().into())).collect())
}

async fn attack_handler(State(state): State<Arc<AppState>>, body: Bytes) -> Result<Json<AttackResponse>, ApiError> {
    state.get()?;
    let req: AttackRequest = parse_body(&body)?;
    let kind: AttackKind = req
        .kind
        .parse()
        .map_err(|e: atn_core::AttackError| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, e.to_string()).with("kinds", kind_list()))?;
    let seed = req.seed.unwrap_or_else(rand::random);
    let params = req.params.unwrap_or_else(|| sample_params(seed));
    let spec = AttackSpec { kind, params, seed };
    let attacked = apply_attack(&req.text, &spec).map_err(|e| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, e.to_string()))?;
    Ok(Json(AttackResponse { attacked, kind, params_used: params, seed_used: seed }))
}

#[derive(Deserialize)]
struct ScoreRequest {
    #[serde(default)]
    text: Option<String>,
    #[serde(default)]
    premise: Option<String>,
    #[serde(default)]
    hypothesis: Option<String>,
    #[serde(default)]
    classifier: Option<String>,
    #[serde(default)]
    normalize: bool,
    #[serde(default)]
    passes: Option<Vec<String>>,
    #[serde(default)]
    session_id: Option<String>,
    #[serde(default)]
    attack_applied: Option<String>,
}

#[derive(Serialize)]
struct NormalizedScore {
    input: Value,
    #[serde(flatten)]
    prediction: Prediction,
}

#[derive(Serialize)]
struct ScoreResponse {
    classifier: String,
    #[serde(flatten)]
    raw: Prediction,
    #[serde(skip_serializing_if = "Option::is_none")]
    normalized: Option<NormalizedScore>,
    #[serde(skip_serializing_if = "Option::is_none")]
    attempt: Option<usize>,
}

fn input_json(input: &RecordInput) -> Value {
    match input {
        RecordInput::Text(t) => json!({ "text": t }),
        RecordInput::Pair { premise, hypothesis } => json!({ "premise": premise, "hypothesis": hypothesis }),
    }
}

fn classifier_error(e: ClassifierError) -> ApiError {
    let status = if e.is_unavailable() {
        StatusCode::SERVICE_UNAVAILABLE
    } else if matches!(e, ClassifierError::TaskMismatch(_)) {
        StatusCode::UNPROCESSABLE_ENTITY
    } else {
        StatusCode::BAD_GATEWAY
    };
    ApiError::new(status, e.to_string())
}

async fn score_handler(State(state): State<Arc<AppState>>, body: Bytes) -> Result<Json<ScoreResponse>, ApiError> {
    let cfg = state.get()?;
    let req: ScoreRequest = parse_body(&body)?;
    let input = match (req.text, req.premise, req.hypothesis) {
        (Some(t), None, None) => RecordInput::Text(t),
        (None, Some(premise), Some(hypothesis)) => RecordInput::Pair { premise, hypothesis },
        (None, None, None) => return Err(ApiError::new(StatusCode::BAD_REQUEST, "missing 'text' (or 'premise' and 'hypothesis')")),
        _ => {
            return Err(ApiError::new(
                StatusCode::UNPROCESSABLE_ENTITY,
                "send either 'text' or both 'premise' and 'hypothesis'",
            ))
        }
    };
    let classifier = match &req.classifier {
        None => cfg.classifiers.first(),
        Some(name) => cfg.classifiers.iter().find(|c| c.name() == name),
    }
    .ok_or_else(|| {
        let names: Vec<Value> = cfg.classifiers.iter().map(|c| Value::String(c.name().into())).collect();
        ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "unknown classifier").with("classifiers", Value::Array(names))
    })?
    .clone();
    let custom = config_for(&cfg.normalizer, req.passes.as_deref())?;
    let normalized_input = req.normalize.then(|| {
        let ncfg = custom.as_ref().unwrap_or(&cfg.normalizer);
        match &input {
            RecordInput::Text(t) => RecordInput::Text(normalize_text(t, ncfg)),
            RecordInput::Pair { premise, hypothesis } => RecordInput::Pair {
                premise: normalize_text(premise, ncfg),
                hypothesis: normalize_text(hypothesis, ncfg),
            },
        }
    });

    // external classifiers block on network I/O
    let (raw, normalized) = {
        let (input, normalized_input, classifier) = (input.clone(), normalized_input.clone(), classifier.clone());
        tokio::task::spawn_blocking(move || {
            let raw = classifier.predict("raw", &input)?;
            let normalized = normalized_input.map(|n| classifier.predict("normalized", &n)).transpose()?;
            Ok::<_, ClassifierError>((raw, normalized))
        })
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?
        .map_err(classifier_error)?
    };

    let attempt = match &req.session_id {
        None => None,
        Some(id) => {
            let timestamp_ms = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_millis() as u64);
            let logged = cfg
                .sessions
                .append(Attempt {
                    session_id: id.clone(),
                    seq: 0,
                    input: input_json(&input),
                    attack_applied: req.attack_applied.clone(),
                    normalized: normalized_input.as_ref().map(input_json),
                    classifier: classifier.name().to_string(),
                    raw_score: raw,
                    normalized_score: normalized,
                    timestamp_ms,
                })
                .map_err(|e| match e {
                    AppendError::Full(max) => ApiError::new(StatusCode::CONFLICT, format!("session already holds {max} attempts")),
                    AppendError::Io(e) => ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()),
                })?;
            Some(logged.seq)
        }
    };

    Ok(Json(ScoreResponse {
        classifier: classifier.name().to_string(),
        raw,
        normalized: normalized_input.zip(normalized).map(|(i, p)| NormalizedScore { input: input_json(&i), prediction: p }),
        attempt,
    }))
}

async fn health_handler(State(state): State<Arc<AppState>>) -> Response {
    match state.config.get() {
        Some(cfg) => Json(json!({
            "status": "ok",
            "version": env!("CARGO_PKG_VERSION"),
            "tables_loaded": cfg.normalizer.tables().ids(),
        }))
        .into_response(),
        None => (
            StatusCode::SERVICE_UNAVAILABLE,
            Json(json!({ "status": "starting", "version": env!("CARGO_PKG_VERSION"), "tables_loaded": [] })),
        )
            .into_response(),
    }
}

async fn session_handler(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let cfg = state.get()?;
    let body = cfg
        .sessions
        .export(&id)
        .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, format!("no session '{id}'")))?;
    Ok(([(header::CONTENT_TYPE, "application/x-ndjson")], body).into_response())
}
