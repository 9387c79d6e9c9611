//! Read-only JSON API over a loaded corpus, an optional topic model and a
//! lexicon pack. All endpoints are `GET` and idempotent; the state never
//! changes after startup.
//!
//! ```no_run
//! # async fn run(corpus: metaphora_core::Corpus) -> std::io::Result<()> {
//! use std::sync::Arc;
//! use metaphora_service::{serve, ServiceState};
//! let state = Arc::new(ServiceState::new(corpus));
//! serve(state, "127.0.0.1:8080".parse().unwrap()).await
//! # }
//! ```

use std::net::SocketAddr;
use std::sync::Arc;

use axum::extract::rejection::QueryRejection;
use axum::extract::{Query, State};
use axum::http::{header, HeaderValue};
use axum::middleware::map_response_with_state;
use axum::response::Response;
use axum::routing::get;
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde::Serialize;

use metaphora_core::colloc::SketchOptions;
use metaphora_core::metaphor::LexiconPack;
use metaphora_core::topics::TopicError;
use metaphora_core::{Corpus, TopicModel};

mod error;
pub mod queries;

pub use error::ApiError;
use queries::*;

pub struct ServiceState {
    pub corpus: Corpus,
    pub model: Option<TopicModel>,
    pub pack: LexiconPack,
    /// Defaults for sketch queries (stoplist, window size).
    pub sketch: SketchOptions,
    /// Value of `Access-Control-Allow-Origin`.
    pub cors_origin: String,
}

impl ServiceState {
    pub fn new(corpus: Corpus) -> Self {
        Self {
            corpus,
            model: None,
            pack: LexiconPack::default_pack(),
            sketch: SketchOptions::default(),
            cors_origin: "*".to_string(),
        }
    }

    /// Attaches a model; every modeled document must be in the corpus.
    pub fn with_model(mut self, model: TopicModel) -> Result<Self, TopicError> {
        model.align(&self.corpus)?;
        self.model = Some(model);
        Ok(self)
    }

    pub fn with_lexicons(mut self, pack: LexiconPack) -> Self {
        self.pack = pack;
        self
    }

    pub fn with_cors_origin(mut self, origin: impl Into<String>) -> Self {
        self.cors_origin = origin.into();
        self
    }
}

type Shared = Arc<ServiceState>;
type ApiResult<T> = Result<Json<T>, ApiError>;

fn params<T>(q: Result<Query<T>, QueryRejection>) -> Result<T, ApiError> {
    q.map(|Query(p)| p).map_err(|e| ApiError::bad_request(e.body_text()))
}

/// Runs a query on the blocking pool so long computations do not stall
/// the request loop.
async fn blocking<P, T>(
    state: Shared,
    q: Result<Query<P>, QueryRejection>,
    f: fn(&ServiceState, &P) -> Result<T, ApiError>,
) -> ApiResult<T>
where
    P: DeserializeOwned + Send + 'static,
    T: Serialize + Send + 'static,
{
    let p = params(q)?;
    tokio::task::spawn_blocking(move || f(&state, &p))
        .await
        .map_err(|e| ApiError::internal(e.to_string()))?
        .map(Json)
}

async fn health() -> Json<serde_json::Value> {
    Json(serde_json::json!({ "status": "ok" }))
}

async fn meta_handler(State(s): State<Shared>) -> Json<Meta> {
    Json(meta(&s))
}

async fn kwic_handler(State(s): State<Shared>, q: Result<Query<KwicParams>, QueryRejection>) -> ApiResult<metaphora_core::concord::KwicPage> {
    blocking(s, q, kwic_query).await
}

async fn freq_handler(
    State(s): State<Shared>,
    q: Result<Query<FreqParams>, QueryRejection>,
) -> ApiResult<metaphora_core::colloc::FreqPayload> {
    blocking(s, q, freq_query).await
}

async fn sketch_handler(
    State(s): State<Shared>,
    q: Result<Query<SketchParams>, QueryRejection>,
) -> ApiResult<metaphora_core::colloc::WordSketch> {
    blocking(s, q, sketch_query).await
}

async fn sketchdiff_handler(
    State(s): State<Shared>,
    q: Result<Query<SketchDiffParams>, QueryRejection>,
) -> ApiResult<Vec<metaphora_core::colloc::SketchDiffRow>> {
    blocking(s, q, sketchdiff_query).await
}

async fn topics_handler(State(s): State<Shared>, q: Result<Query<TopicsParams>, QueryRejection>) -> ApiResult<TopicsPayload> {
    blocking(s, q, topics_query).await
}

async fn effects_handler(
    State(s): State<Shared>,
    q: Result<Query<EffectsParams>, QueryRejection>,
) -> ApiResult<Vec<metaphora_core::topics::EffectEstimate>> {
    blocking(s, q, effects_query).await
}

async fn prevalence_handler(
    State(s): State<Shared>,
    q: Result<Query<PrevalenceParams>, QueryRejection>,
) -> ApiResult<metaphora_core::topics::PrevalenceTable> {
    blocking(s, q, prevalence_query).await
}

async fn metaphors_handler(
    State(s): State<Shared>,
    q: Result<Query<MetaphorParams>, QueryRejection>,
) -> ApiResult<MetaphorPayload> {
    blocking(s, q, metaphors_query).await
}

async fn fallback() -> ApiError {
    ApiError::not_found("no such endpoint")
}

async fn cors(State(s): State<Shared>, mut res: Response) -> Response {
    if let Ok(origin) = HeaderValue::from_str(&s.cors_origin) {
        res.headers_mut().insert(header::ACCESS_CONTROL_ALLOW_ORIGIN, origin);
    }
    res
}

pub fn router(state: Shared) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/meta", get(meta_handler))
        .route("/kwic", get(kwic_handler))
        .route("/freq", get(freq_handler))
        .route("/sketch", get(sketch_handler))
        .route("/sketchdiff", get(sketchdiff_handler))
        .route("/topics", get(topics_handler))
        .route("/effects", get(effects_handler))
        .route("/prevalence", get(prevalence_handler))
        .route("/metaphors", get(metaphors_handler))
        .fallback(fallback)
        .layer(map_response_with_state(state.clone(), cors))
        .with_state(state)
}

/// Binds `addr` and serves until the process is stopped.
pub async fn serve(state: Shared, addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(state)).await
}
