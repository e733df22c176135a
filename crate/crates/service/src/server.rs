//! Session-oriented HTTP API.
//!
//! | method | path                          | body / result                     |
//! |--------|-------------------------------|-----------------------------------|
//! | POST   | `/sessions`                   | raw image → 201 session info      |
//! | GET    | `/sessions/{id}`              | session info                      |
//! | POST   | `/sessions/{id}/strokes`      | JSON stroke list → update summary |
//! | GET    | `/sessions/{id}/segmentation` | PNG (`?format=indexed\|overlay`)  |
//! | GET    | `/sessions/{id}/superpixels`  | PNG boundary overlay              |
//! | DELETE | `/sessions/{id}`              | 204                               |
//!
//! Updates to one session run one at a time in arrival order; the latest
//! segmentation is published separately so reads never wait on a running
//! update.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::sync::atomic::{AtomicU8, Ordering};
use std::sync::{Arc, Mutex, RwLock};
use std::time::{Duration, Instant, SystemTime, UNIX_EPOCH};

use axum::body::Bytes;
use axum::extract::{DefaultBodyLimit, Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use scis_core::render::{boundary_overlay, default_palette, segmentation_overlay};
use scis_core::{
    Error, FhParams, LabelMap, RasterImage, Session, Stroke, SuperpixelMap, SvmParams,
};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone)]
pub struct Config {
    pub max_width: u32,
    pub max_height: u32,
    /// Sessions untouched for this long are dropped.
    pub idle_timeout: Duration,
    /// Upper bound on request bodies, in bytes.
    pub body_limit: usize,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            max_width: 4096,
            max_height: 4096,
            idle_timeout: Duration::from_secs(30 * 60),
            body_limit: 256 << 20,
        }
    }
}

#[derive(Clone)]
pub struct AppState {
    inner: Arc<Shared>,
}

struct Shared {
    config: Config,
    sessions: Mutex<HashMap<String, Arc<Slot>>>,
}

struct Slot {
    session: Arc<tokio::sync::Mutex<Session>>,
    image: RasterImage,
    superpixels: SuperpixelMap,
    latest: RwLock<Option<Arc<LabelMap>>>,
    num_classes: AtomicU8,
    last_used: Mutex<Instant>,
    created_at: u64,
}

impl Slot {
    fn touch(&self) {
        *self.last_used.lock().unwrap() = Instant::now();
    }
}

impl AppState {
    pub fn new(config: Config) -> Self {
        Self {
            inner: Arc::new(Shared {
                config,
                sessions: Mutex::new(HashMap::new()),
            }),
        }
    }

    pub fn config(&self) -> &Config {
        &self.inner.config
    }

    pub fn session_count(&self) -> usize {
        self.inner.sessions.lock().unwrap().len()
    }

    /// Drops sessions idle for longer than the configured timeout and
    /// returns how many were removed.
    pub fn sweep_idle(&self) -> usize {
        let timeout = self.inner.config.idle_timeout;
        let mut sessions = self.inner.sessions.lock().unwrap();
        let before = sessions.len();
        sessions.retain(|_, slot| slot.last_used.lock().unwrap().elapsed() < timeout);
        before - sessions.len()
    }

    fn slot(&self, id: &str) -> Result<Arc<Slot>, ApiError> {
        let slot = self
            .inner
            .sessions
            .lock()
            .unwrap()
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, format!("no session `{id}`")))?;
        slot.touch();
        Ok(slot)
    }
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        Self {
            status,
            message: message.into(),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = Json(serde_json::json!({ "error": self.message }));
        (self.status, body).into_response()
    }
}

fn internal(e: impl std::fmt::Display) -> ApiError {
    ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string())
}

/// Optional query parameters of `POST /sessions`.
#[derive(Debug, Default, Deserialize)]
pub struct CreateParams {
    pub k: Option<f64>,
    pub min_size: Option<usize>,
    pub sigma: Option<f64>,
    pub c: Option<f64>,
    pub gamma: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SessionInfo {
    pub id: String,
    pub width: u32,
    pub height: u32,
    pub superpixels: usize,
    pub num_classes: u8,
    /// Unix time in seconds.
    pub created_at: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct StrokesResponse {
    pub num_classes: u8,
    /// Whether the published segmentation differs from the previous one.
    pub changed: bool,
    pub segmentation_url: Option<String>,
    pub error: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
pub struct SegmentationQuery {
    pub format: Option<String>,
}

pub fn router(state: AppState) -> Router {
    let limit = state.config().body_limit;
    Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(session_info).delete(delete_session))
        .route("/sessions/{id}/strokes", post(post_strokes))
        .route("/sessions/{id}/segmentation", get(get_segmentation))
        .route("/sessions/{id}/superpixels", get(get_superpixels))
        .layer(DefaultBodyLimit::max(limit))
        .with_state(state)
}

async fn create_session(
    State(state): State<AppState>,
    Query(params): Query<CreateParams>,
    body: Bytes,
) -> Result<(StatusCode, Json<SessionInfo>), ApiError> {
    let bad = |e: Error| ApiError::new(StatusCode::BAD_REQUEST, e.to_string());
    let (w, h) = RasterImage::probe_dimensions(&body).map_err(bad)?;
    let config = state.config();
    if w > config.max_width || h > config.max_height {
        return Err(ApiError::new(
            StatusCode::PAYLOAD_TOO_LARGE,
            format!(
                "{w}x{h} exceeds the {}x{} limit",
                config.max_width, config.max_height
            ),
        ));
    }
    let defaults = FhParams::default();
    let fh = FhParams {
        k: params.k.unwrap_or(defaults.k),
        min_size: params.min_size.unwrap_or(defaults.min_size),
        smoothing_sigma: params.sigma.unwrap_or(defaults.smoothing_sigma),
    };
    let defaults = SvmParams::default();
    let svm = SvmParams {
        c: params.c.unwrap_or(defaults.c),
        gamma: params.gamma.unwrap_or(defaults.gamma),
        ..defaults
    };

    let session = tokio::task::spawn_blocking(move || {
        let image = RasterImage::decode(&body)?;
        Session::new(image, fh, svm)
    })
    .await
    .map_err(internal)?
    .map_err(bad)?;

    let id = uuid::Uuid::new_v4().simple().to_string();
    let created_at = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_secs());
    let info = SessionInfo {
        id: id.clone(),
        width: session.image().width(),
        height: session.image().height(),
        superpixels: session.superpixels().count(),
        num_classes: 0,
        created_at,
    };
    let slot = Slot {
        image: session.image().clone(),
        superpixels: session.superpixels().clone(),
        session: Arc::new(tokio::sync::Mutex::new(session)),
        latest: RwLock::new(None),
        num_classes: AtomicU8::new(0),
        last_used: Mutex::new(Instant::now()),
        created_at,
    };
    state
        .inner
        .sessions
        .lock()
        .unwrap()
        .insert(id.clone(), Arc::new(slot));
    tracing::info!(%id, width = info.width, height = info.height, superpixels = info.superpixels, "session created");
    Ok((StatusCode::CREATED, Json(info)))
}

async fn session_info(
    State(state): State<AppState>,
    Path(id): Path<String>,
) -> Result<Json<SessionInfo>, ApiError> {
    let slot = state.slot(&id)?;
    Ok(Json(SessionInfo {
        id,
        width: slot.image.width(),
        height: slot.image.height(),
        superpixels: slot.superpixels.count(),
        num_classes: slot.num_classes.load(Ordering::Relaxed),
        created_at: slot.created_at,
    }))
}

async fn post_strokes(
    State(state): State<AppState>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<Json<StrokesResponse>, ApiError> {
    let slot = state.slot(&id)?;
    let strokes: Vec<Stroke> = serde_json::from_slice(&body)
        .map_err(|e| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, e.to_string()))?;

    // FIFO lock: posts to one session are applied in arrival order, and the
    // guard is held until the result is published
    let session = slot.session.clone().lock_owned().await;
    let (outcome, num_classes, _guard) = tokio::task::spawn_blocking(move || {
        let mut session = session;
        let outcome = session.update(strokes).cloned();
        let k = session.seeds().num_classes();
        (outcome, k, session)
    })
    .await
    .map_err(internal)?;
    slot.num_classes.store(num_classes, Ordering::Relaxed);

    let mut latest = slot.latest.write().unwrap();
    let previous = latest.take();
    let response = match outcome {
        Ok(map) => {
            let changed = previous.as_deref() != Some(&map);
            *latest = Some(Arc::new(map));
            StrokesResponse {
                num_classes,
                changed,
                segmentation_url: Some(format!("/sessions/{id}/segmentation")),
                error: None,
            }
        }
        Err(e @ (Error::OutOfBounds(..) | Error::InvalidStroke(_))) => {
            *latest = previous;
            return Err(ApiError::new(
                StatusCode::UNPROCESSABLE_ENTITY,
                e.to_string(),
            ));
        }
        Err(e) => StrokesResponse {
            num_classes,
            changed: previous.is_some(),
            segmentation_url: None,
            error: Some(e.to_string()),
        },
    };
    Ok(Json(response))
}

fn png(bytes: Vec<u8>) -> Response {
    ([(header::CONTENT_TYPE, "image/png")], bytes).into_response()
}

async fn get_segmentation(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Query(query): Query<SegmentationQuery>,
) -> Result<Response, ApiError> {
    let slot = state.slot(&id)?;
    let map = slot
        .latest
        .read()
        .unwrap()
        .clone()
        .ok_or_else(|| ApiError::new(StatusCode::CONFLICT, "no segmentation yet"))?;
    let bytes = match query.format.as_deref().unwrap_or("indexed") {
        "indexed" => map
            .encode_png(Some(&default_palette(map.num_classes())))
            .map_err(internal)?,
        "overlay" => segmentation_overlay(&slot.image, &map, Some(&slot.superpixels), 0.5)
            .and_then(|img| img.encode_png())
            .map_err(internal)?,
        other => {
            return Err(ApiError::new(
                StatusCode::BAD_REQUEST,
                format!("unknown format `{other}`; expected indexed or overlay"),
            ))
        }
    };
    Ok(png(bytes))
}

async fn get_superpixels(
    State(state): State<AppState>,
    Path(id): Path<String>,
) -> Result<Response, ApiError> {
    let slot = state.slot(&id)?;
    let bytes = boundary_overlay(&slot.image, &slot.superpixels)
        .and_then(|img| img.encode_png())
        .map_err(internal)?;
    Ok(png(bytes))
}

async fn delete_session(State(state): State<AppState>, Path(id): Path<String>) -> StatusCode {
    if state.inner.sessions.lock().unwrap().remove(&id).is_some() {
        tracing::info!(%id, "session deleted");
    }
    StatusCode::NO_CONTENT
}

/// Periodically drops idle sessions.
pub fn spawn_sweeper(state: AppState) -> tokio::task::JoinHandle<()> {
    let period =
        (state.config().idle_timeout / 4).clamp(Duration::from_millis(10), Duration::from_secs(30));
    tokio::spawn(async move {
        let mut ticker = tokio::time::interval(period);
        loop {
            ticker.tick().await;
            let removed = state.sweep_idle();
            if removed > 0 {
                tracing::info!(removed, "idle sessions dropped");
            }
        }
    })
}

/// Binds `addr` and serves until Ctrl-C.
pub async fn serve(addr: SocketAddr, config: Config) -> anyhow::Result<()> {
    let state = AppState::new(config);
    let sweeper = spawn_sweeper(state.clone());
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!(addr = %listener.local_addr()?, "listening");
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    sweeper.abort();
    Ok(())
}
