//! HTTP session API over the stillmotion pipeline.
//!
//! | Method | Path                       | Body            | Response      |
//! |--------|----------------------------|-----------------|---------------|
//! | POST   | `/sessions`                | PNG/PPM bytes   | `{"id", ...}` |
//! | GET    | `/sessions/{id}`           |                 | session JSON  |
//! | PUT    | `/sessions/{id}/clicks`    | ClickSet JSON   | mask PNG      |
//! | GET    | `/sessions/{id}/inpaint`   |                 | plate PNG     |
//! | POST   | `/sessions/{id}/animation` | animation JSON  | GIF           |
//! | GET    | `/sessions/{id}/frame?t=&spec=` |            | frame PNG     |
//! | DELETE | `/sessions/{id}`           |                 | 204           |
//!
//! Errors are `{"code": ..., "message": ...}` with status 400 (undecodable
//! image), 404 (unknown session), 409 (no mask yet), 413 (upload too large)
//! or 422 (invalid clicks or animation spec).
//!
//! Requests on one session run one at a time; different sessions run
//! concurrently. All computation goes through [`stillmotion::pipeline`], the
//! same code the CLI runs.

mod config;
mod error;
mod store;

use std::net::SocketAddr;
use std::sync::Arc;

use axum::body::{Body, Bytes};
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post, put};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use stillmotion::imagecore::{decode_image, encode_png};
use stillmotion::meshanim::AnimationSpec;
use stillmotion::pipeline::{build_scene, default_delay_cs, inpaint, render_clip, render_frame, segment};
use stillmotion::render::encode_gif;
use stillmotion::{ClickSet, ImageBuffer};

pub use config::{ServiceConfig, DEFAULT_MAX_IMAGE_BYTES, DEFAULT_PORT, DEFAULT_SESSION_TTL};
pub use error::ApiError;
pub use store::{Session, SessionStore};

pub struct AppState {
    pub store: SessionStore,
    pub config: ServiceConfig,
}

impl AppState {
    /// Fresh state, with sessions restored from the persistence directory.
    pub fn new(config: ServiceConfig) -> Arc<Self> {
        let store = SessionStore::new(config.session_ttl, config.persist_dir.clone());
        store.restore();
        Arc::new(Self { store, config })
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(session_info).delete(delete_session))
        .route("/sessions/{id}/clicks", put(update_clicks))
        .route("/sessions/{id}/inpaint", get(preview_inpaint))
        .route("/sessions/{id}/animation", post(render_animation))
        .route("/sessions/{id}/frame", get(preview_frame))
        .with_state(state)
}

/// Serves on `0.0.0.0:<port>` until the process ends, sweeping idle
/// sessions in the background.
pub async fn serve(config: ServiceConfig) -> std::io::Result<()> {
    let addr = SocketAddr::from(([0, 0, 0, 0], config.port));
    let listener = tokio::net::TcpListener::bind(addr).await?;
    serve_on(listener, config).await
}

pub async fn serve_on(listener: tokio::net::TcpListener, config: ServiceConfig) -> std::io::Result<()> {
    let state = AppState::new(config);
    let sweeper = state.clone();
    let period = (state.config.session_ttl / 2).min(std::time::Duration::from_secs(60));
    tokio::spawn(async move {
        let mut tick = tokio::time::interval(period);
        loop {
            tick.tick().await;
            sweeper.store.sweep();
        }
    });
    axum::serve(listener, router(state)).await
}

type ApiResult<T = Response> = Result<T, ApiError>;

fn png(image: &ImageBuffer) -> Response {
    ([(header::CONTENT_TYPE, "image/png")], encode_png(image)).into_response()
}

/// Runs CPU-bound work off the async workers.
async fn compute<T: Send + 'static>(f: impl FnOnce() -> stillmotion::Result<T> + Send + 'static) -> ApiResult<T> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::internal(format!("worker failed: {e}")))?
        .map_err(ApiError::from)
}

fn session(state: &AppState, id: &str) -> ApiResult<store::SessionHandle> {
    state.store.get(id).ok_or_else(ApiError::not_found)
}

#[derive(Serialize)]
struct Created {
    id: String,
    width: u32,
    height: u32,
}

async fn create_session(State(state): State<Arc<AppState>>, body: Body) -> ApiResult<Json<Created>> {
    let limit = state.config.max_image_bytes;
    let bytes = axum::body::to_bytes(body, limit).await.map_err(|_| {
        ApiError::new(
            StatusCode::PAYLOAD_TOO_LARGE,
            "too_large",
            format!("image exceeds {limit} bytes"),
        )
    })?;
    let image = tokio::task::spawn_blocking(move || decode_image(&bytes))
        .await
        .map_err(|e| ApiError::internal(format!("worker failed: {e}")))?
        .map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "undecodable_image", format!("undecodable image: {e}")))?;
    let (width, height) = image.dimensions();
    let id = state.store.insert(Session::new(image));
    Ok(Json(Created { id, width, height }))
}

#[derive(Serialize)]
struct Info {
    id: String,
    width: u32,
    height: u32,
    clicks: Option<ClickSet>,
    has_mask: bool,
    has_plate: bool,
    spec: Option<AnimationSpec>,
    /// Seconds since the Unix epoch.
    created_at: u64,
}

async fn session_info(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<Json<Info>> {
    let handle = session(&state, &id)?;
    let s = handle.lock().await;
    let (width, height) = s.image.dimensions();
    Ok(Json(Info {
        id,
        width,
        height,
        clicks: s.clicks.clone(),
        has_mask: s.mask.is_some(),
        has_plate: s.plate.is_some(),
        spec: s.spec.clone(),
        created_at: s
            .created_at
            .duration_since(std::time::UNIX_EPOCH)
            .map_or(0, |d| d.as_secs()),
    }))
}

async fn delete_session(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<StatusCode> {
    if state.store.remove(&id) {
        Ok(StatusCode::NO_CONTENT)
    } else {
        Err(ApiError::not_found())
    }
}

async fn update_clicks(State(state): State<Arc<AppState>>, Path(id): Path<String>, body: Bytes) -> ApiResult {
    let handle = session(&state, &id)?;
    let text = std::str::from_utf8(&body).map_err(|_| ApiError::invalid("malformed clicks: body is not UTF-8"))?;
    let clicks = ClickSet::from_json(text).map_err(|e| ApiError::invalid(format!("malformed clicks: {e}")))?;

    let mut s = handle.lock().await;
    let image = s.image.clone();
    let cfg = state.config.segmentation.clone();
    let input = clicks.clone();
    let mask = compute(move || segment(&image, &input, &cfg)).await?;
    let body = png(&mask.to_image());
    s.set_mask(clicks, mask);
    state.store.save(&id, &s);
    Ok(body)
}

/// The plate for the session's current mask, computing it if needed.
async fn ensure_plate(state: &AppState, s: &mut Session) -> ApiResult<Arc<ImageBuffer>> {
    let mask = s.mask.clone().ok_or_else(ApiError::no_mask)?;
    if let Some(plate) = &s.plate {
        return Ok(plate.clone());
    }
    let image = s.image.clone();
    let cfg = state.config.inpaint;
    let filled = compute(move || inpaint(&image, &mask, &cfg)).await?;
    let plate = Arc::new(filled.image);
    s.plate = Some(plate.clone());
    Ok(plate)
}

async fn preview_inpaint(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult {
    let handle = session(&state, &id)?;
    let mut s = handle.lock().await;
    let plate = ensure_plate(&state, &mut s).await?;
    Ok(png(&plate))
}

fn parse_spec(text: &str) -> ApiResult<AnimationSpec> {
    let malformed = |e: serde_json::Error| ApiError::invalid(format!("malformed animation spec: {e}"));
    let value: serde_json::Value = serde_json::from_str(text).map_err(malformed)?;
    // serde would otherwise read a JSON array as the struct's fields in order.
    if !value.is_object() {
        return Err(ApiError::invalid("malformed animation spec: expected a JSON object"));
    }
    let spec: AnimationSpec = serde_json::from_value(value).map_err(malformed)?;
    let problems = spec.problems();
    if !problems.is_empty() {
        return Err(ApiError::invalid(format!("invalid animation spec: {}", problems.join("; "))));
    }
    Ok(spec)
}

async fn render_animation(State(state): State<Arc<AppState>>, Path(id): Path<String>, body: Bytes) -> ApiResult {
    let handle = session(&state, &id)?;
    let text = std::str::from_utf8(&body).map_err(|_| ApiError::invalid("animation spec is not UTF-8"))?;
    let spec = parse_spec(text)?;

    let mut s = handle.lock().await;
    let plate = ensure_plate(&state, &mut s).await?;
    let (image, mask) = (s.image.clone(), s.mask.clone().ok_or_else(ApiError::no_mask)?);
    let (mesh, sampling) = (state.config.mesh, state.config.sampling);
    let job = spec.clone();
    let gif = compute(move || {
        let scene = build_scene(&image, &mask, &plate, mesh, sampling)?;
        let frames = render_clip(&scene, &job)?;
        encode_gif(&frames, default_delay_cs(&job))
    })
    .await?;
    s.spec = Some(spec);
    state.store.save(&id, &s);
    Ok(([(header::CONTENT_TYPE, "image/gif")], gif).into_response())
}

#[derive(Deserialize)]
struct FrameQuery {
    t: Option<String>,
    spec: Option<String>,
}

/// One frame at clip fraction `t`. Without `spec`, uses the session's last
/// rendered spec, or the default animation.
async fn preview_frame(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    Query(query): Query<FrameQuery>,
) -> ApiResult {
    let handle = session(&state, &id)?;
    let t: f64 = query
        .t
        .as_deref()
        .ok_or_else(|| ApiError::invalid("query parameter t is required"))?
        .parse()
        .map_err(|_| ApiError::invalid("t must be a number"))?;
    if !(0.0..=1.0).contains(&t) {
        return Err(ApiError::invalid(format!("t must be in [0, 1], got {t}")));
    }
    let given = query.spec.as_deref().map(parse_spec).transpose()?;

    let mut s = handle.lock().await;
    let spec = given.or_else(|| s.spec.clone()).unwrap_or_default();
    let plate = ensure_plate(&state, &mut s).await?;
    let (image, mask) = (s.image.clone(), s.mask.clone().ok_or_else(ApiError::no_mask)?);
    let (mesh, sampling) = (state.config.mesh, state.config.sampling);
    let frame = compute(move || {
        let scene = build_scene(&image, &mask, &plate, mesh, sampling)?;
        render_frame(&scene, &spec, t, 0)
    })
    .await?;
    Ok(png(&frame.image))
}
