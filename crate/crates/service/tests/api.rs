use std::io::Cursor;
use std::sync::Arc;

use axum::body::Body;
use axum::http::{header, Method, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use stillmotion::imagecore::{decode_image, encode_png, save_image};
use stillmotion::meshanim::{AnimationKind, AnimationSpec};
use stillmotion::pipeline::{run_pipeline, ClicksSource, PipelineConfig, MASK_ARTIFACT, PLATE_ARTIFACT};
use stillmotion::render::{composite_frame, Sampling};
use stillmotion::segmentation::SegmentationConfig;
use stillmotion::{ClickSet, ImageBuffer, Mask};
use stillmotion_service::{router, AppState, ServiceConfig};
use tower::ServiceExt;

const RED: [u8; 4] = [220, 40, 40, 255];
const BLUE: [u8; 4] = [30, 60, 200, 255];

fn inside(x: u32, y: u32) -> bool {
    (16..48).contains(&x) && (20..56).contains(&y)
}

fn two_region() -> ImageBuffer {
    ImageBuffer::from_fn(64, 64, |x, y| if inside(x, y) { RED } else { BLUE }).unwrap()
}

fn app_with(config: ServiceConfig) -> (Router, Arc<AppState>) {
    let state = AppState::new(config);
    (router(state.clone()), state)
}

fn app() -> Router {
    app_with(ServiceConfig::default()).0
}

struct Reply {
    status: StatusCode,
    content_type: Option<String>,
    body: Vec<u8>,
}

impl Reply {
    fn json(&self) -> serde_json::Value {
        serde_json::from_slice(&self.body).unwrap_or_else(|e| panic!("not JSON ({e}): {:?}", String::from_utf8_lossy(&self.body)))
    }

    fn image(&self) -> ImageBuffer {
        assert_eq!(self.content_type.as_deref(), Some("image/png"));
        decode_image(&self.body).unwrap()
    }
}

async fn send(app: &Router, method: Method, uri: &str, body: impl Into<Body>) -> Reply {
    let request = Request::builder().method(method).uri(uri).body(body.into()).unwrap();
    let response = app.clone().oneshot(request).await.unwrap();
    let status = response.status();
    let content_type = response
        .headers()
        .get(header::CONTENT_TYPE)
        .map(|v| v.to_str().unwrap().to_owned());
    let body = response.into_body().collect().await.unwrap().to_bytes().to_vec();
    Reply {
        status,
        content_type,
        body,
    }
}

async fn create(app: &Router, image: &ImageBuffer) -> String {
    let reply = send(app, Method::POST, "/sessions", encode_png(image)).await;
    assert_eq!(reply.status, StatusCode::OK);
    reply.json()["id"].as_str().unwrap().to_owned()
}

async fn put_clicks(app: &Router, id: &str, clicks: &ClickSet) -> Reply {
    send(app, Method::PUT, &format!("/sessions/{id}/clicks"), clicks.to_json()).await
}

fn assert_error(reply: &Reply, status: StatusCode, needle: &str) {
    assert_eq!(reply.status, status, "{}", String::from_utf8_lossy(&reply.body));
    let body = reply.json();
    assert!(body["code"].is_string());
    let message = body["message"].as_str().unwrap();
    assert!(message.contains(needle), "{message:?} lacks {needle:?}");
}

fn gif_frames(bytes: &[u8]) -> Vec<(u16, u16, u16)> {
    let mut options = gif::DecodeOptions::new();
    options.set_color_output(gif::ColorOutput::RGBA);
    let mut decoder = options.read_info(Cursor::new(bytes)).unwrap();
    let mut frames = Vec::new();
    while let Some(frame) = decoder.read_next_frame().unwrap() {
        frames.push((frame.width, frame.height, frame.delay));
    }
    frames
}

#[tokio::test]
async fn upload_returns_fresh_ids() {
    let app = app();
    let reply = send(&app, Method::POST, "/sessions", encode_png(&two_region())).await;
    assert_eq!(reply.status, StatusCode::OK);
    let body = reply.json();
    assert_eq!(body["width"], 64);
    assert_eq!(body["height"], 64);
    let a = body["id"].as_str().unwrap().to_owned();
    let b = create(&app, &two_region()).await;
    assert_ne!(a, b);

    let info = send(&app, Method::GET, &format!("/sessions/{a}"), Body::empty()).await.json();
    assert_eq!(info["has_mask"], false);
}

#[tokio::test]
async fn undecodable_upload_is_400() {
    let reply = send(&app(), Method::POST, "/sessions", vec![0x89u8, 0x50]).await;
    assert_error(&reply, StatusCode::BAD_REQUEST, "undecodable image");
}

#[tokio::test]
async fn oversized_upload_is_413() {
    let config = ServiceConfig {
        max_image_bytes: 100,
        ..ServiceConfig::default()
    };
    let (app, state) = app_with(config);
    let reply = send(&app, Method::POST, "/sessions", encode_png(&two_region())).await;
    assert_error(&reply, StatusCode::PAYLOAD_TOO_LARGE, "100 bytes");
    assert!(state.store.is_empty());
}

#[tokio::test]
async fn unknown_session_is_404() {
    let app = app();
    let clicks = ClickSet::positive([(1, 1)]);
    assert_error(&put_clicks(&app, "nope", &clicks).await, StatusCode::NOT_FOUND, "unknown session");
    for (method, uri) in [
        (Method::GET, "/sessions/nope"),
        (Method::GET, "/sessions/nope/inpaint"),
        (Method::GET, "/sessions/nope/frame?t=0"),
        (Method::POST, "/sessions/nope/animation"),
        (Method::DELETE, "/sessions/nope"),
    ] {
        let body = if method == Method::POST { Body::from("{}") } else { Body::empty() };
        assert_eq!(send(&app, method, uri, body).await.status, StatusCode::NOT_FOUND, "{uri}");
    }
}

#[tokio::test]
async fn delete_ends_session() {
    let app = app();
    let id = create(&app, &two_region()).await;
    let uri = format!("/sessions/{id}");
    assert_eq!(send(&app, Method::DELETE, &uri, Body::empty()).await.status, StatusCode::NO_CONTENT);
    assert_eq!(send(&app, Method::GET, &uri, Body::empty()).await.status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn mask_follows_clicked_region() {
    let app = app();
    let id = create(&app, &two_region()).await;
    let reply = put_clicks(&app, &id, &ClickSet::positive([(30, 40)])).await;
    assert_eq!(reply.status, StatusCode::OK);
    let mask = Mask::from_image(&reply.image());
    let expected = Mask::from_fn(64, 64, inside).unwrap();
    assert_eq!(mask, expected);
}

#[tokio::test]
async fn bad_clicks_are_422() {
    let app = app();
    let id = create(&app, &two_region()).await;
    assert_error(
        &put_clicks(&app, &id, &ClickSet::new(vec![], vec![(2, 2)])).await,
        StatusCode::UNPROCESSABLE_ENTITY,
        "at least one positive click",
    );
    let uri = format!("/sessions/{id}/clicks");
    assert_error(&send(&app, Method::PUT, &uri, "{not json").await, StatusCode::UNPROCESSABLE_ENTITY, "malformed");
    let misspelled = r#"{"positive": [[30, 40]]}"#;
    assert_error(&send(&app, Method::PUT, &uri, misspelled).await, StatusCode::UNPROCESSABLE_ENTITY, "unknown field");
    assert_error(
        &put_clicks(&app, &id, &ClickSet::positive([(64, 0)])).await,
        StatusCode::UNPROCESSABLE_ENTITY,
        "(64, 0)",
    );
    // Negative click in the same region as the positive one.
    let conflict = ClickSet::new(vec![(30, 40)], vec![(20, 30)]);
    assert_eq!(put_clicks(&app, &id, &conflict).await.status, StatusCode::UNPROCESSABLE_ENTITY);
}

#[tokio::test]
async fn previews_need_a_mask() {
    let app = app();
    let id = create(&app, &two_region()).await;
    let base = format!("/sessions/{id}");
    assert_error(
        &send(&app, Method::GET, &format!("{base}/inpaint"), Body::empty()).await,
        StatusCode::CONFLICT,
        "no mask",
    );
    let spec = serde_json::to_string(&AnimationSpec::default()).unwrap();
    assert_eq!(send(&app, Method::POST, &format!("{base}/animation"), spec).await.status, StatusCode::CONFLICT);
    assert_eq!(send(&app, Method::GET, &format!("{base}/frame?t=0"), Body::empty()).await.status, StatusCode::CONFLICT);
}

#[tokio::test]
async fn invalid_spec_and_t_are_422() {
    let app = app();
    let id = create(&app, &two_region()).await;
    put_clicks(&app, &id, &ClickSet::positive([(30, 40)])).await;
    let base = format!("/sessions/{id}");
    for spec in [r#"{"frames": 0}"#, r#"{"kind": "spin"}"#, r#"{"unknown": 1}"#, "[]"] {
        let reply = send(&app, Method::POST, &format!("{base}/animation"), spec).await;
        assert_eq!(reply.status, StatusCode::UNPROCESSABLE_ENTITY, "{spec}");
    }
    for query in ["", "?t=1.5", "?t=-0.1", "?t=abc", "?t=NaN"] {
        let reply = send(&app, Method::GET, &format!("{base}/frame{query}"), Body::empty()).await;
        assert_eq!(reply.status, StatusCode::UNPROCESSABLE_ENTITY, "{query}");
    }
}

#[tokio::test]
async fn animation_decodes_to_requested_frames() {
    let app = app();
    let id = create(&app, &two_region()).await;
    put_clicks(&app, &id, &ClickSet::positive([(30, 40)])).await;
    let spec = r#"{"kind": "jump", "frames": 8, "duration": 1}"#;
    let reply = send(&app, Method::POST, &format!("/sessions/{id}/animation"), spec).await;
    assert_eq!(reply.status, StatusCode::OK);
    assert_eq!(reply.content_type.as_deref(), Some("image/gif"));
    let frames = gif_frames(&reply.body);
    assert_eq!(frames.len(), 8);
    // 1 s over 8 frames rounds to 13 cs.
    assert!(frames.iter().all(|&f| f == (64, 64, 13)), "{frames:?}");
}

#[tokio::test]
async fn first_jump_frame_is_the_rest_composite() {
    let app = app();
    let image = two_region();
    let id = create(&app, &image).await;
    let mask = Mask::from_image(&put_clicks(&app, &id, &ClickSet::positive([(30, 40)])).await.image());
    let plate = send(&app, Method::GET, &format!("/sessions/{id}/inpaint"), Body::empty()).await.image();

    let config = ServiceConfig::default();
    let scene = stillmotion::pipeline::build_scene(&image, &mask, &plate, config.mesh, config.sampling).unwrap();
    let rest = composite_frame(&scene, scene.subject_rest(), 0).unwrap();

    let spec = serde_json::to_string(&AnimationSpec::default()).unwrap();
    let uri = format!("/sessions/{id}/frame?t=0&spec={}", encode_query(&spec));
    let frame = send(&app, Method::GET, &uri, Body::empty()).await.image();
    assert_eq!(frame, rest.image);
    // Without a spec the default animation, a jump, is used.
    let frame = send(&app, Method::GET, &format!("/sessions/{id}/frame?t=0"), Body::empty()).await.image();
    assert_eq!(frame, rest.image);
    let mid = send(&app, Method::GET, &format!("/sessions/{id}/frame?t=0.45"), Body::empty()).await.image();
    assert_ne!(mid, rest.image);
}

fn encode_query(s: &str) -> String {
    s.bytes()
        .map(|b| match b {
            b'A'..=b'Z' | b'a'..=b'z' | b'0'..=b'9' | b'-' | b'_' | b'.' => (b as char).to_string(),
            _ => format!("%{b:02X}"),
        })
        .collect()
}

#[tokio::test]
async fn new_clicks_replace_cached_plate() {
    let app = app();
    // Three bands: clicking a different band must give a different plate.
    let image = ImageBuffer::from_fn(60, 40, |x, _| match x / 20 {
        0 => [200, 30, 30, 255],
        1 => [30, 200, 30, 255],
        _ => [30, 30, 200, 255],
    })
    .unwrap();
    let id = create(&app, &image).await;
    let inpaint = format!("/sessions/{id}/inpaint");
    let config = ServiceConfig::default();

    for click in [(5, 20), (30, 20), (50, 20), (5, 20)] {
        let mask = Mask::from_image(&put_clicks(&app, &id, &ClickSet::positive([click])).await.image());
        let expected = stillmotion::pipeline::inpaint(&image, &mask, &config.inpaint).unwrap().image;
        let served = send(&app, Method::GET, &inpaint, Body::empty()).await.image();
        assert_eq!(served, expected, "click {click:?}");
        // A second request serves the cached copy, still for this mask.
        assert_eq!(send(&app, Method::GET, &inpaint, Body::empty()).await.image(), expected);
    }
}

#[tokio::test]
async fn artifacts_match_cli_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let image = two_region();
    let input = dir.path().join("in.png");
    save_image(&image, &input).unwrap();
    let clicks = ClickSet::new(vec![(30, 40)], vec![(4, 4)]);
    let spec = AnimationSpec {
        kind: AnimationKind::Hwave,
        amplitude: 3.0,
        frames: 6,
        ..AnimationSpec::default()
    };

    let mut cfg = PipelineConfig::new(&input, ClicksSource::Inline(clicks.clone()));
    cfg.animation = spec.clone();
    cfg.output.gif = Some(dir.path().join("out.gif"));
    cfg.output.artifacts_dir = Some(dir.path().join("work"));
    run_pipeline(&cfg).unwrap();

    let app = app();
    let id = create(&app, &image).await;
    let mask = put_clicks(&app, &id, &clicks).await;
    let plate = send(&app, Method::GET, &format!("/sessions/{id}/inpaint"), Body::empty()).await;
    let gif = send(&app, Method::POST, &format!("/sessions/{id}/animation"), serde_json::to_string(&spec).unwrap()).await;

    let read = |name: &str| std::fs::read(dir.path().join(name)).unwrap();
    assert_eq!(mask.body, read(&format!("work/{MASK_ARTIFACT}")));
    assert_eq!(plate.body, read(&format!("work/{PLATE_ARTIFACT}")));
    assert_eq!(gif.body, read("out.gif"));
}

#[tokio::test]
async fn sessions_do_not_share_state() {
    let app = app();
    let image = two_region();
    let inner = ClickSet::positive([(30, 40)]);
    let outer = ClickSet::positive([(2, 2)]);
    let ids = [create(&app, &image).await, create(&app, &image).await];

    let mut tasks = Vec::new();
    for round in 0..4 {
        for (n, id) in ids.iter().enumerate() {
            let (app, id) = (app.clone(), id.clone());
            let clicks = if (n + round) % 2 == 0 { inner.clone() } else { outer.clone() };
            tasks.push(tokio::spawn(async move {
                let mask = Mask::from_image(&put_clicks(&app, &id, &clicks).await.image());
                (clicks, mask)
            }));
        }
    }
    let oracle = |clicks: &ClickSet| {
        stillmotion::pipeline::segment(&image, clicks, &SegmentationConfig::default()).unwrap()
    };
    for task in tasks {
        let (clicks, mask) = task.await.unwrap();
        assert_eq!(mask, oracle(&clicks));
    }
}

#[tokio::test]
async fn nearest_sampling_is_configurable() {
    let config = ServiceConfig {
        sampling: Sampling::Nearest,
        ..ServiceConfig::default()
    };
    let (app, _) = app_with(config);
    let image = two_region();
    let id = create(&app, &image).await;
    let mask = Mask::from_image(&put_clicks(&app, &id, &ClickSet::positive([(30, 40)])).await.image());
    let plate = send(&app, Method::GET, &format!("/sessions/{id}/inpaint"), Body::empty()).await.image();
    let frame = send(&app, Method::GET, &format!("/sessions/{id}/frame?t=1"), Body::empty()).await.image();
    // With nearest sampling the rest pose shows the source subject exactly
    // and the plate everywhere else.
    let expected = ImageBuffer::from_fn(64, 64, |x, y| {
        if mask.get(x, y) {
            image.get(x, y)
        } else {
            plate.get(x, y)
        }
    })
    .unwrap();
    assert_eq!(frame, expected);
}
