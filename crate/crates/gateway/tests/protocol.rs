use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use http_body_util::BodyExt;
use tower::ServiceExt;

use migbot_gateway::app::router;
use migbot_gateway::testing::{in_memory_gateway, RecordingTransport};

const BODY: &[u8] = include_bytes!("fixtures/signed_event.json");

fn precomputed_signature() -> String {
    include_str!("fixtures/signed_event.sha1")
        .lines()
        .find(|l| l.starts_with("sha1="))
        .unwrap()
        .trim()
        .to_string()
}

fn app() -> (axum::Router, Arc<RecordingTransport>) {
    let transport = Arc::new(RecordingTransport::default());
    let gw = Arc::new(in_memory_gateway(None, transport.clone()));
    (router(gw), transport)
}

async fn call(app: axum::Router, req: Request<Body>) -> (StatusCode, String) {
    let resp = app.oneshot(req).await.unwrap();
    let status = resp.status();
    let body = resp.into_body().collect().await.unwrap().to_bytes();
    (status, String::from_utf8_lossy(&body).into_owned())
}

fn get(uri: &str) -> Request<Body> {
    Request::get(uri).body(Body::empty()).unwrap()
}

fn post(body: Vec<u8>, signature: Option<&str>) -> Request<Body> {
    let mut req = Request::post("/webhook").header("content-type", "application/json");
    if let Some(s) = signature {
        req = req.header("X-Hub-Signature", s);
    }
    req.body(Body::from(body)).unwrap()
}

#[tokio::test]
async fn handshake_echoes_challenge() {
    let (app, _) = app();
    let (status, body) = call(
        app,
        get("/webhook?hub.mode=subscribe&hub.verify_token=test-verify-token&hub.challenge=abc123"),
    )
    .await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body, "abc123");
}

#[tokio::test]
async fn handshake_rejections() {
    for uri in [
        "/webhook?hub.mode=subscribe&hub.verify_token=wrong&hub.challenge=abc123",
        "/webhook?hub.mode=subscribe&hub.verify_token=test-verify-token",
        "/webhook?hub.mode=unsubscribe&hub.verify_token=test-verify-token&hub.challenge=abc123",
        "/webhook",
    ] {
        let (app, _) = app();
        assert_eq!(call(app, get(uri)).await.0, StatusCode::FORBIDDEN, "{uri}");
    }
}

#[tokio::test]
async fn signed_event_is_accepted() {
    let (app, _) = app();
    let sig = precomputed_signature();
    let (status, body) = call(app, post(BODY.to_vec(), Some(&sig))).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body, "EVENT_RECEIVED");
}

#[tokio::test]
async fn every_single_bit_flip_is_rejected() {
    let sig = precomputed_signature();
    for byte in [0, BODY.len() / 2, BODY.len() - 1] {
        for bit in 0..8 {
            let mut tampered = BODY.to_vec();
            tampered[byte] ^= 1 << bit;
            let (app, transport) = app();
            let (status, _) = call(app, post(tampered, Some(&sig))).await;
            assert_eq!(status, StatusCode::FORBIDDEN, "byte {byte} bit {bit}");
            assert!(transport.attempts().is_empty());
        }
    }
}

#[tokio::test]
async fn malformed_or_missing_signature_is_rejected() {
    for sig in [None, Some("md5=f6411940c8d33003dbc5d567dceb7b1297ed39bf"), Some("sha1=zz")] {
        let (app, _) = app();
        assert_eq!(call(app, post(BODY.to_vec(), sig)).await.0, StatusCode::FORBIDDEN);
    }
}

#[tokio::test]
async fn signed_garbage_is_a_bad_request() {
    let body = b"{not json".to_vec();
    let sig = migbot_gateway::signature::sign(&body, b"test-app-secret");
    let (app, _) = app();
    assert_eq!(call(app, post(body, Some(&sig))).await.0, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn health_and_unknown_transcript() {
    let (app, _) = app();
    assert_eq!(call(app.clone(), get("/health")).await, (StatusCode::OK, "ok".into()));
    assert_eq!(call(app, get("/sessions/99/transcript")).await.0, StatusCode::NOT_FOUND);
}
