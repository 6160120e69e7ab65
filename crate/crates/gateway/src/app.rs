//! Gateway state, event handling and the HTTP routes.

use std::collections::HashMap;
use std::sync::atomic::{AtomicI64, Ordering};
use std::sync::{Arc, Mutex, MutexGuard};
use std::time::{Duration, Instant};

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use chrono::{DateTime, Utc};
use dashmap::DashMap;
use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use migbot_core::flow::{Engine, EngineError, Session};
use migbot_core::message::OutboundMessage;
use migbot_core::persistence::{RecordStore, StoreError};

use crate::envelope::{parse_envelope, InboundEvent};
use crate::profile::{fetch_profile, ProfileProvider};
use crate::sender::{Delivery, Outbox, SenderConfig};
use crate::signature::{verify_signature, SIGNATURE_HEADER};
use crate::transport::{Mailbox, Transport};

/// Page id used for events arriving over the loopback channel.
pub const LOOPBACK_PAGE: &str = "loopback";
const MAX_WAIT: Duration = Duration::from_secs(30);

#[derive(Debug, Clone)]
pub struct GatewayConfig {
    pub verify_token: String,
    pub app_secret: String,
    pub sender: SenderConfig,
    /// How long a (sender, timestamp, text) triple is remembered.
    pub dedupe_window: Duration,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    Platform,
    Loopback,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Handled {
    Processed { session_id: u64, messages: usize },
    Duplicate,
    /// No text and no payload, e.g. an attachment.
    Ignored,
}

#[derive(Debug, Error)]
pub enum GatewayError {
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    In,
    Out,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscriptEntry {
    pub direction: Direction,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seq: Option<u64>,
    pub text: String,
    pub at: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub session_id: u64,
    pub user_id: String,
    pub entries: Vec<TranscriptEntry>,
}

struct Slot {
    session: Option<Session>,
    channel: Channel,
}

pub struct Gateway {
    cfg: GatewayConfig,
    engine: Engine,
    store: Mutex<Box<dyn RecordStore>>,
    slots: DashMap<String, Arc<tokio::sync::Mutex<Slot>>>,
    seen: Mutex<HashMap<(String, i64, String), Instant>>,
    profiles: Arc<dyn ProfileProvider>,
    outbox: Outbox,
    platform: Arc<dyn Transport>,
    mailbox: Arc<Mailbox>,
    transcripts: DashMap<u64, Transcript>,
    clock: AtomicI64,
}

impl Gateway {
    pub fn new(
        cfg: GatewayConfig,
        engine: Engine,
        store: Box<dyn RecordStore>,
        profiles: Arc<dyn ProfileProvider>,
        platform: Arc<dyn Transport>,
    ) -> Self {
        let outbox = Outbox::new(cfg.sender.clone());
        Self {
            cfg,
            engine,
            store: Mutex::new(store),
            slots: DashMap::new(),
            seen: Mutex::new(HashMap::new()),
            profiles,
            outbox,
            platform,
            mailbox: Arc::new(Mailbox::default()),
            transcripts: DashMap::new(),
            clock: AtomicI64::new(0),
        }
    }

    pub fn engine(&self) -> &Engine {
        &self.engine
    }

    pub fn store(&self) -> MutexGuard<'_, Box<dyn RecordStore>> {
        self.store.lock().expect("store lock poisoned")
    }

    pub fn mailbox(&self) -> &Mailbox {
        &self.mailbox
    }

    pub fn outbox(&self) -> &Outbox {
        &self.outbox
    }

    pub fn deliveries(&self) -> Vec<Delivery> {
        self.outbox.deliveries()
    }

    pub fn transcript(&self, session_id: u64) -> Option<Transcript> {
        self.transcripts.get(&session_id).map(|t| t.clone())
    }

    pub fn transcripts(&self) -> Vec<Transcript> {
        self.transcripts.iter().map(|t| t.clone()).collect()
    }

    /// Strictly increasing millisecond timestamps for loopback events.
    pub fn next_timestamp(&self) -> i64 {
        let now = Utc::now().timestamp_millis();
        let mut prev = self.clock.load(Ordering::SeqCst);
        loop {
            let next = now.max(prev + 1);
            match self.clock.compare_exchange(prev, next, Ordering::SeqCst, Ordering::SeqCst) {
                Ok(_) => return next,
                Err(p) => prev = p,
            }
        }
    }

    fn transport(&self, channel: Channel) -> Arc<dyn Transport> {
        match channel {
            Channel::Platform => self.platform.clone(),
            Channel::Loopback => self.mailbox.clone(),
        }
    }

    fn is_duplicate(&self, key: &(String, i64, String)) -> bool {
        let mut seen = self.seen.lock().expect("dedupe lock");
        let window = self.cfg.dedupe_window;
        seen.retain(|_, at| at.elapsed() < window);
        seen.contains_key(key)
    }

    fn remember(&self, key: (String, i64, String)) {
        self.seen.lock().expect("dedupe lock").insert(key, Instant::now());
    }

    async fn first_contact(&self, user: &str, now: DateTime<Utc>) -> Result<Session, GatewayError> {
        let profile = fetch_profile(self.profiles.as_ref(), user).await;
        let mut store = self.store();
        let record = match store.create_record(user, &profile, now) {
            Ok(r) => r,
            // a record without a session: an earlier turn failed halfway
            Err(StoreError::DuplicateActiveSession(_)) => store
                .active_record_for(user)
                .ok_or_else(|| StoreError::Storage(format!("active record for {user} vanished")))?,
            Err(e) => return Err(e.into()),
        };
        log::info!("new session {} for {user}", record.id);
        Ok(self.engine.new_session(record.id, user, now))
    }

    /// Runs one inbound event through the engine. Events from the same sender
    /// are processed one at a time, in arrival order.
    pub async fn handle_event(&self, ev: &InboundEvent, channel: Channel) -> Result<Handled, GatewayError> {
        let Some(text) = ev.answer_text() else {
            log::info!("ignoring event from {} without text", ev.sender_id);
            return Ok(Handled::Ignored);
        };
        let slot = self
            .slots
            .entry(ev.sender_id.clone())
            .or_insert_with(|| {
                Arc::new(tokio::sync::Mutex::new(Slot {
                    session: None,
                    channel,
                }))
            })
            .clone();
        let mut slot = slot.lock().await;
        let key = (ev.sender_id.clone(), ev.timestamp, text.to_string());
        if self.is_duplicate(&key) {
            log::info!("dropping redelivered event from {} at {}", ev.sender_id, ev.timestamp);
            return Ok(Handled::Duplicate);
        }
        let now = Utc::now();
        let known = slot.session.clone().or_else(|| self.store().session(&ev.sender_id));
        let session = match known {
            Some(s) => s,
            None => self.first_contact(&ev.sender_id, now).await?,
        };
        let advance = self.engine.advance_at(&session, text, now)?;
        self.store()
            .commit_turn(session.session_id, &advance.effects, &advance.session)?;
        slot.session = Some(advance.session);
        slot.channel = channel;
        self.log_turn(session.session_id, &ev.sender_id, text, &advance.messages, now);
        let n = advance.messages.len();
        self.outbox.enqueue(self.transport(channel), advance.messages);
        self.remember(key);
        Ok(Handled::Processed {
            session_id: session.session_id,
            messages: n,
        })
    }

    fn log_turn(&self, session_id: u64, user: &str, text: &str, out: &[OutboundMessage], at: DateTime<Utc>) {
        let mut t = self.transcripts.entry(session_id).or_insert_with(|| Transcript {
            session_id,
            user_id: user.to_string(),
            entries: Vec::new(),
        });
        t.entries.push(TranscriptEntry {
            direction: Direction::In,
            seq: None,
            text: text.to_string(),
            at,
        });
        t.entries.extend(out.iter().map(|m| TranscriptEntry {
            direction: Direction::Out,
            seq: Some(m.seq),
            text: m.text.clone(),
            at,
        }));
    }
}

pub fn router(gw: Arc<Gateway>) -> Router {
    Router::new()
        .route("/webhook", get(handshake).post(webhook))
        .route("/sessions/{id}/transcript", get(transcript))
        .route("/local/messages", get(local_poll).post(local_send))
        .route("/operator/attention", get(attention))
        .route("/health", get(health))
        .with_state(gw)
}

async fn health() -> &'static str {
    "ok"
}

async fn handshake(State(gw): State<Arc<Gateway>>, Query(q): Query<HashMap<String, String>>) -> Response {
    let mode = q.get("hub.mode").map(String::as_str);
    let token = q.get("hub.verify_token").map(String::as_str);
    match (mode, token, q.get("hub.challenge")) {
        (Some("subscribe"), Some(t), Some(challenge)) if t == gw.cfg.verify_token && !challenge.is_empty() => {
            (StatusCode::OK, challenge.clone()).into_response()
        }
        _ => {
            log::warn!("webhook handshake rejected");
            StatusCode::FORBIDDEN.into_response()
        }
    }
}

async fn webhook(State(gw): State<Arc<Gateway>>, headers: HeaderMap, body: Bytes) -> Response {
    let header = headers.get(SIGNATURE_HEADER).and_then(|v| v.to_str().ok());
    if let Err(e) = verify_signature(&body, header, gw.cfg.app_secret.as_bytes()) {
        log::warn!("webhook event rejected: {} ({e})", e.code());
        return StatusCode::FORBIDDEN.into_response();
    }
    let events = match parse_envelope(&body) {
        Ok(ev) => ev,
        Err(e) => {
            log::warn!("webhook event rejected: {e}");
            return (StatusCode::BAD_REQUEST, e.to_string()).into_response();
        }
    };
    for ev in &events {
        if let Err(e) = gw.handle_event(ev, Channel::Platform).await {
            log::error!("event from {} failed: {e}", ev.sender_id);
            return (StatusCode::INTERNAL_SERVER_ERROR, "EVENT_FAILED").into_response();
        }
    }
    (StatusCode::OK, "EVENT_RECEIVED").into_response()
}

async fn transcript(State(gw): State<Arc<Gateway>>, Path(id): Path<u64>) -> Response {
    match gw.transcript(id) {
        Some(t) => Json(t).into_response(),
        None => StatusCode::NOT_FOUND.into_response(),
    }
}

async fn attention(State(gw): State<Arc<Gateway>>) -> Response {
    let parked: Vec<_> = gw
        .outbox
        .needs_attention()
        .into_iter()
        .map(|(user, messages)| json!({ "user_id": user, "messages": messages }))
        .collect();
    Json(parked).into_response()
}

/// Body of `POST /local/messages`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LocalMessage {
    pub user_id: String,
    #[serde(default)]
    pub text: Option<String>,
    #[serde(default)]
    pub quick_reply_payload: Option<String>,
    /// Client-chosen timestamp; repeating one makes the post a redelivery.
    #[serde(default)]
    pub timestamp: Option<i64>,
}

async fn local_send(State(gw): State<Arc<Gateway>>, Json(m): Json<LocalMessage>) -> Response {
    if m.user_id.trim().is_empty() || (m.text.is_none() && m.quick_reply_payload.is_none()) {
        return (StatusCode::BAD_REQUEST, "user_id and text or quick_reply_payload are required").into_response();
    }
    let timestamp = m.timestamp.unwrap_or_else(|| gw.next_timestamp());
    let ev = InboundEvent {
        sender_id: m.user_id,
        recipient_page_id: LOOPBACK_PAGE.into(),
        timestamp,
        message_text: m.text,
        quick_reply_payload: m.quick_reply_payload,
    };
    match gw.handle_event(&ev, Channel::Loopback).await {
        Ok(h) => {
            let session = gw.store().session(&ev.sender_id);
            Json(json!({
                "accepted": true,
                "duplicate": h == Handled::Duplicate,
                "timestamp": timestamp,
                "session_id": session.as_ref().map(|s| s.session_id),
                "finalized": session.is_some_and(|s| s.finalized),
            }))
            .into_response()
        }
        Err(e) => {
            log::error!("loopback event from {} failed: {e}", ev.sender_id);
            (StatusCode::INTERNAL_SERVER_ERROR, "EVENT_FAILED").into_response()
        }
    }
}

#[derive(Debug, Deserialize)]
struct PollQuery {
    user: String,
    #[serde(default)]
    after: u64,
    #[serde(default)]
    wait_ms: u64,
}

async fn local_poll(State(gw): State<Arc<Gateway>>, Query(q): Query<PollQuery>) -> Response {
    let wait = Duration::from_millis(q.wait_ms).min(MAX_WAIT);
    let messages = gw.mailbox.wait_after(&q.user, q.after, wait).await;
    Json(json!({ "messages": messages })).into_response()
}
