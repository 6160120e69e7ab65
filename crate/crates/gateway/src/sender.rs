//! Ordered delivery: one worker per recipient sends that recipient's messages
//! strictly in enqueue order, pacing them and retrying failures in place.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use dashmap::DashMap;
use serde::Serialize;
use tokio::sync::{mpsc, Notify};
use tokio::time::Instant;

use migbot_core::message::OutboundMessage;

use crate::transport::Transport;

#[derive(Debug, Clone)]
pub struct SenderConfig {
    /// Minimum gap between two sends to the same recipient.
    pub delay: Duration,
    /// Retries after the first failed attempt.
    pub retries: u32,
    /// Wait before the first retry; doubled for each further retry.
    pub backoff: Duration,
}

impl Default for SenderConfig {
    fn default() -> Self {
        Self {
            delay: Duration::from_millis(800),
            retries: 3,
            backoff: Duration::from_millis(200),
        }
    }
}

/// One successful send, as seen by the transport.
#[derive(Debug, Clone, Serialize)]
pub struct Delivery {
    pub recipient: String,
    pub seq: u64,
    #[serde(skip)]
    pub at: Instant,
}

struct Job {
    transport: Arc<dyn Transport>,
    messages: Vec<OutboundMessage>,
}

#[derive(Default)]
struct Shared {
    log: Mutex<Vec<Delivery>>,
    /// Messages held back after a delivery failed for good, per recipient.
    parked: DashMap<String, Vec<OutboundMessage>>,
    pending: AtomicUsize,
    idle: Notify,
}

impl Shared {
    fn done(&self, n: usize) {
        if self.pending.fetch_sub(n, Ordering::SeqCst) == n {
            self.idle.notify_waiters();
        }
    }
}

pub struct Outbox {
    cfg: SenderConfig,
    workers: DashMap<String, mpsc::UnboundedSender<Job>>,
    shared: Arc<Shared>,
}

impl Outbox {
    pub fn new(cfg: SenderConfig) -> Self {
        Self {
            cfg,
            workers: DashMap::new(),
            shared: Arc::new(Shared::default()),
        }
    }

    /// Queues a batch behind everything already queued for its recipient.
    /// Must be called from inside a tokio runtime.
    pub fn enqueue(&self, transport: Arc<dyn Transport>, messages: Vec<OutboundMessage>) {
        let Some(first) = messages.first() else { return };
        let recipient = first.recipient_id.clone();
        debug_assert!(messages.iter().all(|m| m.recipient_id == recipient));
        self.shared.pending.fetch_add(messages.len(), Ordering::SeqCst);
        let tx = self
            .workers
            .entry(recipient.clone())
            .or_insert_with(|| {
                let (tx, rx) = mpsc::unbounded_channel();
                tokio::spawn(worker(recipient.clone(), rx, self.cfg.clone(), self.shared.clone()));
                tx
            })
            .clone();
        let n = messages.len();
        if tx.send(Job { transport, messages }).is_err() {
            log::error!("sender for {recipient} has stopped");
            self.shared.done(n);
        }
    }

    pub fn deliveries(&self) -> Vec<Delivery> {
        self.shared.log.lock().expect("delivery log").clone()
    }

    /// Recipients whose queue is parked, with the messages waiting.
    pub fn needs_attention(&self) -> Vec<(String, Vec<OutboundMessage>)> {
        self.shared
            .parked
            .iter()
            .map(|e| (e.key().clone(), e.value().clone()))
            .collect()
    }

    /// Re-queues parked messages for `recipient` in their original order.
    pub fn resume(&self, recipient: &str, transport: Arc<dyn Transport>) -> usize {
        let Some((_, messages)) = self.shared.parked.remove(recipient) else {
            return 0;
        };
        let n = messages.len();
        self.enqueue(transport, messages);
        n
    }

    /// Waits until every queued message was sent or parked.
    pub async fn flush(&self) {
        loop {
            let idle = self.shared.idle.notified();
            tokio::pin!(idle);
            idle.as_mut().enable();
            if self.shared.pending.load(Ordering::SeqCst) == 0 {
                return;
            }
            idle.await;
        }
    }
}

async fn worker(recipient: String, mut rx: mpsc::UnboundedReceiver<Job>, cfg: SenderConfig, shared: Arc<Shared>) {
    let mut last_sent: Option<Instant> = None;
    while let Some(job) = rx.recv().await {
        for msg in job.messages {
            if let Some(mut parked) = shared.parked.get_mut(&recipient) {
                parked.push(msg);
                drop(parked);
                shared.done(1);
                continue;
            }
            if let Some(t) = last_sent {
                tokio::time::sleep_until(t + cfg.delay).await;
            }
            let mut attempt = 0;
            loop {
                match job.transport.deliver(&msg).await {
                    Ok(()) => {
                        let now = Instant::now();
                        shared.log.lock().expect("delivery log").push(Delivery {
                            recipient: recipient.clone(),
                            seq: msg.seq,
                            at: now,
                        });
                        last_sent = Some(now);
                        break;
                    }
                    Err(e) if attempt < cfg.retries => {
                        log::warn!("send to {recipient} seq {} failed ({e}), retrying", msg.seq);
                        tokio::time::sleep(cfg.backoff * 2u32.pow(attempt)).await;
                        attempt += 1;
                    }
                    Err(e) => {
                        log::error!(
                            "send to {recipient} seq {} failed after {} attempts ({e}); queue parked for operator attention",
                            msg.seq,
                            attempt + 1
                        );
                        shared.parked.entry(recipient.clone()).or_default().push(msg.clone());
                        break;
                    }
                }
            }
            shared.done(1);
        }
    }
}
