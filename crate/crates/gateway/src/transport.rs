//! Where outbound messages go: the platform Send API or the loopback mailbox.

use std::time::Duration;

use async_trait::async_trait;
use dashmap::DashMap;
use thiserror::Error;
use tokio::sync::Notify;

use migbot_core::message::OutboundMessage;

use crate::envelope::send_api_body;

#[derive(Debug, Clone, Error)]
#[error("transport failure: {0}")]
pub struct TransportError(pub String);

#[async_trait]
pub trait Transport: Send + Sync {
    async fn deliver(&self, msg: &OutboundMessage) -> Result<(), TransportError>;
}

/// Messenger Send API client.
pub struct GraphSendClient {
    http: reqwest::Client,
    url: String,
}

impl GraphSendClient {
    pub fn new(base_url: &str, page_token: &str) -> Self {
        let http = reqwest::Client::builder()
            .timeout(Duration::from_secs(10))
            .build()
            .expect("HTTP client");
        Self {
            http,
            url: format!(
                "{}/me/messages?access_token={page_token}",
                base_url.trim_end_matches('/')
            ),
        }
    }
}

#[async_trait]
impl Transport for GraphSendClient {
    async fn deliver(&self, msg: &OutboundMessage) -> Result<(), TransportError> {
        let resp = self
            .http
            .post(&self.url)
            .json(&send_api_body(msg))
            .send()
            .await
            .map_err(|e| TransportError(e.without_url().to_string()))?;
        if resp.status().is_success() {
            Ok(())
        } else {
            Err(TransportError(format!("Send API answered {}", resp.status())))
        }
    }
}

/// Delivered messages per simulated user, readable by long-polling clients.
#[derive(Default)]
pub struct Mailbox {
    boxes: DashMap<String, Vec<OutboundMessage>>,
    arrived: Notify,
}

impl Mailbox {
    pub fn after(&self, user: &str, after: u64) -> Vec<OutboundMessage> {
        self.boxes
            .get(user)
            .map(|b| b.iter().filter(|m| m.seq > after).cloned().collect())
            .unwrap_or_default()
    }

    /// Messages with `seq > after`, waiting up to `wait` for at least one.
    pub async fn wait_after(&self, user: &str, after: u64, wait: Duration) -> Vec<OutboundMessage> {
        let deadline = tokio::time::Instant::now() + wait;
        loop {
            let notified = self.arrived.notified();
            tokio::pin!(notified);
            notified.as_mut().enable();
            let found = self.after(user, after);
            if !found.is_empty() {
                return found;
            }
            if tokio::time::timeout_at(deadline, notified).await.is_err() {
                return Vec::new();
            }
        }
    }
}

#[async_trait]
impl Transport for Mailbox {
    async fn deliver(&self, msg: &OutboundMessage) -> Result<(), TransportError> {
        self.boxes
            .entry(msg.recipient_id.clone())
            .or_default()
            .push(msg.clone());
        self.arrived.notify_waiters();
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use migbot_core::localization::Utterance;
    use migbot_core::message::MessageKind;
    use std::sync::Arc;

    fn msg(user: &str, seq: u64) -> OutboundMessage {
        OutboundMessage {
            recipient_id: user.into(),
            seq,
            text: format!("m{seq}"),
            kind: MessageKind::Statement,
            quick_replies: vec![],
            utterance: Utterance::new("x"),
            part: 0,
            end_of_batch: false,
        }
    }

    #[tokio::test]
    async fn long_poll_wakes_on_delivery() {
        let mb = Arc::new(Mailbox::default());
        let waiter = {
            let mb = mb.clone();
            tokio::spawn(async move { mb.wait_after("u", 0, Duration::from_secs(5)).await })
        };
        tokio::time::sleep(Duration::from_millis(20)).await;
        mb.deliver(&msg("u", 1)).await.unwrap();
        let got = waiter.await.unwrap();
        assert_eq!(got.len(), 1);
        assert!(mb.wait_after("u", 1, Duration::from_millis(10)).await.is_empty());
        assert!(mb.after("other", 0).is_empty());
    }
}
