//! Two ways to talk to the loopback channel: through a gateway living in the
//! same process, or over HTTP against a running `migbot serve`.

use std::sync::Arc;
use std::time::Duration;

use async_trait::async_trait;
use migbot_core::message::OutboundMessage;
use migbot_gateway::envelope::InboundEvent;
use migbot_gateway::{Channel, Gateway};
use serde::Deserialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ClientError {
    #[error("gateway rejected the message: {0}")]
    Gateway(String),
    #[error("http: {0}")]
    Http(#[from] reqwest::Error),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
pub struct SendReceipt {
    #[serde(default)]
    pub session_id: Option<u64>,
    #[serde(default)]
    pub finalized: bool,
}

#[async_trait]
pub trait Client: Send + Sync {
    async fn send(&self, user: &str, text: &str) -> Result<SendReceipt, ClientError>;

    /// Messages with `seq > after`, waiting up to `wait` for the first one.
    async fn poll(&self, user: &str, after: u64, wait: Duration) -> Result<Vec<OutboundMessage>, ClientError>;
}

pub struct InProcess(pub Arc<Gateway>);

#[async_trait]
impl Client for InProcess {
    async fn send(&self, user: &str, text: &str) -> Result<SendReceipt, ClientError> {
        let ev = InboundEvent {
            sender_id: user.into(),
            recipient_page_id: migbot_gateway::app::LOOPBACK_PAGE.into(),
            timestamp: self.0.next_timestamp(),
            message_text: Some(text.into()),
            quick_reply_payload: None,
        };
        self.0
            .handle_event(&ev, Channel::Loopback)
            .await
            .map_err(|e| ClientError::Gateway(e.to_string()))?;
        let session = self.0.store().session(user);
        Ok(SendReceipt {
            session_id: session.as_ref().map(|s| s.session_id),
            finalized: session.is_some_and(|s| s.finalized),
        })
    }

    async fn poll(&self, user: &str, after: u64, wait: Duration) -> Result<Vec<OutboundMessage>, ClientError> {
        Ok(self.0.mailbox().wait_after(user, after, wait).await)
    }
}

pub struct Http {
    base: String,
    client: reqwest::Client,
}

impl Http {
    pub fn new(base: &str) -> Self {
        Self {
            base: base.trim_end_matches('/').to_string(),
            client: reqwest::Client::new(),
        }
    }
}

#[derive(Deserialize)]
struct Polled {
    messages: Vec<OutboundMessage>,
}

#[async_trait]
impl Client for Http {
    async fn send(&self, user: &str, text: &str) -> Result<SendReceipt, ClientError> {
        let resp = self
            .client
            .post(format!("{}/local/messages", self.base))
            .json(&serde_json::json!({ "user_id": user, "text": text }))
            .send()
            .await?;
        if !resp.status().is_success() {
            let status = resp.status();
            return Err(ClientError::Gateway(format!("{status}: {}", resp.text().await.unwrap_or_default())));
        }
        Ok(resp.json().await?)
    }

    async fn poll(&self, user: &str, after: u64, wait: Duration) -> Result<Vec<OutboundMessage>, ClientError> {
        let wait_ms = wait.as_millis().to_string();
        let after = after.to_string();
        let resp = self
            .client
            .get(format!("{}/local/messages", self.base))
            .query(&[("user", user), ("after", after.as_str()), ("wait_ms", wait_ms.as_str())])
            .timeout(wait + Duration::from_secs(5))
            .send()
            .await?
            .error_for_status()?;
        Ok(resp.json::<Polled>().await?.messages)
    }
}
