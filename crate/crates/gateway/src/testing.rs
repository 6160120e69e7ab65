//! In-process helpers for tests and the simulator: a recording transport and
//! a gateway wired to in-memory storage.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};
use std::time::Duration;

use async_trait::async_trait;

use migbot_core::flow::Engine;
use migbot_core::message::OutboundMessage;
use migbot_core::persistence::JsonFileStore;
use migbot_core::Bundle;

use crate::app::{Gateway, GatewayConfig};
use crate::profile::{ProfileProvider, StaticProfiles};
use crate::sender::SenderConfig;
use crate::transport::{Transport, TransportError};

/// Keeps every delivered message; can be told to fail specific sends.
#[derive(Default)]
pub struct RecordingTransport {
    sent: Mutex<Vec<OutboundMessage>>,
    attempts: Mutex<Vec<(String, u64)>>,
    failures: Mutex<HashMap<(String, u64), u32>>,
    latency: Option<Duration>,
}

impl RecordingTransport {
    pub fn with_latency(latency: Duration) -> Self {
        Self {
            latency: Some(latency),
            ..Self::default()
        }
    }

    /// Makes the next `times` attempts to send `seq` to `recipient` fail.
    pub fn fail(&self, recipient: &str, seq: u64, times: u32) {
        self.failures
            .lock()
            .unwrap()
            .insert((recipient.to_string(), seq), times);
    }

    pub fn sent(&self) -> Vec<OutboundMessage> {
        self.sent.lock().unwrap().clone()
    }

    /// Every attempt, failed ones included, in order.
    pub fn attempts(&self) -> Vec<(String, u64)> {
        self.attempts.lock().unwrap().clone()
    }
}

#[async_trait]
impl Transport for RecordingTransport {
    async fn deliver(&self, msg: &OutboundMessage) -> Result<(), TransportError> {
        if let Some(l) = self.latency {
            tokio::time::sleep(l).await;
        }
        let key = (msg.recipient_id.clone(), msg.seq);
        self.attempts.lock().unwrap().push(key.clone());
        if let Some(left) = self.failures.lock().unwrap().get_mut(&key) {
            if *left > 0 {
                *left -= 1;
                return Err(TransportError(format!("injected failure for seq {}", msg.seq)));
            }
        }
        self.sent.lock().unwrap().push(msg.clone());
        Ok(())
    }
}

pub const TEST_VERIFY_TOKEN: &str = "test-verify-token";
pub const TEST_APP_SECRET: &str = "test-app-secret";

pub fn test_config(delay: Duration) -> GatewayConfig {
    GatewayConfig {
        verify_token: TEST_VERIFY_TOKEN.into(),
        app_secret: TEST_APP_SECRET.into(),
        sender: SenderConfig {
            delay,
            retries: 3,
            backoff: Duration::from_millis(5),
        },
        dedupe_window: Duration::from_secs(600),
    }
}

/// The built-in flow, memory-only storage and no inter-message delay.
pub fn in_memory_gateway(
    profiles: Option<Arc<dyn ProfileProvider>>,
    platform: Arc<dyn Transport>,
) -> Gateway {
    Gateway::new(
        test_config(Duration::ZERO),
        Engine::new(Bundle::default_bundle().expect("built-in flow is valid")),
        Box::new(JsonFileStore::in_memory()),
        profiles.unwrap_or_else(|| Arc::new(StaticProfiles::default())),
        platform,
    )
}
