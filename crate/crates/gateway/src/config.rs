//! Command-line and environment configuration for `migbot serve`.

use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use clap::Args;

use migbot_core::flow::Engine;
use migbot_core::persistence::{JsonFileStore, RecordStore};
use migbot_core::Bundle;

use crate::app::{Gateway, GatewayConfig};
use crate::profile::{GraphProfileProvider, ProfileProvider, StaticProfiles};
use crate::sender::SenderConfig;
use crate::transport::GraphSendClient;

#[derive(Debug, Clone, Args)]
pub struct ServeArgs {
    /// Address to listen on.
    #[arg(long, env = "MIGBOT_BIND", default_value = "127.0.0.1:8080")]
    pub bind: String,
    /// Page access token for the Send and profile APIs.
    #[arg(long, env = "MIGBOT_PAGE_TOKEN", default_value = "")]
    pub page_token: String,
    /// Token expected in the webhook subscription handshake.
    #[arg(long, env = "MIGBOT_VERIFY_TOKEN")]
    pub verify_token: String,
    /// App secret used to check X-Hub-Signature.
    #[arg(long, env = "MIGBOT_APP_SECRET")]
    pub app_secret: String,
    /// Pause between consecutive messages to one user, in milliseconds.
    /// Defaults to the flow's message_delay_ms.
    #[arg(long, env = "MIGBOT_DELAY_MS")]
    pub delay_ms: Option<u64>,
    /// Overrides the flow's intent_threshold.
    #[arg(long, env = "MIGBOT_INTENT_THRESHOLD")]
    pub intent_threshold: Option<f64>,
    /// Record store file.
    #[arg(long, env = "MIGBOT_STORE", default_value = "migbot-store.json")]
    pub store: PathBuf,
    /// Directory with flow.toml and catalog/*.catalog; the built-in flow otherwise.
    #[arg(long, env = "MIGBOT_CONFIG_DIR")]
    pub config_dir: Option<PathBuf>,
    /// Graph API base URL.
    #[arg(long, env = "MIGBOT_GRAPH_URL", default_value = "https://graph.facebook.com/v2.6")]
    pub graph_url: String,
    /// JSON file of user id to profile; replaces the Graph profile lookup.
    #[arg(long, env = "MIGBOT_PROFILES")]
    pub profiles: Option<PathBuf>,
}

impl ServeArgs {
    pub fn build(&self) -> Result<Gateway, String> {
        let mut bundle = match &self.config_dir {
            Some(dir) => Bundle::from_dir(dir),
            None => Bundle::default_bundle(),
        }
        .map_err(|e| e.to_string())?;
        if let Some(t) = self.intent_threshold {
            if !(0.0..=1.0).contains(&t) {
                return Err(format!("intent threshold {t} outside [0, 1]"));
            }
            bundle.flow.settings.intent_threshold = t;
        }
        let delay = Duration::from_millis(self.delay_ms.unwrap_or(bundle.flow.settings.message_delay_ms));
        let store: Box<dyn RecordStore> = Box::new(JsonFileStore::open(&self.store).map_err(|e| e.to_string())?);
        let profiles: Arc<dyn ProfileProvider> = match &self.profiles {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
                Arc::new(StaticProfiles::from_json(&text).map_err(|e| e.to_string())?)
            }
            None => Arc::new(GraphProfileProvider::new(&self.graph_url, &self.page_token)),
        };
        let cfg = GatewayConfig {
            verify_token: self.verify_token.clone(),
            app_secret: self.app_secret.clone(),
            sender: SenderConfig {
                delay,
                ..SenderConfig::default()
            },
            dedupe_window: Duration::from_secs(600),
        };
        Ok(Gateway::new(
            cfg,
            Engine::new(bundle),
            store,
            profiles,
            Arc::new(GraphSendClient::new(&self.graph_url, &self.page_token)),
        ))
    }
}
