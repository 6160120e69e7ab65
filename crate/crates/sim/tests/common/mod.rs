#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::Arc;

use migbot_gateway::testing::{in_memory_gateway, RecordingTransport};
use migbot_gateway::Gateway;
use migbot_sim::Script;

pub const LOCALES: [&str; 3] = ["pl", "uk", "en"];

pub fn script_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/scripts").join(name)
}

pub fn script(name: &str) -> Script {
    let text = std::fs::read_to_string(script_path(name)).unwrap();
    migbot_sim::parse(&text).unwrap()
}

pub fn gateway() -> Arc<Gateway> {
    Arc::new(in_memory_gateway(None, Arc::new(RecordingTransport::default())))
}
