//! Messenger-compatible webhook gateway around the survey engine, with a
//! loopback channel for local clients.

pub mod app;
pub mod config;
pub mod envelope;
pub mod profile;
pub mod sender;
pub mod signature;
pub mod testing;
pub mod transport;

pub use app::{Channel, Gateway, GatewayConfig, GatewayError, Handled};
