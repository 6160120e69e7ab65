//! Profile lookup on first contact. Failures degrade to empty attributes.

use std::collections::HashMap;
use std::time::Duration;

use async_trait::async_trait;
use serde_json::Value;
use thiserror::Error;

use migbot_core::persistence::ProfileAttributes;

pub const PROFILE_FIELDS: &str = "first_name,last_name,locale,timezone,gender,birthday,hometown,profile_pic";

#[derive(Debug, Error)]
pub enum ProfileError {
    #[error("profile request failed: {0}")]
    Http(String),
    #[error("profile provider answered {0}")]
    Status(u16),
    #[error("unreadable profile: {0}")]
    Body(String),
}

#[async_trait]
pub trait ProfileProvider: Send + Sync {
    async fn fetch(&self, user_id: &str) -> Result<ProfileAttributes, ProfileError>;
}

/// Asks `provider`, logging and swallowing any error.
pub async fn fetch_profile(provider: &dyn ProfileProvider, user_id: &str) -> ProfileAttributes {
    match provider.fetch(user_id).await {
        Ok(p) => p,
        Err(e) => {
            log::warn!("profile for {user_id} unavailable, continuing without it: {e}");
            ProfileAttributes::default()
        }
    }
}

fn text(v: &Value, key: &str) -> Option<String> {
    match v.get(key)? {
        Value::String(s) if !s.is_empty() => Some(s.clone()),
        // hometown arrives as a page object
        Value::Object(o) => o.get("name").and_then(Value::as_str).map(str::to_string),
        _ => None,
    }
}

/// UTC offset as a number or a string such as `"+2.0"`.
pub fn parse_timezone(v: &Value) -> Option<f64> {
    match v {
        Value::Number(n) => n.as_f64(),
        Value::String(s) => s.trim().trim_start_matches('+').parse().ok(),
        _ => None,
    }
}

/// Maps a profile JSON object to attributes; unknown or absent fields stay `None`.
pub fn parse_profile(v: &Value) -> ProfileAttributes {
    ProfileAttributes {
        first_name: text(v, "first_name"),
        last_name: text(v, "last_name"),
        locale: text(v, "locale"),
        hometown: text(v, "hometown"),
        timezone: v.get("timezone").and_then(parse_timezone),
        birthday: text(v, "birthday"),
        gender: text(v, "gender"),
        profile_pic: text(v, "profile_pic"),
    }
}

/// Graph API user profile lookup.
pub struct GraphProfileProvider {
    http: reqwest::Client,
    base_url: String,
    page_token: String,
}

impl GraphProfileProvider {
    pub fn new(base_url: impl Into<String>, page_token: impl Into<String>) -> Self {
        let http = reqwest::Client::builder()
            .timeout(Duration::from_secs(5))
            .build()
            .expect("HTTP client");
        Self {
            http,
            base_url: base_url.into().trim_end_matches('/').to_string(),
            page_token: page_token.into(),
        }
    }
}

#[async_trait]
impl ProfileProvider for GraphProfileProvider {
    async fn fetch(&self, user_id: &str) -> Result<ProfileAttributes, ProfileError> {
        let url = format!(
            "{}/{user_id}?fields={PROFILE_FIELDS}&access_token={}",
            self.base_url, self.page_token
        );
        let resp = self
            .http
            .get(url)
            .send()
            .await
            .map_err(|e| ProfileError::Http(e.without_url().to_string()))?;
        if !resp.status().is_success() {
            return Err(ProfileError::Status(resp.status().as_u16()));
        }
        let body: Value = resp.json().await.map_err(|e| ProfileError::Body(e.to_string()))?;
        Ok(parse_profile(&body))
    }
}

/// Fixed profiles keyed by user id; unknown users get empty attributes.
#[derive(Debug, Default, Clone)]
pub struct StaticProfiles(pub HashMap<String, ProfileAttributes>);

impl StaticProfiles {
    /// Reads a JSON object of user id to profile object.
    pub fn from_json(text: &str) -> Result<Self, ProfileError> {
        let v: Value = serde_json::from_str(text).map_err(|e| ProfileError::Body(e.to_string()))?;
        let obj = v
            .as_object()
            .ok_or_else(|| ProfileError::Body("expected an object of profiles".into()))?;
        Ok(Self(obj.iter().map(|(k, p)| (k.clone(), parse_profile(p))).collect()))
    }
}

#[async_trait]
impl ProfileProvider for StaticProfiles {
    async fn fetch(&self, user_id: &str) -> Result<ProfileAttributes, ProfileError> {
        Ok(self.0.get(user_id).cloned().unwrap_or_default())
    }
}

/// A provider that always refuses, as the platform does without permissions.
pub struct DeniedProfiles;

#[async_trait]
impl ProfileProvider for DeniedProfiles {
    async fn fetch(&self, _user_id: &str) -> Result<ProfileAttributes, ProfileError> {
        Err(ProfileError::Status(403))
    }
}
