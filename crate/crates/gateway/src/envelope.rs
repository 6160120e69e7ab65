//! Messenger webhook envelope (inbound) and Send API body (outbound).

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use migbot_core::message::OutboundMessage;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InboundEvent {
    pub sender_id: String,
    pub recipient_page_id: String,
    /// Milliseconds since the epoch, as sent by the platform.
    pub timestamp: i64,
    pub message_text: Option<String>,
    pub quick_reply_payload: Option<String>,
}

impl InboundEvent {
    /// The text handed to the engine. A quick-reply payload wins over the
    /// visible message text.
    pub fn answer_text(&self) -> Option<&str> {
        self.quick_reply_payload
            .as_deref()
            .or(self.message_text.as_deref())
    }
}

#[derive(Debug, Error)]
pub enum EnvelopeError {
    #[error("body is not a webhook envelope: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported object type {0:?}")]
    Object(String),
}

#[derive(Deserialize)]
struct Envelope {
    object: String,
    #[serde(default)]
    entry: Vec<Entry>,
}

#[derive(Deserialize)]
struct Entry {
    #[serde(default)]
    messaging: Vec<Messaging>,
}

#[derive(Deserialize)]
struct Party {
    id: String,
}

#[derive(Deserialize)]
struct Messaging {
    sender: Party,
    recipient: Party,
    #[serde(default)]
    timestamp: i64,
    message: Option<Message>,
}

#[derive(Deserialize)]
struct Message {
    text: Option<String>,
    quick_reply: Option<QuickReplyPayload>,
    #[serde(default)]
    is_echo: bool,
}

#[derive(Deserialize)]
struct QuickReplyPayload {
    payload: String,
}

/// Extracts message events. Delivery and read receipts, echoes of the page's
/// own messages and events without a sender are skipped.
pub fn parse_envelope(body: &[u8]) -> Result<Vec<InboundEvent>, EnvelopeError> {
    let env: Envelope = serde_json::from_slice(body)?;
    if env.object != "page" {
        return Err(EnvelopeError::Object(env.object));
    }
    let mut events = Vec::new();
    for m in env.entry.into_iter().flat_map(|e| e.messaging) {
        let Some(message) = m.message else { continue };
        if message.is_echo {
            continue;
        }
        if m.sender.id.is_empty() {
            log::warn!("dropping message event without sender id");
            continue;
        }
        events.push(InboundEvent {
            sender_id: m.sender.id,
            recipient_page_id: m.recipient.id,
            timestamp: m.timestamp,
            message_text: message.text,
            quick_reply_payload: message.quick_reply.map(|q| q.payload),
        });
    }
    Ok(events)
}

/// Builds an envelope carrying one text message; the inverse of [`parse_envelope`].
pub fn envelope_for(event: &InboundEvent) -> Value {
    let mut message = json!({ "mid": format!("m.{}.{}", event.sender_id, event.timestamp) });
    if let Some(text) = &event.message_text {
        message["text"] = json!(text);
    }
    if let Some(payload) = &event.quick_reply_payload {
        message["quick_reply"] = json!({ "payload": payload });
    }
    json!({
        "object": "page",
        "entry": [{
            "id": event.recipient_page_id,
            "time": event.timestamp,
            "messaging": [{
                "sender": { "id": event.sender_id },
                "recipient": { "id": event.recipient_page_id },
                "timestamp": event.timestamp,
                "message": message,
            }],
        }],
    })
}

/// Send API request body for one outbound message.
pub fn send_api_body(msg: &OutboundMessage) -> Value {
    let mut message = json!({ "text": msg.text });
    if !msg.quick_replies.is_empty() {
        message["quick_replies"] = msg
            .quick_replies
            .iter()
            .map(|q| {
                json!({
                    "content_type": "text",
                    "title": q.label,
                    "payload": q.payload.to_string(),
                })
            })
            .collect();
    }
    json!({
        "recipient": { "id": msg.recipient_id },
        "messaging_type": "RESPONSE",
        "message": message,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_and_payload() {
        let body = br#"{"object":"page","entry":[{"id":"P","time":1,"messaging":[
            {"sender":{"id":"U"},"recipient":{"id":"P"},"timestamp":5,
             "message":{"mid":"x","text":"Five","quick_reply":{"payload":"5"}}},
            {"sender":{"id":"U"},"recipient":{"id":"P"},"timestamp":6,"delivery":{"watermark":1}},
            {"sender":{"id":"P"},"recipient":{"id":"U"},"timestamp":7,"message":{"is_echo":true,"text":"hi"}}
        ]}]}"#;
        let events = parse_envelope(body).unwrap();
        assert_eq!(events.len(), 1);
        assert_eq!(events[0].answer_text(), Some("5"));
        assert_eq!(events[0].message_text.as_deref(), Some("Five"));
        assert_eq!(events[0].timestamp, 5);
    }

    #[test]
    fn rejects_other_objects_and_garbage() {
        assert!(matches!(
            parse_envelope(br#"{"object":"user","entry":[]}"#),
            Err(EnvelopeError::Object(_))
        ));
        assert!(parse_envelope(b"not json").is_err());
    }

    #[test]
    fn built_envelopes_parse_back() {
        let e = InboundEvent {
            sender_id: "U9".into(),
            recipient_page_id: "P".into(),
            timestamp: 42,
            message_text: Some("tak".into()),
            quick_reply_payload: None,
        };
        let body = serde_json::to_vec(&envelope_for(&e)).unwrap();
        assert_eq!(parse_envelope(&body).unwrap(), vec![e]);
    }
}
