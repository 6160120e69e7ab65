//! Outbound message shape shared by the engine, the gateway and the simulator.

use serde::{Deserialize, Serialize};

use crate::localization::Utterance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MessageKind {
    /// Informational text; expects no answer.
    Statement,
    /// Asks the respondent for input. Always the last message of its batch.
    Question,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuickReply {
    pub label: String,
    pub payload: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutboundMessage {
    pub recipient_id: String,
    /// Strictly increasing and gap-free within one session, starting at 1.
    pub seq: u64,
    pub text: String,
    pub kind: MessageKind,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub quick_replies: Vec<QuickReply>,
    /// The catalog source of `text`.
    pub utterance: Utterance,
    /// Chunk index when a long statement was split.
    #[serde(default)]
    pub part: usize,
    pub end_of_batch: bool,
}

/// Splits `text` into pieces of at most `max_chars` characters, preferring
/// line breaks, then sentence ends, then any whitespace. Pieces are trimmed.
pub fn split_chunks(text: &str, max_chars: usize) -> Vec<String> {
    let max_chars = max_chars.max(1);
    let mut chunks = Vec::new();
    let mut rest = text.trim();
    while rest.chars().count() > max_chars {
        let limit = rest
            .char_indices()
            .nth(max_chars)
            .map(|(i, _)| i)
            .unwrap_or(rest.len());
        let head = &rest[..limit];
        let floor = head.len() / 2;
        let cut = head
            .rfind('\n')
            .filter(|&i| i > floor)
            .or_else(|| head.rfind(". ").filter(|&i| i > floor).map(|i| i + 1))
            .or_else(|| head.rfind(char::is_whitespace).filter(|&i| i > 0))
            .unwrap_or(limit);
        chunks.push(rest[..cut].trim_end().to_string());
        rest = rest[cut..].trim_start();
    }
    if !rest.is_empty() || chunks.is_empty() {
        chunks.push(rest.to_string());
    }
    chunks
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn short_text_is_one_chunk() {
        assert_eq!(split_chunks("hello there", 400), vec!["hello there"]);
        assert_eq!(split_chunks("", 400), vec![""]);
    }

    #[test]
    fn splits_on_sentence_end() {
        let text = "First sentence here. Second sentence is longer than that.";
        let chunks = split_chunks(text, 30);
        assert_eq!(chunks[0], "First sentence here.");
        assert!(chunks.iter().all(|c| c.chars().count() <= 30));
    }

    #[test]
    fn hard_cut_without_whitespace() {
        let chunks = split_chunks(&"x".repeat(25), 10);
        assert_eq!(chunks, vec!["x".repeat(10), "x".repeat(10), "x".repeat(5)]);
    }

    #[test]
    fn counts_characters_not_bytes() {
        let text = "ąęść ".repeat(30);
        for chunk in split_chunks(&text, 17) {
            assert!(chunk.chars().count() <= 17);
        }
    }
}
