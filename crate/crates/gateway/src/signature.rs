//! `X-Hub-Signature` verification: HMAC-SHA1 of the raw request body.

use hmac::{Hmac, Mac};
use sha1::Sha1;
use thiserror::Error;

pub const SIGNATURE_HEADER: &str = "x-hub-signature";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SignatureError {
    #[error("signature header missing or not of the form sha1=<40 lowercase hex>")]
    Malformed,
    #[error("signature does not match the body")]
    Mismatch,
}

impl SignatureError {
    pub fn code(&self) -> &'static str {
        match self {
            SignatureError::Malformed => "MALFORMED_HEADER",
            SignatureError::Mismatch => "SIGNATURE_MISMATCH",
        }
    }
}

fn mac(secret: &[u8]) -> Hmac<Sha1> {
    Hmac::<Sha1>::new_from_slice(secret).expect("HMAC accepts keys of any length")
}

/// `sha1=<hex digest>` for `body`.
pub fn sign(body: &[u8], secret: &[u8]) -> String {
    let mut m = mac(secret);
    m.update(body);
    format!("sha1={}", hex::encode(m.finalize().into_bytes()))
}

pub fn verify_signature(body: &[u8], header: Option<&str>, secret: &[u8]) -> Result<(), SignatureError> {
    let digest = header
        .and_then(|h| h.strip_prefix("sha1="))
        .filter(|d| d.len() == 40 && d.bytes().all(|b| matches!(b, b'0'..=b'9' | b'a'..=b'f')))
        .ok_or(SignatureError::Malformed)?;
    let expected = hex::decode(digest).map_err(|_| SignatureError::Malformed)?;
    let mut m = mac(secret);
    m.update(body);
    // constant-time comparison
    m.verify_slice(&expected).map_err(|_| SignatureError::Mismatch)
}
