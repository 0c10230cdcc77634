//! Shared-secret authentication. Unknown users and wrong tokens produce the
//! same opaque failure, and the comparison runs over fixed-size digests so
//! timing does not reveal token length or a common prefix. Tokens never
//! reach the ledger or logs; only user ids do.

use std::collections::BTreeMap;

use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
#[error("authentication failed")]
pub struct AuthFailure;

#[derive(Debug, Clone, Default)]
pub struct CredentialStore {
    tokens: BTreeMap<String, String>,
}

fn digest(bytes: &[u8]) -> [u8; 32] {
    Sha256::digest(bytes).into()
}

/// Constant-time equality over the 32-byte digests of both tokens.
fn tokens_match(supplied: &str, stored: &str) -> bool {
    let a = digest(supplied.as_bytes());
    let b = digest(stored.as_bytes());
    let mut diff = 0u8;
    for (x, y) in a.iter().zip(b.iter()) {
        diff |= x ^ y;
    }
    diff == 0
}

impl CredentialStore {
    pub fn new(tokens: BTreeMap<String, String>) -> CredentialStore {
        CredentialStore { tokens }
    }

    pub fn users(&self) -> impl Iterator<Item = &str> {
        self.tokens.keys().map(String::as_str)
    }

    /// Authenticate and return the principal's user id.
    pub fn authenticate(&self, user: &str, token: &str) -> Result<String, AuthFailure> {
        // Hash the supplied token even for unknown users so both paths do
        // comparable work.
        let stored = self.tokens.get(user).map(String::as_str).unwrap_or("");
        if !stored.is_empty() && tokens_match(token, stored) {
            Ok(user.to_string())
        } else {
            Err(AuthFailure)
        }
    }
}

/// Config-time token check: at least 32 hex characters.
pub fn validate_token(token: &str) -> bool {
    token.len() >= 32 && token.bytes().all(|b| b.is_ascii_hexdigit())
}
