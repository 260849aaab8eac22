//! The malicious-server attacker: online guessing through genuine protocol
//! runs, offline guessing against a recorded transcript, and a differ for
//! what the RC can observe on the wire.

mod offline;
mod online;
mod wire;

use std::collections::HashSet;
use std::io::BufRead;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::crypto::NONCE_LEN;
use crate::protocol::Message;

pub use offline::{offline_check, run_offline_attack, OfflineReport, OfflineTarget};
pub use online::{
    interpret_outcome, run_online_attack, AttackReport, Attacker, AttemptRecord, GuessAttempt,
    KiKnowledge,
};
pub use wire::{rc_wire_view, wire_diff, Direction, WireEvent};

#[derive(Debug, Error)]
pub enum AdversaryError {
    #[error("dictionary is empty")]
    EmptyDictionary,
    #[error("duplicate dictionary entry {0:?}")]
    DuplicateEntry(String),
    #[error("reading dictionary: {0}")]
    Io(#[from] std::io::Error),
    #[error("transcript has no {0} event")]
    MissingMessage(&'static str),
    #[error("transcript message does not decode: {0}")]
    Malformed(String),
}

/// Ordered candidate passwords. Nonempty, no duplicates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dictionary {
    words: Vec<String>,
}

impl Dictionary {
    pub fn new<I, S>(words: I) -> Result<Self, AdversaryError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let words: Vec<String> = words.into_iter().map(Into::into).collect();
        if words.is_empty() {
            return Err(AdversaryError::EmptyDictionary);
        }
        let mut seen = HashSet::with_capacity(words.len());
        for w in &words {
            if !seen.insert(w.as_str()) {
                return Err(AdversaryError::DuplicateEntry(w.clone()));
            }
        }
        Ok(Self { words })
    }

    /// One candidate per line; blank lines are skipped, trailing `\r` stripped.
    pub fn from_reader(reader: impl BufRead) -> Result<Self, AdversaryError> {
        let mut words = Vec::new();
        for line in reader.lines() {
            let line = line?;
            let w = line.trim_end_matches('\r');
            if !w.is_empty() {
                words.push(w.to_owned());
            }
        }
        Self::new(words)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, AdversaryError> {
        let f = std::fs::File::open(path)?;
        Self::from_reader(std::io::BufReader::new(f))
    }

    /// `count` distinct synthetic words `w0000, w0001, ...`.
    pub fn synthetic(count: usize) -> Result<Self, AdversaryError> {
        Self::new((0..count).map(|i| format!("w{i:04}")))
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// 1-based position of `word`.
    pub fn position(&self, word: &str) -> Option<usize> {
        self.words.iter().position(|w| w == word).map(|i| i + 1)
    }
}

/// Bytes available for tampering in an encoded message: the nonce and
/// body of each ciphertext, concatenated.
pub fn ciphertext_span(wire: &[u8]) -> Option<usize> {
    let msg = Message::decode(wire).ok()?;
    Some(msg.ciphertexts().iter().map(|c| NONCE_LEN + c.body.len()).sum())
}

/// XORs `mask` into byte `offset` of [`ciphertext_span`] and re-encodes.
/// `None` if the message does not decode or `offset` is out of range.
pub fn flip_ciphertext_byte(wire: &[u8], offset: usize, mask: u8) -> Option<Vec<u8>> {
    let mut msg = Message::decode(wire).ok()?;
    let mut offset = offset;
    for ct in msg.ciphertexts_mut() {
        if offset < NONCE_LEN {
            ct.nonce[offset] ^= mask;
            return Some(msg.encode());
        }
        offset -= NONCE_LEN;
        if offset < ct.body.len() {
            ct.body[offset] ^= mask;
            return Some(msg.encode());
        }
        offset -= ct.body.len();
    }
    None
}
