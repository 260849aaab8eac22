use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::{AdversaryError, Dictionary};
use crate::crypto::{derive_key, hash, sym_decrypt, CipherMode, Ciphertext, PublicParams};
use crate::protocol::{ChallengePayload, LoginPayload, Message, MessageTag, TAG_USER_KEY};
use crate::simnet::{SendKind, TraceEvent};

/// Which recorded ciphertext the guesses are tested against.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum OfflineTarget {
    /// `C_a = E_Vi(g^a1, r1)`.
    #[default]
    M1,
    /// `C_c = E_Vi(g^c1)`.
    M3,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OfflineReport {
    pub target: OfflineTarget,
    pub mode: CipherMode,
    pub dictionary_size: usize,
    pub checked: usize,
    pub recovered: Option<String>,
    /// Every guess the check accepted. Under PLAIN, all but the true
    /// password are false positives.
    pub positives: Vec<String>,
    /// Always 0: the attack reads the transcript only.
    pub messages_sent: u64,
    #[serde(skip)]
    pub elapsed: Duration,
}

fn target_ciphertext(events: &[TraceEvent], target: OfflineTarget) -> Result<Ciphertext, AdversaryError> {
    let (tag, name) = match target {
        OfflineTarget::M1 => (MessageTag::M1, "M1"),
        OfflineTarget::M3 => (MessageTag::M3, "M3"),
    };
    let event = events
        .iter()
        .find(|e| e.tag == tag.byte() && e.kind == SendKind::Send && e.delivered())
        .ok_or(AdversaryError::MissingMessage(name))?;
    match Message::decode(&event.bytes).map_err(|e| AdversaryError::Malformed(e.to_string()))? {
        Message::M1 { c_a, .. } => Ok(c_a),
        Message::M3 { c_c, .. } => Ok(c_c),
        _ => Err(AdversaryError::Malformed(format!("{name} has the wrong shape"))),
    }
}

fn check(ct: &Ciphertext, guess: &str, params: &PublicParams, mode: CipherMode, target: OfflineTarget) -> bool {
    let key = derive_key(&hash(b"h", guess.as_bytes()), TAG_USER_KEY, mode);
    let Ok(plain) = sym_decrypt(&key, ct) else {
        return false;
    };
    match mode {
        CipherMode::Authenticated => true,
        // recognizable: strict canonical layout and in-range group elements
        CipherMode::Plain => match target {
            OfflineTarget::M1 => LoginPayload::decode(&plain, params, CipherMode::Authenticated).is_ok(),
            OfflineTarget::M3 => ChallengePayload::decode(&plain, params, CipherMode::Authenticated).is_ok(),
        },
    }
}

/// Tests one guess against a recorded honest run, assuming the TSAI
/// verifier `h(guess)`.
pub fn offline_check(
    events: &[TraceEvent],
    guess: &str,
    params: &PublicParams,
    mode: CipherMode,
    target: OfflineTarget,
) -> Result<bool, AdversaryError> {
    let ct = target_ciphertext(events, target)?;
    Ok(check(&ct, guess, params, mode, target))
}

/// Runs [`offline_check`] over the whole dictionary.
pub fn run_offline_attack(
    events: &[TraceEvent],
    dictionary: &Dictionary,
    params: &PublicParams,
    mode: CipherMode,
    target: OfflineTarget,
) -> Result<OfflineReport, AdversaryError> {
    let start = Instant::now();
    let ct = target_ciphertext(events, target)?;
    let positives: Vec<String> =
        dictionary.words().iter().filter(|w| check(&ct, w, params, mode, target)).cloned().collect();
    Ok(OfflineReport {
        target,
        mode,
        dictionary_size: dictionary.len(),
        checked: dictionary.len(),
        recovered: positives.first().cloned(),
        positives,
        messages_sent: 0,
        elapsed: start.elapsed(),
    })
}
