use std::collections::BTreeMap;
use std::ops::{Add, AddAssign, Sub};

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use super::{MessageTag, ProtocolError, TAG_SESSION_KEY};
use crate::crypto::{
    derive_key, hash, mod_exp, sym_decrypt, sym_encrypt, CipherMode, Ciphertext, CryptoError,
    DecryptFailure, Digest, GroupElement, PublicParams, Rng, SymKey,
};
use crate::simnet::{PartyLabel, SendKind, TraceEvent};

/// Counts of the expensive operations a role performed. Key derivations
/// count as hashes.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpTally {
    pub exponentiations: u64,
    pub encryptions: u64,
    pub decryptions: u64,
    pub hashes: u64,
}

impl OpTally {
    pub(crate) fn exp(
        &mut self,
        base: &GroupElement,
        exp: &BigUint,
        params: &PublicParams,
    ) -> Result<GroupElement, CryptoError> {
        self.exponentiations += 1;
        mod_exp(base, exp, params)
    }

    pub(crate) fn hash(&mut self, tag: &[u8], data: &[u8]) -> Digest {
        self.hashes += 1;
        hash(tag, data)
    }

    pub(crate) fn key(&mut self, v: &Digest, tag: &[u8], mode: CipherMode) -> SymKey {
        self.hashes += 1;
        derive_key(v, tag, mode)
    }

    /// Keying material for `E_K1`: `kdf(hash("K", K1))`.
    pub(crate) fn session_key(&mut self, k: &GroupElement, params: &PublicParams, mode: CipherMode) -> SymKey {
        let digest = self.hash(b"K", &k.to_bytes(params));
        self.key(&digest, TAG_SESSION_KEY, mode)
    }

    pub(crate) fn seal(&mut self, key: &SymKey, plaintext: &[u8], rng: &mut Rng) -> Ciphertext {
        self.encryptions += 1;
        sym_encrypt(key, plaintext, rng)
    }

    pub(crate) fn open(&mut self, key: &SymKey, ct: &Ciphertext) -> Result<Vec<u8>, DecryptFailure> {
        self.decryptions += 1;
        sym_decrypt(key, ct)
    }
}

impl Add for OpTally {
    type Output = OpTally;
    fn add(self, o: OpTally) -> OpTally {
        OpTally {
            exponentiations: self.exponentiations + o.exponentiations,
            encryptions: self.encryptions + o.encryptions,
            decryptions: self.decryptions + o.decryptions,
            hashes: self.hashes + o.hashes,
        }
    }
}

impl AddAssign for OpTally {
    fn add_assign(&mut self, o: OpTally) {
        *self = *self + o;
    }
}

impl Sub for OpTally {
    type Output = OpTally;
    fn sub(self, o: OpTally) -> OpTally {
        OpTally {
            exponentiations: self.exponentiations - o.exponentiations,
            encryptions: self.encryptions - o.encryptions,
            decryptions: self.decryptions - o.decryptions,
            hashes: self.hashes - o.hashes,
        }
    }
}

/// Wire events of one run plus the operation tallies each role recorded.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transcript {
    pub events: Vec<TraceEvent>,
    pub tallies: BTreeMap<PartyLabel, OpTally>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoleCost {
    /// Messages this role originated.
    pub messages: u64,
    /// Messages this role forwarded verbatim.
    pub relays: u64,
    #[serde(flatten)]
    pub ops: OpTally,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostReport {
    pub roles: BTreeMap<PartyLabel, RoleCost>,
    pub messages: u64,
    pub relays: u64,
    pub bytes: u64,
}

impl CostReport {
    pub fn role(&self, label: PartyLabel) -> RoleCost {
        self.roles.get(&label).copied().unwrap_or_default()
    }
}

/// Exact per-role tallies. A transcript is complete when the RC has sent a
/// terminal message (M6 or REJECT) and operation tallies were recorded.
pub fn cost_report(transcript: &Transcript) -> Result<CostReport, ProtocolError> {
    let terminal = transcript.events.iter().any(|e| {
        e.from.label == PartyLabel::Rc
            && (e.tag == MessageTag::M6.byte() || e.tag == MessageTag::Reject.byte())
    });
    if !terminal {
        return Err(ProtocolError::IncompleteTranscript("no terminal RC message"));
    }
    if transcript.tallies.is_empty() {
        return Err(ProtocolError::IncompleteTranscript("no operation tallies"));
    }
    let mut report = CostReport::default();
    for (label, ops) in &transcript.tallies {
        report.roles.entry(*label).or_default().ops = *ops;
    }
    for e in &transcript.events {
        let role = report.roles.entry(e.from.label).or_default();
        match e.kind {
            SendKind::Relay => {
                role.relays += 1;
                report.relays += 1;
            }
            SendKind::Send | SendKind::Inject => {
                role.messages += 1;
                report.messages += 1;
            }
        }
        report.bytes += e.bytes.len() as u64;
    }
    Ok(report)
}
