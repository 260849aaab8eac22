use std::fmt;

use sha2::{Digest as _, Sha256};

use super::CipherMode;

pub const DIGEST_LEN: usize = 32;

/// A 32-byte hash output.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Digest(pub [u8; DIGEST_LEN]);

impl Digest {
    pub fn as_bytes(&self) -> &[u8; DIGEST_LEN] {
        &self.0
    }

    pub fn from_slice(bytes: &[u8]) -> Option<Self> {
        bytes.try_into().ok().map(Digest)
    }

    pub fn to_hex(&self) -> String {
        hex::encode(self.0)
    }
}

impl fmt::Debug for Digest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Digest({})", self.to_hex())
    }
}

/// SHA-256 over `len(tag) || tag || data`, with a 2-byte big-endian length.
pub fn hash(domain_tag: &[u8], data: &[u8]) -> Digest {
    let mut h = Sha256::new();
    h.update((domain_tag.len() as u16).to_be_bytes());
    h.update(domain_tag);
    h.update(data);
    Digest(h.finalize().into())
}

/// Symmetric key bound to a cipher mode.
#[derive(Clone, PartialEq, Eq)]
pub struct SymKey {
    bytes: [u8; 32],
    mode: CipherMode,
}

impl SymKey {
    pub fn bytes(&self) -> &[u8; 32] {
        &self.bytes
    }

    pub fn mode(&self) -> CipherMode {
        self.mode
    }
}

impl fmt::Debug for SymKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SymKey({:?}, {}..)", self.mode, hex::encode(&self.bytes[..4]))
    }
}

/// key = hash("kdf" || tag, v)
pub fn derive_key(v: &Digest, tag: &[u8], mode: CipherMode) -> SymKey {
    let mut domain = b"kdf".to_vec();
    domain.extend_from_slice(tag);
    SymKey { bytes: hash(&domain, v.as_bytes()).0, mode }
}
