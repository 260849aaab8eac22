use std::fmt;
use std::str::FromStr;

use chacha20::cipher::{KeyIvInit, StreamCipher};
use chacha20::ChaCha20;
use chacha20poly1305::aead::{Aead, KeyInit};
use chacha20poly1305::{ChaCha20Poly1305, Key, Nonce};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{CryptoError, Rng, SymKey};

pub const NONCE_LEN: usize = 12;

/// How `E_k(.)` behaves under a wrong key.
///
/// `Authenticated` is ChaCha20-Poly1305: a wrong key is detected.
/// `Plain` is bare ChaCha20: decryption always "succeeds" and yields
/// keystream-scrambled bytes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CipherMode {
    Authenticated,
    Plain,
}

impl CipherMode {
    fn wire_tag(self) -> u8 {
        match self {
            CipherMode::Authenticated => 0x01,
            CipherMode::Plain => 0x02,
        }
    }

    fn from_wire_tag(tag: u8) -> Option<Self> {
        match tag {
            0x01 => Some(CipherMode::Authenticated),
            0x02 => Some(CipherMode::Plain),
            _ => None,
        }
    }
}

impl fmt::Display for CipherMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CipherMode::Authenticated => "AUTHENTICATED",
            CipherMode::Plain => "PLAIN",
        })
    }
}

impl FromStr for CipherMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "AUTHENTICATED" | "AUTH" | "AEAD" => Ok(CipherMode::Authenticated),
            "PLAIN" => Ok(CipherMode::Plain),
            other => Err(format!("unknown cipher mode `{other}` (expected AUTHENTICATED or PLAIN)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Ciphertext {
    pub mode: CipherMode,
    pub nonce: [u8; NONCE_LEN],
    pub body: Vec<u8>,
}

impl Ciphertext {
    /// `mode tag || nonce || body`
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(1 + NONCE_LEN + self.body.len());
        out.push(self.mode.wire_tag());
        out.extend_from_slice(&self.nonce);
        out.extend_from_slice(&self.body);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, CryptoError> {
        if bytes.len() < 1 + NONCE_LEN {
            return Err(CryptoError::Encoding("ciphertext shorter than header"));
        }
        let mode = CipherMode::from_wire_tag(bytes[0])
            .ok_or(CryptoError::Encoding("unknown ciphertext mode tag"))?;
        let mut nonce = [0u8; NONCE_LEN];
        nonce.copy_from_slice(&bytes[1..1 + NONCE_LEN]);
        Ok(Self { mode, nonce, body: bytes[1 + NONCE_LEN..].to_vec() })
    }

    pub fn encoded_len(&self) -> usize {
        1 + NONCE_LEN + self.body.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("decryption failed: wrong key or tampered ciphertext")]
pub struct DecryptFailure;

pub fn sym_encrypt(key: &SymKey, plaintext: &[u8], rng: &mut Rng) -> Ciphertext {
    let mut nonce = [0u8; NONCE_LEN];
    rng.fill_bytes(&mut nonce);
    let body = match key.mode() {
        CipherMode::Authenticated => ChaCha20Poly1305::new(Key::from_slice(key.bytes()))
            .encrypt(Nonce::from_slice(&nonce), plaintext)
            .expect("chacha20poly1305 encryption of in-memory buffer"),
        CipherMode::Plain => {
            let mut buf = plaintext.to_vec();
            ChaCha20::new(key.bytes().into(), (&nonce).into()).apply_keystream(&mut buf);
            buf
        }
    };
    Ciphertext { mode: key.mode(), nonce, body }
}

/// Fails only in `Authenticated` mode, or when the ciphertext's mode tag
/// does not match the key.
pub fn sym_decrypt(key: &SymKey, ct: &Ciphertext) -> Result<Vec<u8>, DecryptFailure> {
    if ct.mode != key.mode() {
        return Err(DecryptFailure);
    }
    match ct.mode {
        CipherMode::Authenticated => ChaCha20Poly1305::new(Key::from_slice(key.bytes()))
            .decrypt(Nonce::from_slice(&ct.nonce), ct.body.as_slice())
            .map_err(|_| DecryptFailure),
        CipherMode::Plain => {
            let mut buf = ct.body.clone();
            ChaCha20::new(key.bytes().into(), (&ct.nonce).into()).apply_keystream(&mut buf);
            Ok(buf)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crypto::{derive_key, hash};

    fn key(i: u32, mode: CipherMode) -> SymKey {
        derive_key(&hash(b"h", &i.to_be_bytes()), b"test", mode)
    }

    #[test]
    fn round_trip_both_modes() {
        let mut rng = Rng::new(1, "cipher-test");
        for mode in [CipherMode::Authenticated, CipherMode::Plain] {
            let k = key(0, mode);
            let ct = sym_encrypt(&k, b"hello group", &mut rng);
            assert_eq!(sym_decrypt(&k, &ct).unwrap(), b"hello group");
            let parsed = Ciphertext::from_bytes(&ct.to_bytes()).unwrap();
            assert_eq!(parsed, ct);
        }
    }

    #[test]
    fn authenticated_wrong_key_always_fails() {
        let mut rng = Rng::new(2, "cipher-test");
        for i in 0..100 {
            let k1 = key(2 * i, CipherMode::Authenticated);
            let k2 = key(2 * i + 1, CipherMode::Authenticated);
            let ct = sym_encrypt(&k1, b"g^a || r", &mut rng);
            assert_eq!(sym_decrypt(&k2, &ct), Err(DecryptFailure));
        }
    }

    #[test]
    fn plain_wrong_key_returns_different_bytes() {
        let mut rng = Rng::new(3, "cipher-test");
        let msg = b"some canonical plaintext";
        for i in 0..100 {
            let k1 = key(2 * i, CipherMode::Plain);
            let k2 = key(2 * i + 1, CipherMode::Plain);
            let ct = sym_encrypt(&k1, msg, &mut rng);
            let out = sym_decrypt(&k2, &ct).expect("plain mode never fails");
            assert_eq!(out.len(), msg.len());
            assert_ne!(&out[..], &msg[..]);
        }
    }

    #[test]
    fn mode_mismatch_is_a_failure() {
        let mut rng = Rng::new(4, "cipher-test");
        let ct = sym_encrypt(&key(0, CipherMode::Plain), b"x", &mut rng);
        assert!(sym_decrypt(&key(0, CipherMode::Authenticated), &ct).is_err());
    }

    #[test]
    fn truncated_or_unknown_header_is_rejected() {
        assert!(Ciphertext::from_bytes(&[1, 2, 3]).is_err());
        let mut raw = vec![9u8];
        raw.extend_from_slice(&[0u8; NONCE_LEN]);
        assert!(Ciphertext::from_bytes(&raw).is_err());
    }
}
