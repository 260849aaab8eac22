//! Deterministic, parameter-driven primitives shared by every role.
//!
//! Nothing in here is constant-time. The group arithmetic, hash, key
//! derivation and cipher wrappers exist so that protocol runs are exactly
//! reproducible from a seed, which is what the simulator and the attack
//! harness rely on.

mod cipher;
mod encoding;
mod group;
mod hash;
mod rng;

pub use cipher::{sym_decrypt, sym_encrypt, CipherMode, Ciphertext, DecryptFailure, NONCE_LEN};
pub use encoding::{decode_fields, decode_positional, Encoder, ENCODING_VERSION};
pub use group::{is_probable_prime, mod_exp, GroupElement, GroupId, PublicParams};
pub use hash::{derive_key, hash, Digest, SymKey, DIGEST_LEN};
pub use rng::{Rng, NONCE_BYTES};

use thiserror::Error;

/// Errors raised by parameter validation and canonical decoding.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CryptoError {
    #[error("modulus is not prime")]
    NotPrime,
    #[error("generator must satisfy 1 < g < p and have order greater than 2")]
    BadGenerator,
    #[error("group element out of range [1, p-1]")]
    ElementOutOfRange,
    #[error("group element encoding must be exactly {expected} bytes, got {actual}")]
    ElementWidth { expected: usize, actual: usize },
    #[error("malformed canonical encoding: {0}")]
    Encoding(&'static str),
    #[error("fixture parse error: {0}")]
    Fixture(String),
}

/// Component-wise XOR. The shorter operand is zero-padded on the right, so
/// the result is as long as the longer input.
pub fn xor_bytes(a: &[u8], b: &[u8]) -> Vec<u8> {
    let len = a.len().max(b.len());
    (0..len)
        .map(|i| a.get(i).copied().unwrap_or(0) ^ b.get(i).copied().unwrap_or(0))
        .collect()
}
