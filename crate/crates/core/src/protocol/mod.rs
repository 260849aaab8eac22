//! Message formats and role state machines for the user, the application
//! server and the registration center (RC).
//!
//! One login run is six protocol messages:
//!
//! ```text
//! M1  U  -> S   {ID_i, E_Vi(g^a1, r1)}
//! M2  S  -> RC  {ID_i, SID_j, C_a}
//! M3  RC -> S   {ID_i, E_Vi(g^c1)}                         (relayed to U)
//! M4  U  -> S   {E_K1(ID_i, SID_j, r1)}
//! M5  S  -> RC  {ID_i, SID_j, C_k, E_Vj(g^b1, H(C_k), ID_i, SID_j, r2)}
//! M6  RC -> S   {E_Vj(g^a1, r2, c2), E_K1(g^b1, r1, c2)}    (relayed to U)
//! ```
//!
//! with `K1 = g^(a1 c1)` shared by user and RC, and the session key
//! `SK = g^(a1 b1)` shared by user and server. Both scheme variants use the
//! exact same messages; they differ only in how the password verifier is
//! derived and what the user submits at registration.

mod cost;
mod messages;
mod rc;
mod registry;
mod server;
mod user;

pub use cost::{cost_report, CostReport, OpTally, RoleCost, Transcript};
pub use messages::{
    ChallengePayload, ConfirmPayload, GrantPayload, LoginPayload, Message, MessageTag, WrapPayload,
};
pub use rc::{Outcome, RcLogEntry, RegistrationCenter, RejectStage};
pub use registry::{registration_diff, RcState, RegistrationRequest, UserRecord};
pub use server::{ServerCredentials, ServerPhase, ServerSession};
pub use user::{UserCredentials, UserPhase, UserSession};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::crypto::{hash, xor_bytes, CryptoError, Digest, Rng, NONCE_BYTES};

/// Per-user secret of the improved scheme.
pub type KiSecret = [u8; 32];

pub type Nonce = [u8; NONCE_BYTES];

pub const TAG_USER_KEY: &[u8] = b"enc-user";
pub const TAG_SERVER_KEY: &[u8] = b"enc-server";
pub const TAG_SESSION_KEY: &[u8] = b"enc-session";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SchemeVariant {
    /// Verifier `V_i = h(PW_i)`.
    Tsai,
    /// Verifier `V_i = h(PW_i xor k_i)` with `k_i` known only to the user and the RC.
    Improved,
}

impl fmt::Display for SchemeVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SchemeVariant::Tsai => "TSAI",
            SchemeVariant::Improved => "IMPROVED",
        })
    }
}

impl FromStr for SchemeVariant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "TSAI" => Ok(SchemeVariant::Tsai),
            "IMPROVED" => Ok(SchemeVariant::Improved),
            other => Err(format!("unknown variant `{other}` (expected TSAI or IMPROVED)")),
        }
    }
}

macro_rules! identity_newtype {
    ($name:ident, $what:literal) => {
        #[doc = concat!("Non-empty UTF-8 ", $what, " identity.")]
        #[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        #[serde(try_from = "String", into = "String")]
        pub struct $name(String);

        impl $name {
            pub fn new(id: impl Into<String>) -> Result<Self, ProtocolError> {
                let id = id.into();
                if id.is_empty() {
                    return Err(ProtocolError::EmptyIdentity);
                }
                Ok(Self(id))
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }

            pub fn as_bytes(&self) -> &[u8] {
                self.0.as_bytes()
            }
        }

        impl TryFrom<String> for $name {
            type Error = ProtocolError;
            fn try_from(s: String) -> Result<Self, Self::Error> {
                Self::new(s)
            }
        }

        impl From<$name> for String {
            fn from(id: $name) -> String {
                id.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }
    };
}

identity_newtype!(UserId, "user");
identity_newtype!(ServerId, "server");

/// Password verifier `V_i`, shared by the user and the RC.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Verifier(pub Digest);

/// TSAI: `h(PW)`. IMPROVED: `h(PW xor k_i)` with the shorter operand zero-padded.
pub fn derive_verifier(
    variant: SchemeVariant,
    password: &[u8],
    k_i: Option<&KiSecret>,
) -> Result<Verifier, ProtocolError> {
    match (variant, k_i) {
        (SchemeVariant::Tsai, None) => Ok(Verifier(hash(b"h", password))),
        (SchemeVariant::Improved, Some(k)) => Ok(Verifier(hash(b"h", &xor_bytes(password, k)))),
        (SchemeVariant::Tsai, Some(_)) => Err(ProtocolError::VariantMismatch("TSAI takes no k_i")),
        (SchemeVariant::Improved, None) => {
            Err(ProtocolError::VariantMismatch("IMPROVED requires k_i"))
        }
    }
}

/// Draws a `k_i` whose first `bits` bits are random and the rest zero.
/// Scenarios shrink `bits` to make brute-force experiments tractable.
pub fn generate_k_i(rng: &mut Rng, bits: u32) -> KiSecret {
    let bits = bits.clamp(1, 256) as usize;
    let mut k: KiSecret = rng.random_bytes();
    let full = bits / 8;
    let partial = bits % 8;
    if full < k.len() {
        if partial > 0 {
            k[full] &= 0xffu8 << (8 - partial);
            k[full + 1..].fill(0);
        } else {
            k[full..].fill(0);
        }
    }
    k
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProtocolError {
    #[error(transparent)]
    Crypto(#[from] CryptoError),
    #[error("identity must be non-empty")]
    EmptyIdentity,
    #[error("variant mismatch: {0}")]
    VariantMismatch(&'static str),
    #[error("user `{0}` already registered")]
    DuplicateUser(String),
    #[error("server `{0}` already registered")]
    DuplicateServer(String),
    #[error("unknown user `{0}`")]
    UnknownUser(String),
    #[error("unknown server `{0}`")]
    UnknownServer(String),
    #[error("malformed message: {0}")]
    Malformed(&'static str),
    #[error("unexpected message {got:?} in phase {phase}")]
    Unexpected { got: MessageTag, phase: &'static str },
    #[error("decryption failed")]
    Decrypt,
    #[error("echoed nonce does not match")]
    NonceMismatch,
    #[error("identity in payload does not match session")]
    IdentityMismatch,
    #[error("login rejected by the registration center")]
    Rejected,
    #[error("incomplete transcript: {0}")]
    IncompleteTranscript(&'static str),
    #[error("registry file: {0}")]
    Registry(String),
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tsai_verifier_is_plain_hash() {
        let v = derive_verifier(SchemeVariant::Tsai, b"pw", None).unwrap();
        assert_eq!(v.0, hash(b"h", b"pw"));
    }

    #[test]
    fn improved_verifier_with_zero_password_is_hash_of_k() {
        let k: KiSecret = core::array::from_fn(|i| i as u8 * 7 + 1);
        let v = derive_verifier(SchemeVariant::Improved, &[0u8; 32], Some(&k)).unwrap();
        assert_eq!(v.0, hash(b"h", &k));
    }

    #[test]
    fn improved_verifier_collides_exactly_on_equal_xor() {
        let k1: KiSecret = [0x5a; 32];
        let pw1 = b"correct horse".to_vec();
        let mut pw2 = xor_bytes(&pw1, &[0x0f; 13]);
        // pw2 xor k2 == pw1 xor k1  <=>  k2 = pw1 xor k1 xor pw2 (on 32 bytes)
        let k2: KiSecret = xor_bytes(&xor_bytes(&pw1, &k1), &pw2).try_into().unwrap();
        let a = derive_verifier(SchemeVariant::Improved, &pw1, Some(&k1)).unwrap();
        let b = derive_verifier(SchemeVariant::Improved, &pw2, Some(&k2)).unwrap();
        assert_eq!(a, b);
        pw2[0] ^= 1;
        let c = derive_verifier(SchemeVariant::Improved, &pw2, Some(&k2)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn k_i_presence_must_match_variant() {
        assert!(matches!(
            derive_verifier(SchemeVariant::Tsai, b"pw", Some(&[0; 32])),
            Err(ProtocolError::VariantMismatch(_))
        ));
        assert!(matches!(
            derive_verifier(SchemeVariant::Improved, b"pw", None),
            Err(ProtocolError::VariantMismatch(_))
        ));
    }

    #[test]
    fn shrunk_k_i_has_only_leading_random_bits() {
        let mut rng = Rng::new(3, "ki");
        for _ in 0..200 {
            let k = generate_k_i(&mut rng, 12);
            assert_eq!(k[1] & 0x0f, 0);
            assert!(k[2..].iter().all(|&b| b == 0));
        }
        let full = generate_k_i(&mut rng, 256);
        assert!(full.iter().any(|&b| b != 0));
    }

    #[test]
    fn identities_must_be_non_empty() {
        assert_eq!(UserId::new(""), Err(ProtocolError::EmptyIdentity));
        assert!(ServerId::new("S1").is_ok());
    }

    #[test]
    fn variant_parses() {
        assert_eq!("tsai".parse::<SchemeVariant>(), Ok(SchemeVariant::Tsai));
        assert_eq!("IMPROVED".parse::<SchemeVariant>(), Ok(SchemeVariant::Improved));
    }
}
