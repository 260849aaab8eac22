use serde::{Deserialize, Serialize};

use super::{Nonce, ProtocolError, ServerId, UserId};
use crate::crypto::{
    decode_fields, decode_positional, CipherMode, Ciphertext, Digest, Encoder, GroupElement,
    PublicParams, DIGEST_LEN, NONCE_BYTES,
};

/// Leading byte of every wire message.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum MessageTag {
    Reject = 0x00,
    M1 = 0x01,
    M2 = 0x02,
    M3 = 0x03,
    M4 = 0x04,
    M5 = 0x05,
    M6 = 0x06,
}

impl MessageTag {
    pub fn from_byte(b: u8) -> Option<Self> {
        Some(match b {
            0x00 => MessageTag::Reject,
            0x01 => MessageTag::M1,
            0x02 => MessageTag::M2,
            0x03 => MessageTag::M3,
            0x04 => MessageTag::M4,
            0x05 => MessageTag::M5,
            0x06 => MessageTag::M6,
            _ => return None,
        })
    }

    pub fn byte(self) -> u8 {
        self as u8
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Message {
    M1 { user: UserId, c_a: Ciphertext },
    M2 { user: UserId, server: ServerId, c_a: Ciphertext },
    M3 { user: UserId, c_c: Ciphertext },
    M4 { c_k: Ciphertext },
    M5 { user: UserId, server: ServerId, c_k: Ciphertext, c_s: Ciphertext },
    M6 { c_sj: Ciphertext, c_u: Ciphertext },
    /// Carries no stage and no key material.
    Reject,
}

impl Message {
    pub fn tag(&self) -> MessageTag {
        match self {
            Message::M1 { .. } => MessageTag::M1,
            Message::M2 { .. } => MessageTag::M2,
            Message::M3 { .. } => MessageTag::M3,
            Message::M4 { .. } => MessageTag::M4,
            Message::M5 { .. } => MessageTag::M5,
            Message::M6 { .. } => MessageTag::M6,
            Message::Reject => MessageTag::Reject,
        }
    }

    /// `tag || canonical(fields)`
    pub fn encode(&self) -> Vec<u8> {
        let enc = Encoder::new();
        let body = match self {
            Message::M1 { user, c_a } => enc.str(user.as_str()).field(&c_a.to_bytes()),
            Message::M2 { user, server, c_a } => enc
                .str(user.as_str())
                .str(server.as_str())
                .field(&c_a.to_bytes()),
            Message::M3 { user, c_c } => enc.str(user.as_str()).field(&c_c.to_bytes()),
            Message::M4 { c_k } => enc.field(&c_k.to_bytes()),
            Message::M5 { user, server, c_k, c_s } => enc
                .str(user.as_str())
                .str(server.as_str())
                .field(&c_k.to_bytes())
                .field(&c_s.to_bytes()),
            Message::M6 { c_sj, c_u } => enc.field(&c_sj.to_bytes()).field(&c_u.to_bytes()),
            Message::Reject => enc,
        }
        .finish();
        let mut out = Vec::with_capacity(1 + body.len());
        out.push(self.tag().byte());
        out.extend_from_slice(&body);
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, ProtocolError> {
        let (&tag, body) = bytes.split_first().ok_or(ProtocolError::Malformed("empty message"))?;
        let tag = MessageTag::from_byte(tag).ok_or(ProtocolError::Malformed("unknown tag"))?;
        let fields = decode_fields(body)?;
        let expect = |n: usize| {
            if fields.len() == n {
                Ok(())
            } else {
                Err(ProtocolError::Malformed("wrong field count"))
            }
        };
        let user = |b: &[u8]| -> Result<UserId, ProtocolError> {
            UserId::new(std::str::from_utf8(b).map_err(|_| ProtocolError::Malformed("identity is not UTF-8"))?)
        };
        let server = |b: &[u8]| -> Result<ServerId, ProtocolError> {
            ServerId::new(std::str::from_utf8(b).map_err(|_| ProtocolError::Malformed("identity is not UTF-8"))?)
        };
        let ct = |b: &[u8]| Ciphertext::from_bytes(b).map_err(ProtocolError::from);
        Ok(match tag {
            MessageTag::M1 => {
                expect(2)?;
                Message::M1 { user: user(fields[0])?, c_a: ct(fields[1])? }
            }
            MessageTag::M2 => {
                expect(3)?;
                Message::M2 { user: user(fields[0])?, server: server(fields[1])?, c_a: ct(fields[2])? }
            }
            MessageTag::M3 => {
                expect(2)?;
                Message::M3 { user: user(fields[0])?, c_c: ct(fields[1])? }
            }
            MessageTag::M4 => {
                expect(1)?;
                Message::M4 { c_k: ct(fields[0])? }
            }
            MessageTag::M5 => {
                expect(4)?;
                Message::M5 {
                    user: user(fields[0])?,
                    server: server(fields[1])?,
                    c_k: ct(fields[2])?,
                    c_s: ct(fields[3])?,
                }
            }
            MessageTag::M6 => {
                expect(2)?;
                Message::M6 { c_sj: ct(fields[0])?, c_u: ct(fields[1])? }
            }
            MessageTag::Reject => {
                expect(0)?;
                Message::Reject
            }
        })
    }

    /// Every ciphertext carried by the message, in wire order.
    pub fn ciphertexts(&self) -> Vec<&Ciphertext> {
        match self {
            Message::M1 { c_a, .. } | Message::M2 { c_a, .. } => vec![c_a],
            Message::M3 { c_c, .. } => vec![c_c],
            Message::M4 { c_k } => vec![c_k],
            Message::M5 { c_k, c_s, .. } => vec![c_k, c_s],
            Message::M6 { c_sj, c_u } => vec![c_sj, c_u],
            Message::Reject => vec![],
        }
    }

    pub fn ciphertexts_mut(&mut self) -> Vec<&mut Ciphertext> {
        match self {
            Message::M1 { c_a, .. } | Message::M2 { c_a, .. } => vec![c_a],
            Message::M3 { c_c, .. } => vec![c_c],
            Message::M4 { c_k } => vec![c_k],
            Message::M5 { c_k, c_s, .. } => vec![c_k, c_s],
            Message::M6 { c_sj, c_u } => vec![c_sj, c_u],
            Message::Reject => vec![],
        }
    }
}

/// Shape of one plaintext field as the receiver expects it.
#[derive(Debug, Clone, Copy)]
enum Field {
    Fixed(usize),
    /// Variable-length text; the width is only used for positional reads.
    Text(usize),
}

impl Field {
    fn width(self) -> usize {
        match self {
            Field::Fixed(w) | Field::Text(w) => w,
        }
    }
}

/// Authenticated plaintexts are decoded strictly. Plain-mode plaintexts are
/// read positionally so that wrong-key garbage keeps flowing downstream.
fn read_fields<'a>(
    plain: &'a [u8],
    schema: &[Field],
    mode: CipherMode,
) -> Result<Vec<&'a [u8]>, ProtocolError> {
    match mode {
        CipherMode::Authenticated => {
            let fields = decode_fields(plain)?;
            if fields.len() != schema.len() {
                return Err(ProtocolError::Malformed("wrong plaintext field count"));
            }
            for (f, spec) in fields.iter().zip(schema) {
                if let Field::Fixed(w) = spec {
                    if f.len() != *w {
                        return Err(ProtocolError::Malformed("wrong plaintext field width"));
                    }
                }
            }
            Ok(fields)
        }
        CipherMode::Plain => {
            let widths: Vec<usize> = schema.iter().map(|f| f.width()).collect();
            Ok(decode_positional(plain, &widths)?)
        }
    }
}

fn read_group(bytes: &[u8], params: &PublicParams, mode: CipherMode) -> Result<GroupElement, ProtocolError> {
    match mode {
        CipherMode::Authenticated => Ok(GroupElement::from_bytes(bytes, params)?),
        CipherMode::Plain => Ok(GroupElement::coerce(bytes, params)),
    }
}

fn read_nonce(bytes: &[u8]) -> Nonce {
    bytes.try_into().expect("width checked by schema")
}

/// Plaintext of `C_a`: `(g^a1, r1)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoginPayload {
    pub g_a: GroupElement,
    pub r_1: Nonce,
}

impl LoginPayload {
    pub fn encode(&self, params: &PublicParams) -> Vec<u8> {
        Encoder::new().group(&self.g_a, params).field(&self.r_1).finish()
    }

    pub fn decode(plain: &[u8], params: &PublicParams, mode: CipherMode) -> Result<Self, ProtocolError> {
        let schema = [Field::Fixed(params.group_byte_len()), Field::Fixed(NONCE_BYTES)];
        let f = read_fields(plain, &schema, mode)?;
        Ok(Self { g_a: read_group(f[0], params, mode)?, r_1: read_nonce(f[1]) })
    }
}

/// Plaintext of `C_c`: `g^c1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChallengePayload {
    pub g_c: GroupElement,
}

impl ChallengePayload {
    pub fn encode(&self, params: &PublicParams) -> Vec<u8> {
        Encoder::new().group(&self.g_c, params).finish()
    }

    pub fn decode(plain: &[u8], params: &PublicParams, mode: CipherMode) -> Result<Self, ProtocolError> {
        let f = read_fields(plain, &[Field::Fixed(params.group_byte_len())], mode)?;
        Ok(Self { g_c: read_group(f[0], params, mode)? })
    }
}

/// Plaintext of `C_k`: `(ID_i, SID_j, r1)`. Identities are kept as raw bytes
/// because a plain-mode wrong-key read yields arbitrary bytes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfirmPayload {
    pub user: Vec<u8>,
    pub server: Vec<u8>,
    pub r_1: Nonce,
}

impl ConfirmPayload {
    pub fn encode(&self) -> Vec<u8> {
        Encoder::new().field(&self.user).field(&self.server).field(&self.r_1).finish()
    }

    pub fn decode(
        plain: &[u8],
        mode: CipherMode,
        user_len: usize,
        server_len: usize,
    ) -> Result<Self, ProtocolError> {
        let schema = [Field::Text(user_len), Field::Text(server_len), Field::Fixed(NONCE_BYTES)];
        let f = read_fields(plain, &schema, mode)?;
        Ok(Self { user: f[0].to_vec(), server: f[1].to_vec(), r_1: read_nonce(f[2]) })
    }
}

/// Plaintext of `C_s`: `(g^b1, H(C_k), ID_i, SID_j, r2)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WrapPayload {
    pub g_b: GroupElement,
    pub h_ck: Digest,
    pub user: Vec<u8>,
    pub server: Vec<u8>,
    pub r_2: Nonce,
}

impl WrapPayload {
    pub fn encode(&self, params: &PublicParams) -> Vec<u8> {
        Encoder::new()
            .group(&self.g_b, params)
            .field(self.h_ck.as_bytes())
            .field(&self.user)
            .field(&self.server)
            .field(&self.r_2)
            .finish()
    }

    pub fn decode(
        plain: &[u8],
        params: &PublicParams,
        mode: CipherMode,
        user_len: usize,
        server_len: usize,
    ) -> Result<Self, ProtocolError> {
        let schema = [
            Field::Fixed(params.group_byte_len()),
            Field::Fixed(DIGEST_LEN),
            Field::Text(user_len),
            Field::Text(server_len),
            Field::Fixed(NONCE_BYTES),
        ];
        let f = read_fields(plain, &schema, mode)?;
        Ok(Self {
            g_b: read_group(f[0], params, mode)?,
            h_ck: Digest::from_slice(f[1]).expect("width checked by schema"),
            user: f[2].to_vec(),
            server: f[3].to_vec(),
            r_2: read_nonce(f[4]),
        })
    }
}

/// Plaintext of both halves of M6: `C_sj = (g^a1, r2, c2)` for the server
/// and `C_u = (g^b1, r1, c2)` for the user.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrantPayload {
    pub peer_share: GroupElement,
    pub echo: Nonce,
    pub c_2: Nonce,
}

impl GrantPayload {
    pub fn encode(&self, params: &PublicParams) -> Vec<u8> {
        Encoder::new()
            .group(&self.peer_share, params)
            .field(&self.echo)
            .field(&self.c_2)
            .finish()
    }

    pub fn decode(plain: &[u8], params: &PublicParams, mode: CipherMode) -> Result<Self, ProtocolError> {
        let schema = [
            Field::Fixed(params.group_byte_len()),
            Field::Fixed(NONCE_BYTES),
            Field::Fixed(NONCE_BYTES),
        ];
        let f = read_fields(plain, &schema, mode)?;
        Ok(Self {
            peer_share: read_group(f[0], params, mode)?,
            echo: read_nonce(f[1]),
            c_2: read_nonce(f[2]),
        })
    }
}
