//! Canonical plaintext encoding:
//!
//! ```text
//! 0x01 || (len:u16be || bytes)*
//! ```
//!
//! Group elements are written at the fixed group width, identities as UTF-8.

use super::{CryptoError, GroupElement, PublicParams};

pub const ENCODING_VERSION: u8 = 0x01;

#[derive(Debug, Clone)]
pub struct Encoder {
    buf: Vec<u8>,
}

impl Default for Encoder {
    fn default() -> Self {
        Self::new()
    }
}

impl Encoder {
    pub fn new() -> Self {
        Self { buf: vec![ENCODING_VERSION] }
    }

    pub fn field(mut self, bytes: &[u8]) -> Self {
        let len = u16::try_from(bytes.len()).expect("canonical field longer than 65535 bytes");
        self.buf.extend_from_slice(&len.to_be_bytes());
        self.buf.extend_from_slice(bytes);
        self
    }

    pub fn group(self, element: &GroupElement, params: &PublicParams) -> Self {
        self.field(&element.to_bytes(params))
    }

    pub fn str(self, s: &str) -> Self {
        self.field(s.as_bytes())
    }

    pub fn finish(self) -> Vec<u8> {
        self.buf
    }
}

/// Strict decoding: checks the version byte and every length prefix.
pub fn decode_fields(bytes: &[u8]) -> Result<Vec<&[u8]>, CryptoError> {
    let (&version, mut rest) = bytes
        .split_first()
        .ok_or(CryptoError::Encoding("empty input"))?;
    if version != ENCODING_VERSION {
        return Err(CryptoError::Encoding("unsupported version"));
    }
    let mut fields = Vec::new();
    while !rest.is_empty() {
        if rest.len() < 2 {
            return Err(CryptoError::Encoding("truncated length prefix"));
        }
        let len = u16::from_be_bytes([rest[0], rest[1]]) as usize;
        rest = &rest[2..];
        if rest.len() < len {
            return Err(CryptoError::Encoding("field overruns input"));
        }
        fields.push(&rest[..len]);
        rest = &rest[len..];
    }
    Ok(fields)
}

/// Schema-directed decoding that ignores the version byte and the length
/// prefixes, slicing fields at the offsets implied by `widths`. Only the
/// total length is checked. This is how a receiver reads a plaintext it
/// cannot authenticate.
pub fn decode_positional<'a>(bytes: &'a [u8], widths: &[usize]) -> Result<Vec<&'a [u8]>, CryptoError> {
    let expected = 1 + widths.iter().map(|w| 2 + w).sum::<usize>();
    if bytes.len() != expected {
        return Err(CryptoError::Encoding("length does not match schema"));
    }
    let mut offset = 1;
    let mut fields = Vec::with_capacity(widths.len());
    for &w in widths {
        offset += 2;
        fields.push(&bytes[offset..offset + w]);
        offset += w;
    }
    Ok(fields)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn layout_is_bit_exact() {
        let params = PublicParams::toy();
        let g = params.generator();
        let bytes = Encoder::new().group(&g, &params).str("alice").field(&[]).finish();
        assert_eq!(
            bytes,
            vec![0x01, 0x00, 0x01, 0x05, 0x00, 0x05, b'a', b'l', b'i', b'c', b'e', 0x00, 0x00]
        );
    }

    #[test]
    fn strict_decoder_rejects_bad_input() {
        assert!(decode_fields(&[]).is_err());
        assert!(decode_fields(&[0x02]).is_err());
        assert!(decode_fields(&[0x01, 0x00]).is_err());
        assert!(decode_fields(&[0x01, 0x00, 0x03, 1, 2]).is_err());
        assert_eq!(decode_fields(&[0x01]).unwrap(), Vec::<&[u8]>::new());
    }

    #[test]
    fn positional_decoder_ignores_headers() {
        let bytes = [0xff, 0xaa, 0xbb, 7, 0xcc, 0xdd, 8, 9];
        let f = decode_positional(&bytes, &[1, 2]).unwrap();
        assert_eq!(f, vec![&[7u8][..], &[8u8, 9][..]]);
        assert!(decode_positional(&bytes, &[1, 3]).is_err());
    }

    proptest! {
        #[test]
        fn strict_and_positional_agree_on_valid_encodings(
            fields in proptest::collection::vec(proptest::collection::vec(any::<u8>(), 0..40), 0..6)
        ) {
            let enc = fields.iter().fold(Encoder::new(), |e, f| e.field(f)).finish();
            let strict = decode_fields(&enc).unwrap();
            let widths: Vec<usize> = fields.iter().map(Vec::len).collect();
            let positional = decode_positional(&enc, &widths).unwrap();
            prop_assert_eq!(&strict, &positional);
            let originals: Vec<&[u8]> = fields.iter().map(Vec::as_slice).collect();
            prop_assert_eq!(strict, originals);
        }
    }
}
