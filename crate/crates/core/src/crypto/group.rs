use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::CryptoError;

const FIXTURE_512: &str = include_str!("../../fixtures/safe_prime_512.txt");

/// Named parameter sets available to scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GroupId {
    #[serde(rename = "TOY-23")]
    Toy23,
    #[serde(rename = "FIXTURE-512")]
    Fixture512,
}

impl GroupId {
    pub fn params(self) -> PublicParams {
        match self {
            GroupId::Toy23 => PublicParams::toy(),
            GroupId::Fixture512 => PublicParams::fixture_512(),
        }
    }
}

impl fmt::Display for GroupId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GroupId::Toy23 => "TOY-23",
            GroupId::Fixture512 => "FIXTURE-512",
        })
    }
}

impl FromStr for GroupId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "TOY-23" | "TOY23" | "TOY" => Ok(GroupId::Toy23),
            "FIXTURE-512" | "FIXTURE512" | "512" => Ok(GroupId::Fixture512),
            other => Err(format!("unknown group `{other}` (expected TOY-23 or FIXTURE-512)")),
        }
    }
}

/// Prime modulus and generator shared by every party.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PublicParams {
    p: BigUint,
    g: BigUint,
    group_byte_len: usize,
}

impl PublicParams {
    /// Validates `p` (exact trial division below 10^6, Miller-Rabin above)
    /// and checks that `g` has order greater than 2.
    pub fn new(p: BigUint, g: BigUint) -> Result<Self, CryptoError> {
        if !is_probable_prime(&p) {
            return Err(CryptoError::NotPrime);
        }
        if g <= BigUint::one() || g >= p {
            return Err(CryptoError::BadGenerator);
        }
        // ord(g) > 2  <=>  g != 1 and g^2 != 1
        if g.modpow(&BigUint::from(2u32), &p).is_one() {
            return Err(CryptoError::BadGenerator);
        }
        let group_byte_len = (p.bits() as usize).div_ceil(8);
        Ok(Self { p, g, group_byte_len })
    }

    /// p = 23, g = 5. Small enough for exhaustive oracles.
    pub fn toy() -> Self {
        Self::new(BigUint::from(23u32), BigUint::from(5u32)).expect("toy parameters are valid")
    }

    /// The pinned 512-bit safe prime from `fixtures/safe_prime_512.txt`.
    pub fn fixture_512() -> Self {
        Self::from_fixture(FIXTURE_512).expect("bundled 512-bit fixture is valid")
    }

    /// Parses `p=<hex>` / `g=<hex>` lines; `#` starts a comment.
    pub fn from_fixture(text: &str) -> Result<Self, CryptoError> {
        let mut p = None;
        let mut g = None;
        for line in text.lines().map(str::trim) {
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CryptoError::Fixture(format!("expected key=value, got `{line}`")))?;
            let parsed = BigUint::parse_bytes(value.trim().as_bytes(), 16)
                .ok_or_else(|| CryptoError::Fixture(format!("bad hex for `{key}`")))?;
            match key.trim() {
                "p" => p = Some(parsed),
                "g" => g = Some(parsed),
                other => return Err(CryptoError::Fixture(format!("unknown key `{other}`"))),
            }
        }
        match (p, g) {
            (Some(p), Some(g)) => Self::new(p, g),
            _ => Err(CryptoError::Fixture("fixture needs both p and g".into())),
        }
    }

    pub fn p(&self) -> &BigUint {
        &self.p
    }

    pub fn g(&self) -> &BigUint {
        &self.g
    }

    pub fn group_byte_len(&self) -> usize {
        self.group_byte_len
    }

    pub fn generator(&self) -> GroupElement {
        GroupElement { value: self.g.clone() }
    }
}

/// An element of the multiplicative group mod p, always in [1, p-1].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GroupElement {
    value: BigUint,
}

impl GroupElement {
    pub fn new(value: BigUint, params: &PublicParams) -> Result<Self, CryptoError> {
        if value.is_zero() || value >= params.p {
            return Err(CryptoError::ElementOutOfRange);
        }
        Ok(Self { value })
    }

    pub fn from_u64(value: u64, params: &PublicParams) -> Result<Self, CryptoError> {
        Self::new(BigUint::from(value), params)
    }

    pub fn value(&self) -> &BigUint {
        &self.value
    }

    /// Big-endian, left-padded to `group_byte_len`.
    pub fn to_bytes(&self, params: &PublicParams) -> Vec<u8> {
        let raw = self.value.to_bytes_be();
        let mut out = vec![0u8; params.group_byte_len.saturating_sub(raw.len())];
        out.extend_from_slice(&raw);
        out
    }

    /// Strict inverse of [`GroupElement::to_bytes`].
    pub fn from_bytes(bytes: &[u8], params: &PublicParams) -> Result<Self, CryptoError> {
        if bytes.len() != params.group_byte_len {
            return Err(CryptoError::ElementWidth {
                expected: params.group_byte_len,
                actual: bytes.len(),
            });
        }
        Self::new(BigUint::from_bytes_be(bytes), params)
    }

    /// Maps arbitrary bytes into the group. Identity on every valid encoding;
    /// out-of-range values land in [1, p-1] via `(v mod (p-1)) + 1`. Used when
    /// a keystream-only cipher hands back garbage that must keep flowing.
    pub fn coerce(bytes: &[u8], params: &PublicParams) -> Self {
        let v = BigUint::from_bytes_be(bytes);
        if !v.is_zero() && v < params.p {
            return Self { value: v };
        }
        let order = &params.p - BigUint::one();
        Self { value: v.mod_floor(&order) + BigUint::one() }
    }

    pub fn to_u64(&self) -> Option<u64> {
        self.value.to_u64()
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:x}", self.value)
    }
}

/// `base^exp mod p`.
pub fn mod_exp(
    base: &GroupElement,
    exp: &BigUint,
    params: &PublicParams,
) -> Result<GroupElement, CryptoError> {
    if base.value.is_zero() || base.value >= params.p {
        return Err(CryptoError::ElementOutOfRange);
    }
    Ok(GroupElement { value: base.value.modpow(exp, &params.p) })
}

const SMALL_PRIMES: [u32; 20] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71,
];

/// Exact for n < 10^6 (trial division). Above that, Miller-Rabin with the
/// first twenty primes as witnesses.
pub fn is_probable_prime(n: &BigUint) -> bool {
    if let Some(small) = n.to_u64() {
        if small < 1_000_000 {
            return is_prime_exact(small);
        }
    }
    let one = BigUint::one();
    let two = BigUint::from(2u32);
    for &sp in SMALL_PRIMES.iter() {
        if (n % sp).is_zero() {
            return false;
        }
    }
    let n_minus_one = n - &one;
    let s = n_minus_one.trailing_zeros().unwrap_or(0);
    let d = &n_minus_one >> s;
    'witness: for &a in SMALL_PRIMES.iter() {
        let mut x = BigUint::from(a).modpow(&d, n);
        if x == one || x == n_minus_one {
            continue;
        }
        for _ in 1..s {
            x = x.modpow(&two, n);
            if x == n_minus_one {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn is_prime_exact(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}
