use num_bigint::BigUint;
use num_traits::One;
use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};

use super::{hash, PublicParams};

pub const NONCE_BYTES: usize = 16;

/// Seeded byte stream. The ChaCha20 seed is `hash("rng", seed || label)`, so
/// two parties sharing a scenario seed still draw independent streams.
#[derive(Debug, Clone)]
pub struct Rng {
    seed: u64,
    label: String,
    inner: ChaCha20Rng,
    draws: u64,
}

impl Rng {
    pub fn new(seed: u64, label: &str) -> Self {
        let mut material = seed.to_be_bytes().to_vec();
        material.extend_from_slice(label.as_bytes());
        let key = hash(b"rng", &material);
        Self {
            seed,
            label: label.to_owned(),
            inner: ChaCha20Rng::from_seed(key.0),
            draws: 0,
        }
    }

    /// Child stream for a sub-party; independent of this stream's position.
    pub fn fork(&self, sublabel: &str) -> Self {
        Self::new(self.seed, &format!("{}/{}", self.label, sublabel))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Number of draw calls made so far.
    pub fn draws(&self) -> u64 {
        self.draws
    }

    pub fn fill_bytes(&mut self, out: &mut [u8]) {
        self.draws += 1;
        self.inner.fill_bytes(out);
    }

    pub fn next_u64(&mut self) -> u64 {
        self.draws += 1;
        self.inner.next_u64()
    }

    pub fn random_bytes<const N: usize>(&mut self) -> [u8; N] {
        let mut out = [0u8; N];
        self.fill_bytes(&mut out);
        out
    }

    pub fn random_nonce(&mut self) -> [u8; NONCE_BYTES] {
        self.random_bytes()
    }

    /// Uniform in [2, p-2] by rejection sampling.
    pub fn random_exponent(&mut self, params: &PublicParams) -> BigUint {
        let two = BigUint::from(2u32);
        // count of admissible values: p - 3
        let span = params.p() - BigUint::from(3u32);
        let top = &span - BigUint::one();
        let bits = top.bits().max(1);
        let nbytes = (bits as usize).div_ceil(8);
        let excess = nbytes as u64 * 8 - bits;
        let mut buf = vec![0u8; nbytes];
        loop {
            self.fill_bytes(&mut buf);
            buf[0] &= 0xffu8 >> excess;
            let candidate = BigUint::from_bytes_be(&buf);
            if candidate < span {
                return candidate + &two;
            }
        }
    }

    /// Uniform in `[0, bound)`.
    pub fn below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0, "empty range");
        let zone = u64::MAX - u64::MAX % bound;
        loop {
            let v = self.next_u64();
            if v < zone {
                return v % bound;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_stream() {
        let mut a = Rng::new(42, "user");
        let mut b = Rng::new(42, "user");
        let params = PublicParams::fixture_512();
        assert_eq!(a.random_nonce(), b.random_nonce());
        assert_eq!(a.random_exponent(&params), b.random_exponent(&params));
    }

    #[test]
    fn labels_separate_streams() {
        let mut a = Rng::new(42, "user");
        let mut b = Rng::new(42, "server");
        assert_ne!(a.random_nonce(), b.random_nonce());
    }

    #[test]
    fn toy_exponents_stay_in_range_and_cover_it() {
        let params = PublicParams::toy();
        let mut rng = Rng::new(7, "range");
        let mut tally = [0u32; 23];
        for _ in 0..10_000 {
            let e = rng.random_exponent(&params);
            let v: usize = e.try_into().unwrap();
            assert!((2..=21).contains(&v), "{v}");
            tally[v] += 1;
        }
        for (v, count) in tally.iter().enumerate().take(22).skip(2) {
            assert!(*count > 0, "value {v} never drawn");
        }
    }

    #[test]
    fn big_exponents_stay_in_range() {
        let params = PublicParams::fixture_512();
        let mut rng = Rng::new(9, "range");
        let upper = params.p() - BigUint::from(2u32);
        for _ in 0..200 {
            let e = rng.random_exponent(&params);
            assert!(e >= BigUint::from(2u32) && e <= upper);
        }
    }

    #[test]
    fn fork_is_position_independent() {
        let a = Rng::new(5, "rc");
        let mut b = Rng::new(5, "rc");
        b.random_nonce();
        assert_eq!(a.fork("x").random_nonce(), b.fork("x").random_nonce());
    }

    #[test]
    fn below_respects_bound() {
        let mut rng = Rng::new(1, "below");
        assert!((0..1000).all(|_| rng.below(7) < 7));
    }
}
