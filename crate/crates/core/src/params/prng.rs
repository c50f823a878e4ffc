//! Index-addressable deterministic stream for coupon regeneration.
//!
//! Block `k` of the stream for `(seed, index)` is
//! `SHA-256("gps-coupon-v1" || seed || index_be64 || k_be64)`; the stream is
//! the concatenation of blocks `0, 1, 2, ...`.

use num_bigint::BigUint;
use sha2::{Digest, Sha256};

const DOMAIN: &[u8] = b"gps-coupon-v1";

#[derive(Debug, Clone)]
pub struct PrngStream {
    seed: [u8; 16],
    index: u64,
    counter: u64,
    block: [u8; 32],
    pos: usize,
}

pub fn prng_expand(seed: &[u8; 16], index: u64) -> PrngStream {
    PrngStream { seed: *seed, index, counter: 0, block: [0; 32], pos: 32 }
}

impl PrngStream {
    fn refill(&mut self) {
        let mut h = Sha256::new();
        h.update(DOMAIN);
        h.update(self.seed);
        h.update(self.index.to_be_bytes());
        h.update(self.counter.to_be_bytes());
        self.block.copy_from_slice(&h.finalize());
        self.counter += 1;
        self.pos = 0;
    }

    pub fn fill(&mut self, out: &mut [u8]) {
        for b in out.iter_mut() {
            *b = self.next_byte();
        }
    }

    fn next_byte(&mut self) -> u8 {
        if self.pos == self.block.len() {
            self.refill();
        }
        let b = self.block[self.pos];
        self.pos += 1;
        b
    }

    /// Reads `ceil(bits / 8)` bytes as a big-endian integer and keeps the
    /// low `bits` bits.
    pub fn take_bits(&mut self, bits: u32) -> BigUint {
        let mut buf = vec![0u8; (bits as usize).div_ceil(8)];
        self.fill(&mut buf);
        let excess = buf.len() * 8 - bits as usize;
        if excess > 0 {
            buf[0] &= 0xff >> excess;
        }
        BigUint::from_bytes_be(&buf)
    }
}

impl Iterator for PrngStream {
    type Item = u8;

    fn next(&mut self) -> Option<u8> {
        Some(self.next_byte())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SEED_A: [u8; 16] = *b"0123456789abcdef";
    const SEED_B: [u8; 16] = *b"0123456789abcdeg";

    fn first(seed: &[u8; 16], index: u64, n: usize) -> Vec<u8> {
        prng_expand(seed, index).take(n).collect()
    }

    #[test]
    fn deterministic() {
        assert_eq!(first(&SEED_A, 0, 128), first(&SEED_A, 0, 128));
    }

    #[test]
    fn index_and_seed_separate_streams() {
        assert_ne!(first(&SEED_A, 0, 32), first(&SEED_A, 1, 32));
        assert_ne!(first(&SEED_A, 7, 32), first(&SEED_B, 7, 32));
    }

    #[test]
    fn blocks_chain_across_refills() {
        let bytes = first(&SEED_A, 3, 100);
        let mut s = prng_expand(&SEED_A, 3);
        let mut buf = [0u8; 40];
        s.fill(&mut buf);
        assert_eq!(&bytes[..40], &buf);
        s.fill(&mut buf);
        assert_eq!(&bytes[40..80], &buf);
    }

    #[test]
    fn take_bits_truncates() {
        for bits in [1u32, 7, 8, 9, 104, 240, 624] {
            let v = prng_expand(&SEED_A, 0).take_bits(bits);
            assert!(v.bits() <= u64::from(bits));
            let bytes = first(&SEED_A, 0, (bits as usize).div_ceil(8));
            let full = BigUint::from_bytes_be(&bytes);
            assert_eq!(v, full % (BigUint::from(1u8) << bits));
        }
    }
}
