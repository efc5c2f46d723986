//! Seeded, splittable random streams.
//!
//! Each stream is a ChaCha8 generator keyed by 32 bytes. A substream's key is
//! drawn from the parent's key on a dedicated ChaCha stream id, so children
//! depend only on `(parent key, index)` and never on how much the parent has
//! already produced.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Debug)]
pub struct RngStream {
    key: [u8; 32],
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn from_seed(seed: u64) -> Self {
        let mut key = [0u8; 32];
        ChaCha8Rng::seed_from_u64(seed).fill_bytes(&mut key);
        Self::from_key(key)
    }

    fn from_key(key: [u8; 32]) -> Self {
        RngStream {
            key,
            rng: ChaCha8Rng::from_seed(key),
        }
    }

    /// Independent child stream number `index`.
    pub fn substream(&self, index: u64) -> RngStream {
        let mut derive = ChaCha8Rng::from_seed(self.key);
        // stream 0 is the one `self.rng` draws from
        derive.set_stream(index.wrapping_add(1));
        let mut key = [0u8; 32];
        derive.fill_bytes(&mut key);
        Self::from_key(key)
    }

    /// Uniform draw in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        // 53 random mantissa bits
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.rng.fill_bytes(dest)
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> Result<(), rand::Error> {
        self.rng.try_fill_bytes(dest)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_sequence() {
        let mut a = RngStream::from_seed(7);
        let mut b = RngStream::from_seed(7);
        for _ in 0..100 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn substreams_ignore_parent_consumption() {
        let a = RngStream::from_seed(3);
        let mut b = RngStream::from_seed(3);
        for _ in 0..17 {
            b.next_u64();
        }
        let mut ca = a.substream(5);
        let mut cb = b.substream(5);
        assert_eq!(ca.next_u64(), cb.next_u64());
    }

    #[test]
    fn substreams_differ() {
        let root = RngStream::from_seed(1);
        let firsts: Vec<u64> = (0..64).map(|i| root.substream(i).next_u64()).collect();
        let mut sorted = firsts.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), firsts.len());
        let mut parent = root.clone();
        assert!(!firsts.contains(&parent.next_u64()));
    }

    #[test]
    fn uniform_in_unit_interval() {
        let mut r = RngStream::from_seed(11);
        let n = 100_000;
        let mut sum = 0.0;
        for _ in 0..n {
            let u = r.uniform();
            assert!((0.0..1.0).contains(&u));
            sum += u;
        }
        let mean = sum / n as f64;
        // sd of the mean is sqrt(1/12 / n)
        assert!((mean - 0.5).abs() < 5.0 * (1.0 / 12.0 / n as f64).sqrt());
    }
}
