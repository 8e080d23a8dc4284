//! Deterministic, splittable random source.
//!
//! Every draw is a pure function of `(master_seed, stream_id, counter)`: the
//! generator is ChaCha8 keyed by the master seed with the stream id selecting
//! an independent 2^64-block stream. Output is identical on every platform.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

#[derive(Debug, Clone)]
pub struct RandomSource {
    master_seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RandomSource {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
        rng.set_stream(stream_id);
        Self {
            master_seed,
            stream_id,
            rng,
        }
    }

    /// Source for replica `seed` on the default stream.
    pub fn from_seed(seed: u64) -> Self {
        Self::new(seed, 0)
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Fresh source on a different stream of the same master seed.
    ///
    /// The child stream id is a fixed mix of the parent stream and `tag`, so
    /// the split is reproducible and does not advance `self`.
    pub fn split(&self, tag: u64) -> Self {
        Self::new(self.master_seed, mix(self.stream_id, tag))
    }

    /// Uniform on `[0, 1)`.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    /// Uniform on `[lo, hi)`.
    #[inline]
    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    #[inline]
    pub fn normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    #[inline]
    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.uniform() < p
    }

    /// Uniform integer in `0..n`.
    #[inline]
    pub fn below(&mut self, n: u64) -> u64 {
        self.rng.random_range(0..n)
    }

    #[inline]
    pub fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }
}

impl RngCore for RandomSource {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

// splitmix64 finalizer over the pair
fn mix(a: u64, b: u64) -> u64 {
    let mut z = a ^ b.wrapping_mul(0x9E37_79B9_7F4A_7C15).rotate_left(17);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_seed_and_stream_reproduce() {
        let mut a = RandomSource::new(42, 7);
        let mut b = RandomSource::new(42, 7);
        for _ in 0..10_000 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn streams_differ() {
        let mut a = RandomSource::new(42, 0);
        let mut b = RandomSource::new(42, 1);
        let same = (0..1000).filter(|_| a.next_u64() == b.next_u64()).count();
        assert_eq!(same, 0);
    }

    #[test]
    fn independent_streams_are_uncorrelated() {
        let mut a = RandomSource::new(3, 10);
        let mut b = RandomSource::new(3, 11);
        let n = 200_000;
        let mut sum = 0.0;
        for _ in 0..n {
            sum += (a.uniform() - 0.5) * (b.uniform() - 0.5);
        }
        // variance of each product is 1/144
        let corr = sum / n as f64 * 12.0;
        assert!(corr.abs() < 4.0 / (n as f64).sqrt(), "corr = {corr}");
    }

    #[test]
    fn split_is_reproducible_and_non_advancing() {
        let parent = RandomSource::new(9, 0);
        let mut c1 = parent.split(5);
        let mut c2 = parent.split(5);
        assert_eq!(c1.next_u64(), c2.next_u64());
        let mut p1 = parent.clone();
        let mut p2 = RandomSource::new(9, 0);
        assert_eq!(p1.next_u64(), p2.next_u64());
        assert_ne!(parent.split(5).next_u64(), parent.split(6).next_u64());
    }

    #[test]
    fn pinned_first_draw() {
        // guards against silent generator changes that would break reproducibility
        let mut a = RandomSource::new(0, 0);
        let first = a.next_u64();
        assert_eq!(first, 13_080_132_717_333_068_652);
        let mut b = RandomSource::new(0, 0);
        assert_eq!(first, b.next_u64());
        let u = RandomSource::new(1, 0).uniform();
        assert!((0.0..1.0).contains(&u));
    }
}
