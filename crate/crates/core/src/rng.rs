//! Seeded random streams and the chance interface the engine draws from.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Source of every random decision the engine makes.
///
/// The engine only ever asks for a uniform index below `n`, so an exact
/// enumerator of game histories can stand in for the random stream.
pub trait Chance {
    /// Uniform draw from `0..n`. `n` is at least 1.
    fn below(&mut self, n: usize) -> usize;

    /// Bernoulli draw. Only called with `0 < p < 1`.
    fn bernoulli(&mut self, p: f64) -> bool;
}

/// A reproducible stream identified by `(master_seed, stream_index)`.
///
/// Distinct stream indices select distinct ChaCha streams under the same key,
/// so trials seeded this way are independent and order-free.
#[derive(Clone, Debug)]
pub struct RngStream {
    master_seed: u64,
    stream_index: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
        rng.set_stream(stream_index);
        RngStream {
            master_seed,
            stream_index,
            rng,
        }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn stream_index(&self) -> u64 {
        self.stream_index
    }
}

impl Chance for RngStream {
    fn below(&mut self, n: usize) -> usize {
        debug_assert!(n > 0);
        self.rng.random_range(0..n)
    }

    fn bernoulli(&mut self, p: f64) -> bool {
        self.rng.random_bool(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_keys_equal_sequences() {
        let mut a = RngStream::new(42, 7);
        let mut b = RngStream::new(42, 7);
        let xs: Vec<usize> = (0..64).map(|_| a.below(1000)).collect();
        let ys: Vec<usize> = (0..64).map(|_| b.below(1000)).collect();
        assert_eq!(xs, ys);
    }

    #[test]
    fn distinct_streams_differ() {
        let mut a = RngStream::new(42, 7);
        let mut b = RngStream::new(42, 8);
        let xs: Vec<usize> = (0..64).map(|_| a.below(1 << 20)).collect();
        let ys: Vec<usize> = (0..64).map(|_| b.below(1 << 20)).collect();
        assert_ne!(xs, ys);
    }
}
