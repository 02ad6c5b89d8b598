//! Deterministic, splittable random streams.
//!
//! A [`RandomStream`] is addressed by a master seed plus a path of integers.
//! The generator state is derived from the address alone, so a stream for
//! `[cell, draw]` yields the same numbers whether it is created first or last,
//! on one thread or on eight. Parallel code derives one stream per work item
//! and never shares a generator.

use rand::{Error, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn derive_seed(master_seed: u64, path: &[u64]) -> [u8; 32] {
    let mut state = mix64(master_seed ^ GOLDEN_GAMMA);
    for (depth, &idx) in path.iter().enumerate() {
        let salt = GOLDEN_GAMMA.wrapping_mul(depth as u64 + 1);
        state = mix64(state ^ mix64(idx.wrapping_add(salt)));
    }
    state = mix64(state ^ path.len() as u64);

    let mut seed = [0u8; 32];
    for chunk in seed.chunks_exact_mut(8) {
        state = state.wrapping_add(GOLDEN_GAMMA);
        chunk.copy_from_slice(&mix64(state).to_le_bytes());
    }
    seed
}

/// A random number stream identified by `(master_seed, path)`.
#[derive(Debug, Clone)]
pub struct RandomStream {
    master_seed: u64,
    path: Vec<u64>,
    rng: ChaCha8Rng,
}

impl RandomStream {
    /// Derives the stream at `path` under `master_seed`.
    pub fn derive(master_seed: u64, path: &[u64]) -> Self {
        Self {
            master_seed,
            path: path.to_vec(),
            rng: ChaCha8Rng::from_seed(derive_seed(master_seed, path)),
        }
    }

    /// The root stream (empty path).
    pub fn root(master_seed: u64) -> Self {
        Self::derive(master_seed, &[])
    }

    /// Substream with `index` appended to this stream's path.
    ///
    /// Depends only on the address, never on how many draws were taken from
    /// `self`.
    pub fn child(&self, index: u64) -> Self {
        let mut path = Vec::with_capacity(self.path.len() + 1);
        path.extend_from_slice(&self.path);
        path.push(index);
        Self::derive(self.master_seed, &path)
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn path(&self) -> &[u64] {
        &self.path
    }

    /// Uniform draw on `[0, 1)` with 53 bits of precision.
    pub fn next_unit(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

impl RngCore for RandomStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.rng.fill_bytes(dest)
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> Result<(), Error> {
        self.rng.try_fill_bytes(dest)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rayon::prelude::*;

    fn first_draws(stream: &mut RandomStream, n: usize) -> Vec<u64> {
        (0..n).map(|_| stream.next_u64()).collect()
    }

    #[test]
    fn same_address_same_draws() {
        let a = first_draws(&mut RandomStream::derive(42, &[3, 1]), 100);
        let b = first_draws(&mut RandomStream::derive(42, &[3, 1]), 100);
        assert_eq!(a, b);
    }

    #[test]
    fn sibling_paths_differ() {
        let a = first_draws(&mut RandomStream::derive(7, &[0]), 100);
        let b = first_draws(&mut RandomStream::derive(7, &[1]), 100);
        assert!(a.iter().zip(&b).all(|(x, y)| x != y));
    }

    #[test]
    fn empty_path_and_zero_path_differ() {
        let a = RandomStream::derive(7, &[]).next_u64();
        let b = RandomStream::derive(7, &[0]).next_u64();
        let c = RandomStream::derive(7, &[0, 0]).next_u64();
        assert_ne!(a, b);
        assert_ne!(b, c);
    }

    #[test]
    fn child_ignores_parent_consumption() {
        let mut parent = RandomStream::derive(9, &[5]);
        let before = first_draws(&mut parent.child(3), 10);
        first_draws(&mut parent, 1000);
        let after = first_draws(&mut parent.child(3), 10);
        assert_eq!(before, after);
        assert_eq!(parent.child(3).path(), &[5, 3]);
        assert_eq!(
            first_draws(&mut parent.child(3), 10),
            first_draws(&mut RandomStream::derive(9, &[5, 3]), 10)
        );
    }

    #[test]
    fn independent_of_worker_count() {
        let reference: Vec<Vec<u64>> = (0..64)
            .map(|i| first_draws(&mut RandomStream::derive(11, &[5, i]), 8))
            .collect();
        for workers in [1, 3, 8] {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(workers)
                .build()
                .unwrap();
            let got: Vec<Vec<u64>> = pool.install(|| {
                (0..64usize)
                    .into_par_iter()
                    .rev()
                    .map(|i| first_draws(&mut RandomStream::derive(11, &[5, i as u64]), 8))
                    .collect::<Vec<_>>()
                    .into_iter()
                    .rev()
                    .collect()
            });
            assert_eq!(got, reference);
        }
    }

    #[test]
    fn unit_draws_in_range() {
        let mut s = RandomStream::root(1);
        for _ in 0..10_000 {
            let u = s.next_unit();
            assert!((0.0..1.0).contains(&u));
        }
    }
}
