//! Seeded RNG helpers shared by estimators, selection, and data synthesis.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The project-wide deterministic RNG.
pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// One standard-normal draw via Box-Muller.
pub fn next_normal<R: Rng>(rng: &mut R) -> f64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// `n` draws from N(mean, std^2).
pub fn normal_vec<R: Rng>(rng: &mut R, n: usize, mean: f64, std: f64) -> Vec<f64> {
    (0..n).map(|_| mean + std * next_normal(rng)).collect()
}

/// Seeded Fisher-Yates permutation of `0..n`.
pub fn permutation<R: Rng>(rng: &mut R, n: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.gen_range(0..=i);
        idx.swap(i, j);
    }
    idx
}
