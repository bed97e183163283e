//! Random sources. Every operation that needs randomness takes `&mut R` with
//! `R: Rng`; these helpers build the two standard sources.

use num_bigint::RandBigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::modmath::Nat;

/// The concrete generator used throughout: ChaCha20.
pub type RandomSource = ChaCha20Rng;

/// Deterministic source for reproducible runs.
pub fn seeded(seed: u64) -> RandomSource {
    ChaCha20Rng::seed_from_u64(seed)
}

/// Source seeded from OS entropy.
pub fn from_entropy() -> RandomSource {
    ChaCha20Rng::from_entropy()
}

/// Independent child source for job `index`, derived from a base seed.
///
/// Batch jobs derive their randomness this way so that sequential and
/// parallel execution produce identical results.
pub fn child(base: u64, index: u64) -> RandomSource {
    let mut rng = ChaCha20Rng::seed_from_u64(base);
    rng.set_stream(index);
    rng
}

/// Uniform value in `[0, bound)`.
pub fn below<R: Rng + ?Sized>(rng: &mut R, bound: &Nat) -> Nat {
    rng.gen_biguint_below(bound)
}
