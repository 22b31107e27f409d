use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Deterministic generator for `(seed, stream)`. ChaCha output is stable
/// across platforms and crate versions, which `StdRng` does not promise.
pub(crate) fn seeded(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
