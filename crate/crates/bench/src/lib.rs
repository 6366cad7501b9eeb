//! Shared inputs for the criterion benchmarks in `benches/`.

use bcod_core::bench::{generate, GeneratorKind, GeneratorSpec};
use bcod_core::BitVector;

/// One megabit from each synthetic source the benchmarks cover.
pub fn sources() -> Vec<(&'static str, BitVector)> {
    [
        ("uniform", GeneratorKind::Uniform),
        ("bernoulli-0.8", GeneratorKind::Bernoulli(0.8)),
        ("bernoulli-0.95", GeneratorKind::Bernoulli(0.95)),
    ]
    .into_iter()
    .map(|(name, kind)| (name, generate(&GeneratorSpec::new(kind, 1 << 20, 7)).unwrap()))
    .collect()
}
