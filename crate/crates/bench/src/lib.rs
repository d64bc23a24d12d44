//! Shared fixtures for the criterion benches.

use streammatch_core::instances::{gen_random, GenKind, GenSpec};
use streammatch_core::Graph;

/// Deterministic random graph for a bench run.
pub fn fixture(kind: GenKind, n: usize, p: f64, seed: u64) -> Graph {
    gen_random(
        &GenSpec {
            kind,
            n,
            p,
            plant: None,
        },
        seed,
    )
    .expect("valid bench fixture")
}
