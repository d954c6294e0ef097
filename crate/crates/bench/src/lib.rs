//! Shared inputs for the benchmarks.

use netupdate_core::{generate, GenMode, GenParams, NetworkInstance};

pub const DENSITY: f64 = 0.05;

/// Generated instances of `nodes` nodes, one per generator mode.
pub fn workload(nodes: usize, seed: u64) -> Vec<(&'static str, NetworkInstance)> {
    [
        ("independent", GenMode::Independent),
        ("perturb", GenMode::Perturb { rewire: nodes / 4 }),
    ]
    .into_iter()
    .map(|(name, mode)| {
        let net = generate(GenParams {
            nodes,
            density: DENSITY,
            seed,
            mode,
        })
        .expect("valid parameters");
        (name, net)
    })
    .collect()
}
