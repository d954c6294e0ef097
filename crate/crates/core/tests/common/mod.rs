#![allow(dead_code)]

use std::collections::BTreeSet;

use netupdate_core::analysis::{DownMark, UpstreamKind};
use netupdate_core::instances::{generate, GenMode, GenParams};
use netupdate_core::netmodel::{Configuration, NetworkInstance};
use netupdate_core::oracle::paths::{maximal_paths, path_in, paths_between, Enumerated};
use proptest::prelude::*;

pub fn mode() -> impl Strategy<Value = GenMode> {
    prop_oneof![
        Just(GenMode::Independent),
        (0usize..=4).prop_map(|rewire| GenMode::Perturb { rewire }),
    ]
}

/// Generator parameters with at most `max_nodes` nodes.
pub fn params(max_nodes: usize) -> impl Strategy<Value = GenParams> {
    (2..=max_nodes, 0.1f64..0.8, any::<u64>(), mode()).prop_map(|(nodes, density, seed, mode)| GenParams {
        nodes,
        density,
        seed,
        mode: match mode {
            GenMode::Perturb { rewire } => GenMode::Perturb {
                rewire: rewire.min(nodes),
            },
            m => m,
        },
    })
}

pub fn instance(max_nodes: usize) -> impl Strategy<Value = NetworkInstance> {
    params(max_nodes).prop_map(|p| generate(p).unwrap())
}

/// An instance with an arbitrary subset of its links switched on.
pub fn with_config(max_nodes: usize) -> impl Strategy<Value = (NetworkInstance, Configuration)> {
    instance(max_nodes).prop_flat_map(|net| {
        let n = net.link_count();
        (Just(net), proptest::collection::vec(any::<bool>(), n)).prop_map(|(net, bits)| {
            let mut c = net.empty_config();
            for (e, on) in bits.into_iter().enumerate() {
                if on {
                    c.insert(e);
                }
            }
            (net, c)
        })
    })
}

/// An instance with a random subset of its nodes updated from the initial
/// configuration.
pub fn with_mixed_config(max_nodes: usize) -> impl Strategy<Value = (NetworkInstance, Configuration)> {
    instance(max_nodes).prop_flat_map(|net| {
        let n = net.node_count();
        (Just(net), proptest::collection::vec(any::<bool>(), n)).prop_map(|(net, bits)| {
            let c = net.config_after(bits.iter().enumerate().filter(|(_, &b)| b).map(|(u, _)| u));
            (net, c)
        })
    })
}

/// Downstream mark of `u` read off the explicit list of maximal paths.
pub fn enumerated_mark(net: &NetworkInstance, config: &Configuration, u: usize) -> DownMark {
    match maximal_paths(net, config, u) {
        Enumerated::Infinite => DownMark::BAD,
        Enumerated::Paths(paths) => {
            let ci = |p: &Vec<usize>| path_in(net, p, true, true);
            let cf = |p: &Vec<usize>| path_in(net, p, false, true);
            DownMark {
                all_ci_max: paths.iter().all(ci),
                all_cf_max: paths.iter().all(cf),
                all_either_max: paths.iter().all(|p| ci(p) || cf(p)),
                all_both_max: paths.iter().all(|p| ci(p) && cf(p)),
            }
        }
    }
}

/// Upstream kind and anomaly flag of `u` from every simple path to it.
pub fn enumerated_kind(net: &NetworkInstance, config: &Configuration, u: usize) -> (UpstreamKind, bool) {
    let states: BTreeSet<(bool, bool)> = paths_between(net, config, net.source(), u)
        .iter()
        .map(|p| (path_in(net, p, true, false), path_in(net, p, false, false)))
        .collect();
    let initial_only = states.contains(&(true, false));
    let final_only = states.contains(&(false, true));
    let shared = states.contains(&(true, true));
    let kind = if states.is_empty() {
        UpstreamKind::TypeA
    } else if shared && !initial_only && !final_only {
        UpstreamKind::TypeB
    } else if final_only && !initial_only {
        UpstreamKind::TypeC
    } else if initial_only && !final_only {
        UpstreamKind::TypeD
    } else {
        UpstreamKind::TypeE
    };
    (kind, states.contains(&(false, false)))
}
