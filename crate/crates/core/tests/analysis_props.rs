mod common;

use common::{enumerated_kind, enumerated_mark};
use netupdate_core::analysis::{self, is_consistent, is_valid, marks, upstream, valid_nodes, valid_with, Validity};
use netupdate_core::oracle::paths::{self, maximal_paths, Enumerated};
use netupdate_core::NodeId;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn marks_match_enumeration((net, c) in common::with_config(9)) {
        for (u, got) in marks(&net, &c).into_iter().enumerate() {
            prop_assert_eq!(got, enumerated_mark(&net, &c, u), "node {}", net.node_id(u));
        }
    }

    #[test]
    fn upstream_matches_enumeration((net, c) in common::with_config(9)) {
        let cyclic = matches!(maximal_paths(&net, &c, net.source()), Enumerated::Infinite);
        match upstream(&net, &c) {
            Err(_) => prop_assert!(cyclic),
            Ok(up) => {
                prop_assert!(!cyclic);
                for (u, class) in up.into_iter().enumerate() {
                    prop_assert_eq!((class.kind, class.anomalous), enumerated_kind(&net, &c, u));
                }
            }
        }
    }

    #[test]
    fn consistency_matches_independent_check((net, c) in common::with_config(10)) {
        prop_assert_eq!(is_consistent(&net, &c).is_consistent(), paths::check(&net, &c).is_none());
    }

    #[test]
    fn shared_marking_matches_per_node_validity((net, c) in common::with_config(10)) {
        if let Ok(up) = upstream(&net, &c) {
            let candidates: Vec<usize> = (0..net.node_count()).filter(|&u| !up[u].anomalous).collect();
            let fast = valid_nodes(&net, &c, candidates.iter().copied()).unwrap();
            let slow: Vec<usize> = candidates
                .into_iter()
                .filter(|&s| !net.is_noop(s) && valid_with(&net, &c, up[s], s))
                .collect();
            prop_assert_eq!(fast, slow);
        }
    }

    /// Updating a valid node from a consistent configuration stays consistent.
    #[test]
    fn valid_updates_are_safe((net, c) in common::with_mixed_config(10)) {
        prop_assume!(is_consistent(&net, &c).is_consistent());
        for u in net.changed_nodes() {
            let id = net.node_id(u);
            if is_valid(&net, &c, id).unwrap() == Validity::Valid {
                let after = net.upd1(&c, id).unwrap();
                prop_assert!(paths::check(&net, &after).is_none(), "{} valid but unsafe", id);
            }
        }
    }

    #[test]
    fn noops_are_never_changed(net in common::instance(10)) {
        for u in 0..net.node_count() {
            if net.is_noop(u) {
                prop_assert_eq!(is_valid(&net, &net.initial(), net.node_id(u)).unwrap(), Validity::NotAChangedNode);
            }
        }
    }
}

#[test]
fn anomalous_node_is_reported() {
    let net = netupdate_core::fixture("fig2_double_diamond").unwrap().instance;
    // H1 -> B (initial) then C -> D (final) mixes the two configurations.
    let c = net.upd1(&net.initial(), &NodeId::from("C")).unwrap();
    let classes = analysis::classify_upstream(&net, &c).unwrap();
    assert!(classes["D"].anomalous);
}
