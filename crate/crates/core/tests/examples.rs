//! The worked examples, checked piece by piece.

use netupdate_core::analysis::{
    classify_upstream, is_consistent, is_valid, mark_downstream, Inconsistency, UpstreamKind,
};
use netupdate_core::instances::{all_fixtures, fixture};
use netupdate_core::netmodel::{Configuration, Edge, EdgeLabel, NetworkInstance, NodeId};
use netupdate_core::oracle::{search_min_rounds, verify_plan, Violation, DEFAULT_NODE_LIMIT};
use netupdate_core::planner::{needs_wait, plan_optimal};
use netupdate_core::{Consistency, Validity, WaitedPlan};

fn net(name: &str) -> NetworkInstance {
    fixture(name).unwrap().instance
}

fn id(s: &str) -> NodeId {
    NodeId::from(s)
}

fn ids(names: &[&str]) -> Vec<NodeId> {
    names.iter().copied().map(id).collect()
}

fn rounds(layout: &[&[&str]]) -> Vec<Vec<NodeId>> {
    layout.iter().map(|r| ids(r)).collect()
}

fn after(net: &NetworkInstance, nodes: &[&str]) -> Configuration {
    net.upd(&net.initial(), &ids(nodes)).unwrap()
}

#[test]
fn fig1_structure() {
    let n = net("fig1_trivial");
    assert_eq!(n.node_count(), 6);
    assert_eq!(
        n.out(&n.initial(), &id("A")).unwrap(),
        vec![Edge::new("A", "C", EdgeLabel::InitialOnly)]
    );
    assert!(n.out(&n.initial(), &id("D")).unwrap().is_empty());
    assert_eq!(after(&n, &["D", "A"]), n.final_config());

    let c = after(&n, &["D"]);
    let added: Vec<Edge> = c
        .iter()
        .filter(|&e| !n.initial().contains(e))
        .map(|e| n.edge(e))
        .collect();
    assert_eq!(added, vec![Edge::new("D", "B", EdgeLabel::FinalOnly)]);
    assert!(n.initial().is_subset(&c));
    assert!(is_consistent(&n, &c).is_consistent());
}

#[test]
fn fig1_analysis() {
    let n = net("fig1_trivial");
    let up = classify_upstream(&n, &n.initial()).unwrap();
    assert_eq!(up["D"].kind, UpstreamKind::TypeA);
    assert_eq!(up["A"].kind, UpstreamKind::TypeB);
    assert_eq!(is_valid(&n, &n.initial(), &id("D")).unwrap(), Validity::Valid);
    assert_eq!(is_valid(&n, &n.initial(), &id("A")).unwrap(), Validity::Invalid);
    assert_eq!(is_valid(&n, &n.initial(), &id("B")).unwrap(), Validity::NotAChangedNode);

    let marks = mark_downstream(&n, &after(&n, &["A"]));
    assert!(marks["D"].all_ci_max);
    assert!(!marks["D"].all_cf_max);
}

#[test]
fn fig1_plans() {
    let n = net("fig1_trivial");
    let plan = plan_optimal(&n);
    assert_eq!(plan.rounds, rounds(&[&["D"], &["A"]]));
    assert_eq!(plan.waits(), 1);

    let oracle = search_min_rounds(&n, DEFAULT_NODE_LIMIT).unwrap();
    assert_eq!(oracle.min_rounds, Some(2));

    let reversed = WaitedPlan::solved(rounds(&[&["A"], &["D"]]));
    match verify_plan(&n, &reversed).unwrap().violation {
        Some(Violation::Prefix { after, witness, .. }) => {
            assert_eq!(after, id("A"));
            assert_eq!(witness, Inconsistency::Path(ids(&["H1", "A", "D"])));
        }
        other => panic!("{other:?}"),
    }

    // In one round, A may go first and strand packets at D.
    let squeezed = WaitedPlan::solved(rounds(&[&["D", "A"]]));
    assert!(matches!(
        verify_plan(&n, &squeezed).unwrap().violation,
        Some(Violation::Prefix { .. })
    ));
}

#[test]
fn fig2_is_stuck() {
    let n = net("fig2_double_diamond");
    let up = classify_upstream(&n, &n.initial()).unwrap();
    assert_eq!(up["C"].kind, UpstreamKind::TypeD);
    assert!(!search_min_rounds(&n, DEFAULT_NODE_LIMIT).unwrap().exists);
    // D can move first, since it is cut off; C and A stay blocked afterwards.
    assert_eq!(is_valid(&n, &n.initial(), &id("D")).unwrap(), Validity::Valid);
    let c = after(&n, &["D"]);
    for stuck in ["A", "C"] {
        assert_eq!(is_valid(&n, &c, &id(stuck)).unwrap(), Validity::Invalid, "{stuck}");
    }
}

#[test]
fn fig2_witnesses() {
    let n = net("fig2_double_diamond");
    // D still has no old out-edge, so the mixed path stops there.
    assert_eq!(
        is_consistent(&n, &after(&n, &["C"])),
        Consistency::Inconsistent(Inconsistency::Path(ids(&["H1", "B", "C", "D"])))
    );
    // Once D is switched too the mixed path runs on to the sink.
    assert_eq!(
        is_consistent(&n, &after(&n, &["A", "D", "C"])),
        Consistency::Inconsistent(Inconsistency::Path(ids(&["H1", "B", "C", "D", "H2"])))
    );
}

#[test]
fn fig4_plan() {
    let n = net("fig4_removable_dd");
    let marks = mark_downstream(&n, &n.initial());
    // J -> K -> H2 is kept by both configurations.
    assert!(marks["J"].all_ci_max && marks["J"].all_both_max);
    assert!(!marks["G"].all_cf_max);
    let plan = plan_optimal(&n);
    assert_eq!(plan.rounds.len(), 4);
    assert!(verify_plan(&n, &plan).unwrap().is_ok());
    assert_eq!(search_min_rounds(&n, DEFAULT_NODE_LIMIT).unwrap().min_rounds, Some(4));
    // B switches one round before D and cannot share its round.
    let history = rounds(&[&["A", "H1", "K", "I", "L"], &["B"]]);
    assert!(needs_wait(&n, &history, &id("D")).unwrap());
}

#[test]
fn fig5_waits() {
    let n = net("fig5_wait_example");
    assert!(!is_consistent(&n, &n.union()).is_consistent());
    let plan = plan_optimal(&n);
    assert_eq!(plan.rounds, rounds(&[&["A"], &["B"], &["C"]]));
    assert_eq!(search_min_rounds(&n, DEFAULT_NODE_LIMIT).unwrap().min_rounds, Some(3));
    assert!(needs_wait(&n, &rounds(&[&["H1", "A"]]), &id("B")).unwrap());
    assert!(needs_wait(&n, &rounds(&[&["A"], &["B"]]), &id("C")).unwrap());
}

#[test]
fn fig6_master() {
    let n = net("fig6_multi_source");
    let master = n.synthetic_source().unwrap();
    assert_eq!(n.source(), master);
    for l in n.out_links(master).iter().map(|&e| n.link(e)) {
        assert_eq!(l.label, EdgeLabel::Both);
    }
    let plan = plan_optimal(&n);
    assert_eq!(plan.rounds, rounds(&[&["HA", "HB", "HC"]]));
}

/// Any consistent configuration reached by updating changed nodes has no
/// anomalous node.
#[test]
fn consistent_configurations_have_no_anomalies() {
    for f in all_fixtures() {
        let n = &f.instance;
        let changed = n.changed_nodes();
        assert!(changed.len() <= 12, "{}", f.name);
        for mask in 0u32..1 << changed.len() {
            let c = n.config_after(
                changed
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask >> i & 1 == 1)
                    .map(|(_, &u)| u),
            );
            if !is_consistent(n, &c).is_consistent() {
                continue;
            }
            let up = classify_upstream(n, &c).unwrap();
            assert!(up.values().all(|u| !u.anomalous), "{} mask {mask}", f.name);
        }
    }
}

#[test]
fn fixture_expectations_hold() {
    for f in all_fixtures() {
        let oracle = search_min_rounds(&f.instance, DEFAULT_NODE_LIMIT).unwrap();
        assert_eq!(oracle.exists, f.expected.solvable, "{}", f.name);
        assert_eq!(oracle.min_rounds, f.expected.min_rounds, "{}", f.name);
        assert_eq!(plan_optimal(&f.instance).is_solved(), f.expected.solvable, "{}", f.name);
    }
}
