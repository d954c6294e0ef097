//! Consistency checking that shares nothing with the analysis module.
//!
//! [`check`] walks the source's reachable subgraph directly: cycles are found
//! by peeling zero in-degree nodes, and maximal paths are classified by a
//! forward search over (node, still-initial, still-final) states.
//! [`maximal_paths`] and [`paths_between`] list paths explicitly and are only
//! meant for small graphs in tests.

use std::collections::VecDeque;

use crate::analysis::Inconsistency;
use crate::netmodel::{Configuration, NetworkInstance, NodeId};

fn succ<'a>(
    net: &'a NetworkInstance,
    config: &'a Configuration,
    u: usize,
) -> impl Iterator<Item = (usize, usize)> + 'a {
    net.out_links(u)
        .iter()
        .copied()
        .filter(move |&e| config.contains(e))
        .map(move |e| (e, net.link(e).to))
}

fn reachable(net: &NetworkInstance, config: &Configuration, from: usize) -> Vec<bool> {
    let mut seen = vec![false; net.node_count()];
    let mut stack = vec![from];
    seen[from] = true;
    while let Some(u) = stack.pop() {
        for (_, v) in succ(net, config, u) {
            if !seen[v] {
                seen[v] = true;
                stack.push(v);
            }
        }
    }
    seen
}

fn to_ids(net: &NetworkInstance, path: &[usize]) -> Vec<NodeId> {
    path.iter().map(|&u| net.node_id(u).clone()).collect()
}

fn bfs_path(net: &NetworkInstance, config: &Configuration, from: usize, to: usize) -> Vec<usize> {
    let mut parent = vec![usize::MAX; net.node_count()];
    let mut queue = VecDeque::from([from]);
    parent[from] = from;
    while let Some(u) = queue.pop_front() {
        if u == to {
            break;
        }
        for (_, v) in succ(net, config, u) {
            if parent[v] == usize::MAX {
                parent[v] = u;
                queue.push_back(v);
            }
        }
    }
    let mut path = vec![to];
    let mut u = to;
    while u != from {
        u = parent[u];
        path.push(u);
    }
    path.reverse();
    path
}

/// A cycle among nodes reachable from the source, if any.
fn reachable_cycle(net: &NetworkInstance, config: &Configuration) -> Option<Inconsistency> {
    let live = reachable(net, config, net.source());
    let mut indeg = vec![0usize; net.node_count()];
    for u in (0..net.node_count()).filter(|&u| live[u]) {
        for (_, v) in succ(net, config, u) {
            indeg[v] += 1;
        }
    }
    let mut removed = vec![false; net.node_count()];
    let mut queue: VecDeque<usize> = (0..net.node_count()).filter(|&u| live[u] && indeg[u] == 0).collect();
    while let Some(u) = queue.pop_front() {
        removed[u] = true;
        for (_, v) in succ(net, config, u) {
            indeg[v] -= 1;
            if indeg[v] == 0 {
                queue.push_back(v);
            }
        }
    }
    let stuck = (0..net.node_count()).find(|&u| live[u] && !removed[u])?;
    // Every stuck node has a stuck predecessor; walking backwards must repeat.
    let mut pos = vec![usize::MAX; net.node_count()];
    let mut walk = Vec::new();
    let mut u = stuck;
    while pos[u] == usize::MAX {
        pos[u] = walk.len();
        walk.push(u);
        u = (0..net.node_count())
            .find(|&p| live[p] && !removed[p] && succ(net, config, p).any(|(_, v)| v == u))
            .expect("stuck node has a stuck predecessor");
    }
    let mut cycle: Vec<usize> = walk[pos[u]..].to_vec();
    cycle.reverse();
    let entry = cycle[0];
    let mut stem = bfs_path(net, config, net.source(), entry);
    stem.pop();
    Some(Inconsistency::Cycle {
        stem: to_ids(net, &stem),
        cycle: to_ids(net, &cycle),
    })
}

/// `None` when every maximal path from the source is a maximal path of the
/// initial or of the final configuration; otherwise a witness.
pub fn check(net: &NetworkInstance, config: &Configuration) -> Option<Inconsistency> {
    if let Some(cycle) = reachable_cycle(net, config) {
        return Some(cycle);
    }
    let n = net.node_count();
    let state = |u: usize, i: bool, f: bool| u * 4 + (i as usize) * 2 + f as usize;
    let mut parent = vec![usize::MAX; n * 4];
    let start = state(net.source(), true, true);
    parent[start] = start;
    let mut queue = VecDeque::from([(net.source(), true, true)]);
    while let Some((u, i, f)) = queue.pop_front() {
        let mut is_sink = true;
        for (e, v) in succ(net, config, u) {
            is_sink = false;
            let label = net.link(e).label;
            let (ni, nf) = (i && label.in_initial(), f && label.in_final());
            let s = state(v, ni, nf);
            if parent[s] == usize::MAX {
                parent[s] = state(u, i, f);
                queue.push_back((v, ni, nf));
            }
        }
        if !is_sink {
            continue;
        }
        let ends_initial = net.out_links(u).iter().all(|&e| !net.link(e).label.in_initial());
        let ends_final = net.out_links(u).iter().all(|&e| !net.link(e).label.in_final());
        if !(i && ends_initial || f && ends_final) {
            let mut path = vec![u];
            let mut s = state(u, i, f);
            while s != start {
                s = parent[s];
                path.push(s / 4);
            }
            path.reverse();
            return Some(Inconsistency::Path(to_ids(net, &path)));
        }
    }
    None
}

/// Outcome of an explicit enumeration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Enumerated {
    Paths(Vec<Vec<usize>>),
    /// A cycle is reachable, so some maximal path is infinite.
    Infinite,
}

/// Every maximal path starting at `from`, including the zero-length path
/// when `from` has no out-edges.
pub fn maximal_paths(net: &NetworkInstance, config: &Configuration, from: usize) -> Enumerated {
    let mut out = Vec::new();
    let mut path = vec![from];
    if extend_maximal(net, config, &mut path, &mut out) {
        Enumerated::Paths(out)
    } else {
        Enumerated::Infinite
    }
}

fn extend_maximal(
    net: &NetworkInstance,
    config: &Configuration,
    path: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
) -> bool {
    let u = *path.last().unwrap();
    let next: Vec<usize> = succ(net, config, u).map(|(_, v)| v).collect();
    if next.is_empty() {
        out.push(path.clone());
        return true;
    }
    for v in next {
        if path.contains(&v) {
            return false;
        }
        path.push(v);
        let finite = extend_maximal(net, config, path, out);
        path.pop();
        if !finite {
            return false;
        }
    }
    true
}

/// Every simple path from `from` to `to`; the zero-length path when they
/// coincide.
pub fn paths_between(net: &NetworkInstance, config: &Configuration, from: usize, to: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut path = vec![from];
    collect_between(net, config, to, &mut path, &mut out);
    out
}

fn collect_between(
    net: &NetworkInstance,
    config: &Configuration,
    to: usize,
    path: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
) {
    let u = *path.last().unwrap();
    if u == to {
        out.push(path.clone());
        return;
    }
    for (_, v) in succ(net, config, u) {
        if path.contains(&v) {
            continue;
        }
        path.push(v);
        collect_between(net, config, to, path, out);
        path.pop();
    }
}

/// Whether `path` uses only edges of the canonical configuration selected by
/// `initial`, and, when `maximal`, ends at a node with no out-edge there.
pub fn path_in(net: &NetworkInstance, path: &[usize], initial: bool, maximal: bool) -> bool {
    let member = |label: crate::netmodel::EdgeLabel| {
        if initial {
            label.in_initial()
        } else {
            label.in_final()
        }
    };
    let edges_ok = path.windows(2).all(|w| {
        net.out_links(w[0])
            .iter()
            .any(|&e| net.link(e).to == w[1] && member(net.link(e).label))
    });
    let end = *path.last().unwrap();
    edges_ok && (!maximal || net.out_links(end).iter().all(|&e| !member(net.link(e).label)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netmodel::{Edge, EdgeLabel};

    fn fig1() -> NetworkInstance {
        use EdgeLabel::*;
        NetworkInstance::new(
            ["H1", "A", "B", "C", "D", "H2"].map(NodeId::from),
            "H1".into(),
            [
                Edge::new("H1", "A", Both),
                Edge::new("A", "C", InitialOnly),
                Edge::new("C", "B", Both),
                Edge::new("B", "H2", Both),
                Edge::new("A", "D", FinalOnly),
                Edge::new("D", "B", FinalOnly),
            ],
        )
        .unwrap()
    }

    #[test]
    fn canonical_configurations_pass() {
        let net = fig1();
        assert_eq!(check(&net, &net.initial()), None);
        assert_eq!(check(&net, &net.final_config()), None);
    }

    #[test]
    fn union_of_fig1_fails() {
        let net = fig1();
        // H1 -> A -> C -> B -> H2 and H1 -> A -> D -> B -> H2 are both fine,
        // but A alone carries both out-edges, so the union is still
        // consistent; updating A without D is not.
        assert_eq!(check(&net, &net.union()), None);
        let after_a = net.upd1(&net.initial(), &"A".into()).unwrap();
        let w = check(&net, &after_a).unwrap();
        assert_eq!(w, Inconsistency::Path(["H1", "A", "D"].map(NodeId::from).to_vec()));
    }

    #[test]
    fn enumeration_lists_paths() {
        let net = fig1();
        let h1 = net.source();
        match maximal_paths(&net, &net.union(), h1) {
            Enumerated::Paths(p) => assert_eq!(p.len(), 2),
            Enumerated::Infinite => panic!(),
        }
        let b = net.node_index(&"B".into()).unwrap();
        assert_eq!(paths_between(&net, &net.union(), h1, b).len(), 2);
        assert_eq!(paths_between(&net, &net.union(), b, b), vec![vec![b]]);
    }
}
