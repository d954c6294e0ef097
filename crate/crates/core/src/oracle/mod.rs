//! Brute-force ground truth: exact minimum-round search and plan checking.
//!
//! A round `S` taken from a state where the nodes in `A` are already updated
//! is safe when every order of `S` is safe. For any order, a prefix leaves
//! `A ∪ P` updated for some `P ⊆ S`, and the union of the configurations
//! between two same-round updates has `A ∪ P` updated and a block `Q ⊆ S`
//! (two or more nodes) carrying both their old and new edges. So a round is
//! safe exactly when all those configurations are consistent, and the
//! search works over these subset pairs instead of permutations.
//!
//! Consistency here goes through [`paths::check`] only, never through the
//! analysis module, so the planner is checked against an independent
//! implementation.

pub mod paths;

use std::collections::VecDeque;
use std::fmt;

use thiserror::Error;

use crate::analysis::{self, Inconsistency};
use crate::netmodel::{Configuration, NetworkInstance, NodeId};
use crate::planner::WaitedPlan;

/// Default cap on changed nodes for the exact search.
pub const DEFAULT_NODE_LIMIT: usize = 10;

/// Largest round checked over every order by [`verify_plan`].
pub const EXHAUSTIVE_ROUND_LIMIT: usize = 10;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("instance has {count} changed nodes; the exact search is limited to {limit}")]
    TooLarge { count: usize, limit: usize },
    #[error("plan references unknown node `{0}`")]
    UnknownNode(NodeId),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleResult {
    pub exists: bool,
    pub min_rounds: Option<usize>,
    pub witness: Option<WaitedPlan>,
}

impl OracleResult {
    fn none() -> Self {
        OracleResult {
            exists: false,
            min_rounds: None,
            witness: None,
        }
    }
}

// Per-node digits of an assignment code; 0 keeps the old edges.
const NEW: usize = 1;
const MIXED: usize = 2;

/// Memoized consistency of every old/new/mixed assignment of the changed
/// nodes.
struct Lattice<'a> {
    net: &'a NetworkInstance,
    changed: Vec<usize>,
    pow3: Vec<usize>,
    memo: Vec<u8>,
}

impl<'a> Lattice<'a> {
    fn new(net: &'a NetworkInstance, limit: usize) -> Result<Self, OracleError> {
        let changed = net.changed_nodes();
        if changed.len() > limit {
            return Err(OracleError::TooLarge {
                count: changed.len(),
                limit,
            });
        }
        let pow3: Vec<usize> = (0..=changed.len()).map(|i| 3usize.pow(i as u32)).collect();
        let memo = vec![0; pow3[changed.len()]];
        Ok(Lattice {
            net,
            changed,
            pow3,
            memo,
        })
    }

    fn k(&self) -> usize {
        self.changed.len()
    }

    fn config(&self, code: usize) -> Configuration {
        let mut c = self.net.initial();
        for (i, &u) in self.changed.iter().enumerate() {
            match (code / self.pow3[i]) % 3 {
                0 => {}
                1 => self.net.apply_update(&mut c, u),
                _ => {
                    for &e in self.net.out_links(u) {
                        if self.net.link(e).label.in_final() {
                            c.insert(e);
                        }
                    }
                }
            }
        }
        c
    }

    fn ok(&mut self, code: usize) -> bool {
        if self.memo[code] == 0 {
            let c = self.config(code);
            self.memo[code] = if paths::check(self.net, &c).is_none() { 1 } else { 2 };
        }
        self.memo[code] == 1
    }

    fn code_of(&self, updated: u32) -> usize {
        (0..self.k())
            .filter(|i| updated >> i & 1 == 1)
            .map(|i| self.pow3[i] * NEW)
            .sum()
    }

    /// Checks the assignments of `round ∪ {x}` that put `x` in the prefix
    /// or in the mixed block; the others were covered when `round` itself
    /// was accepted.
    fn extends(&mut self, base: u32, round: &[usize], x: usize) -> bool {
        let base_code = self.code_of(base);
        let m = round.len();
        let total = 3usize.pow(m as u32);
        for assign in 0..total {
            let mut code = base_code;
            let mut mixed = 0;
            let mut a = assign;
            for &i in round {
                match a % 3 {
                    1 => code += self.pow3[i] * NEW,
                    2 => {
                        code += self.pow3[i] * MIXED;
                        mixed += 1;
                    }
                    _ => {}
                }
                a /= 3;
            }
            if mixed != 1 && !self.ok(code + self.pow3[x] * NEW) {
                return false;
            }
            if mixed >= 1 && !self.ok(code + self.pow3[x] * MIXED) {
                return false;
            }
        }
        true
    }

    /// Every nonempty safe round from `base`, as bit masks.
    fn rounds_from(&mut self, base: u32) -> Vec<u32> {
        let mut out = Vec::new();
        let mut current = Vec::new();
        self.grow(base, 0, &mut current, &mut out);
        out
    }

    fn grow(&mut self, base: u32, from: usize, round: &mut Vec<usize>, out: &mut Vec<u32>) {
        for x in from..self.k() {
            if base >> x & 1 == 1 {
                continue;
            }
            if self.extends(base, round, x) {
                round.push(x);
                out.push(round.iter().fold(0, |m, &i| m | 1 << i));
                self.grow(base, x + 1, round, out);
                round.pop();
            }
        }
    }

    fn round_ids(&self, mask: u32) -> Vec<NodeId> {
        (0..self.k())
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| self.net.node_id(self.changed[i]).clone())
            .collect()
    }
}

/// Breadth-first search over sets of updated nodes, one round per edge.
/// `allow(base, round)` can veto rounds.
fn bfs(lattice: &mut Lattice, mut allow: impl FnMut(&mut Lattice, u32, u32) -> bool) -> OracleResult {
    let k = lattice.k();
    let full: u32 = if k == 32 { u32::MAX } else { (1u32 << k) - 1 };
    if !lattice.ok(0) {
        return OracleResult::none();
    }
    let mut parent: Vec<Option<(u32, u32)>> = vec![None; 1 << k];
    let mut seen = vec![false; 1 << k];
    seen[0] = true;
    let mut queue = VecDeque::from([0u32]);
    while let Some(state) = queue.pop_front() {
        if state == full {
            let mut rounds = Vec::new();
            let mut s = state;
            while let Some((prev, round)) = parent[s as usize] {
                rounds.push(lattice.round_ids(round));
                s = prev;
            }
            rounds.reverse();
            return OracleResult {
                exists: true,
                min_rounds: Some(rounds.len()),
                witness: Some(WaitedPlan::solved(rounds)),
            };
        }
        for round in lattice.rounds_from(state) {
            let next = state | round;
            if !seen[next as usize] && allow(lattice, state, round) {
                seen[next as usize] = true;
                parent[next as usize] = Some((state, round));
                queue.push_back(next);
            }
        }
    }
    OracleResult::none()
}

/// Exact minimum number of rounds over all safe update schedules.
pub fn search_min_rounds(net: &NetworkInstance, node_limit: usize) -> Result<OracleResult, OracleError> {
    let mut lattice = Lattice::new(net, node_limit)?;
    Ok(bfs(&mut lattice, |_, _, _| true))
}

/// Like [`search_min_rounds`], but every round must be orderable so that
/// each node is valid, in the sense of [`analysis::is_valid`], when it is
/// updated.
pub fn search_min_rounds_careful(net: &NetworkInstance, node_limit: usize) -> Result<OracleResult, OracleError> {
    let mut lattice = Lattice::new(net, node_limit)?;
    let k = lattice.k();
    let mut valid: Vec<Option<u32>> = vec![None; 1 << k];
    let mut valid_at = |lattice: &mut Lattice, mask: u32| -> u32 {
        *valid[mask as usize].get_or_insert_with(|| {
            let code = lattice.code_of(mask);
            if !lattice.ok(code) {
                return 0;
            }
            let c = lattice.config(code);
            let pending = (0..k).filter(|i| mask >> i & 1 == 0).map(|i| lattice.changed[i]);
            let ok = analysis::valid_nodes(lattice.net, &c, pending).expect("configuration is consistent");
            (0..k)
                .filter(|&i| ok.contains(&lattice.changed[i]))
                .fold(0, |m, i| m | 1 << i)
        })
    };
    Ok(bfs(&mut lattice, |lattice, base, round| {
        // Subsets of the round reachable by valid-only steps.
        let members: Vec<usize> = (0..k).filter(|i| round >> i & 1 == 1).collect();
        let mut reach = vec![false; 1 << members.len()];
        reach[0] = true;
        for sub in 0..reach.len() {
            if !reach[sub] {
                continue;
            }
            let done = members
                .iter()
                .enumerate()
                .filter(|(j, _)| sub >> j & 1 == 1)
                .fold(base, |m, (_, &i)| m | 1 << i);
            let v = valid_at(lattice, done);
            for (j, &i) in members.iter().enumerate() {
                if sub >> j & 1 == 0 && v >> i & 1 == 1 {
                    reach[sub | 1 << j] = true;
                }
            }
        }
        reach[reach.len() - 1]
    }))
}

/// How much of each round's order space [`verify_plan`] covered.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    /// Every order of every round.
    Exhaustive,
    /// Some round was too large; it was checked in the given order and in
    /// every order differing from it by one adjacent swap.
    Sampled,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Regime::Exhaustive => f.write_str("exhaustive"),
            Regime::Sampled => f.write_str("sampled"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    /// The rounds do not cover each changed node exactly once.
    Partition {
        missing: Vec<NodeId>,
        repeated: Vec<NodeId>,
    },
    /// Some order of `round` reaches an inconsistent configuration right
    /// after updating `after`.
    Prefix {
        round: usize,
        order: Vec<NodeId>,
        after: NodeId,
        witness: Inconsistency,
    },
    /// In some order of `round`, the configurations between updating
    /// `first` and `last` overlap into an inconsistent union.
    Union {
        round: usize,
        order: Vec<NodeId>,
        first: NodeId,
        last: NodeId,
        witness: Inconsistency,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |ids: &[NodeId]| ids.iter().map(NodeId::as_str).collect::<Vec<_>>().join(", ");
        match self {
            Violation::Partition { missing, repeated } => {
                write!(f, "rounds do not partition the changed nodes")?;
                if !missing.is_empty() {
                    write!(f, "; missing [{}]", list(missing))?;
                }
                if !repeated.is_empty() {
                    write!(f, "; repeated [{}]", list(repeated))?;
                }
                Ok(())
            }
            Violation::Prefix {
                round,
                order,
                after,
                witness,
            } => write!(
                f,
                "prefix inconsistency in round {} (order [{}]) after updating {}: {}",
                round + 1,
                list(order),
                after,
                witness
            ),
            Violation::Union {
                round,
                order,
                first,
                last,
                witness,
            } => write!(
                f,
                "union inconsistency in round {} (order [{}]) between {} and {}: {}",
                round + 1,
                list(order),
                first,
                last,
                witness
            ),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verification {
    pub regime: Regime,
    pub violation: Option<Violation>,
}

impl Verification {
    pub fn is_ok(&self) -> bool {
        self.violation.is_none()
    }
}

/// Checks that `plan` updates every changed node once and that no order of
/// any round passes through an inconsistent configuration or an
/// inconsistent union of same-round configurations. No-op nodes in the plan
/// are ignored.
pub fn verify_plan(net: &NetworkInstance, plan: &WaitedPlan) -> Result<Verification, OracleError> {
    let mut rounds: Vec<Vec<usize>> = Vec::new();
    for round in &plan.rounds {
        let mut r = Vec::new();
        for id in round {
            let u = net.node_index(id).ok_or_else(|| OracleError::UnknownNode(id.clone()))?;
            if !net.is_noop(u) {
                r.push(u);
            }
        }
        rounds.push(r);
    }
    let regime = if rounds.iter().all(|r| r.len() <= EXHAUSTIVE_ROUND_LIMIT) {
        Regime::Exhaustive
    } else {
        Regime::Sampled
    };
    let done = |violation| Ok(Verification { regime, violation });

    let mut count = vec![0usize; net.node_count()];
    for &u in rounds.iter().flatten() {
        count[u] += 1;
    }
    let changed = net.changed_nodes();
    let missing: Vec<NodeId> = changed
        .iter()
        .filter(|&&u| count[u] == 0)
        .map(|&u| net.node_id(u).clone())
        .collect();
    let repeated: Vec<NodeId> = changed
        .iter()
        .filter(|&&u| count[u] > 1)
        .map(|&u| net.node_id(u).clone())
        .collect();
    if !missing.is_empty() || !repeated.is_empty() {
        return done(Some(Violation::Partition { missing, repeated }));
    }

    let mut base = net.initial();
    if let Some(w) = paths::check(net, &base) {
        // Unreachable for parsed instances: the initial configuration is proper.
        return done(Some(Violation::Prefix {
            round: 0,
            order: vec![],
            after: net.source_id().clone(),
            witness: w,
        }));
    }
    for (i, round) in rounds.iter().enumerate() {
        let found = if round.len() <= EXHAUSTIVE_ROUND_LIMIT {
            check_round_exhaustive(net, &base, round, i)
        } else {
            check_round_sampled(net, &base, round, i)
        };
        if found.is_some() {
            return done(found);
        }
        for &u in round {
            net.apply_update(&mut base, u);
        }
    }
    done(None)
}

fn add_final(net: &NetworkInstance, c: &mut Configuration, u: usize) {
    for &e in net.out_links(u) {
        if net.link(e).label.in_final() {
            c.insert(e);
        }
    }
}

fn check_round_exhaustive(
    net: &NetworkInstance,
    base: &Configuration,
    round: &[usize],
    index: usize,
) -> Option<Violation> {
    let m = round.len();
    let ids = |v: &[usize]| v.iter().map(|&u| net.node_id(u).clone()).collect::<Vec<_>>();
    // Prefix sets first, smallest first, so the simplest witness is reported.
    let mut prefixes: Vec<u32> = (1..1u32 << m).collect();
    prefixes.sort_by_key(|p| (p.count_ones(), *p));
    for p in prefixes {
        let mut c = base.clone();
        let mut order = Vec::new();
        for (j, &u) in round.iter().enumerate() {
            if p >> j & 1 == 1 {
                net.apply_update(&mut c, u);
                order.push(u);
            }
        }
        if let Some(w) = paths::check(net, &c) {
            let after = *order.last().unwrap();
            let rest: Vec<usize> = round.iter().copied().filter(|u| !order.contains(u)).collect();
            order.extend(rest);
            return Some(Violation::Prefix {
                round: index,
                order: ids(&order),
                after: net.node_id(after).clone(),
                witness: w,
            });
        }
    }
    for assign in 0..3usize.pow(m as u32) {
        let (mut prefix, mut block) = (Vec::new(), Vec::new());
        let mut a = assign;
        for &u in round {
            match a % 3 {
                1 => prefix.push(u),
                2 => block.push(u),
                _ => {}
            }
            a /= 3;
        }
        if block.len() < 2 {
            continue;
        }
        let mut c = base.clone();
        for &u in &prefix {
            net.apply_update(&mut c, u);
        }
        for &u in &block {
            add_final(net, &mut c, u);
        }
        if let Some(w) = paths::check(net, &c) {
            let mut order = prefix.clone();
            order.extend(&block);
            order.extend(round.iter().filter(|u| !prefix.contains(u) && !block.contains(u)));
            return Some(Violation::Union {
                round: index,
                order: ids(&order),
                first: net.node_id(block[0]).clone(),
                last: net.node_id(*block.last().unwrap()).clone(),
                witness: w,
            });
        }
    }
    None
}

/// Checks one order: every prefix, and every same-round union whose span
/// `[j, k]` satisfies `span(j, k)`.
fn check_order(
    net: &NetworkInstance,
    base: &Configuration,
    order: &[usize],
    index: usize,
    prefix_at: impl Fn(usize) -> bool,
    span: impl Fn(usize, usize) -> bool,
) -> Option<Violation> {
    let ids = || order.iter().map(|&u| net.node_id(u).clone()).collect::<Vec<_>>();
    let mut before = base.clone();
    for (j, &u) in order.iter().enumerate() {
        let mut after = before.clone();
        net.apply_update(&mut after, u);
        if prefix_at(j) {
            if let Some(w) = paths::check(net, &after) {
                return Some(Violation::Prefix {
                    round: index,
                    order: ids(),
                    after: net.node_id(u).clone(),
                    witness: w,
                });
            }
        }
        let mut union = before.clone();
        for (k, &v) in order.iter().enumerate().skip(j) {
            add_final(net, &mut union, v);
            if k > j && span(j, k) {
                if let Some(w) = paths::check(net, &union) {
                    return Some(Violation::Union {
                        round: index,
                        order: ids(),
                        first: net.node_id(u).clone(),
                        last: net.node_id(v).clone(),
                        witness: w,
                    });
                }
            }
        }
        before = after;
    }
    None
}

fn check_round_sampled(
    net: &NetworkInstance,
    base: &Configuration,
    round: &[usize],
    index: usize,
) -> Option<Violation> {
    if let Some(v) = check_order(net, base, round, index, |_| true, |_, _| true) {
        return Some(v);
    }
    // Swapping positions s and s+1 only creates new prefixes at s and new
    // spans that end at s or start at s+1.
    for s in 0..round.len().saturating_sub(1) {
        let mut order = round.to_vec();
        order.swap(s, s + 1);
        let v = check_order(net, base, &order, index, |j| j == s, |j, k| k == s || j == s + 1);
        if v.is_some() {
            return v;
        }
    }
    None
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

    fn plan(rounds: &[&[&str]]) -> WaitedPlan {
        WaitedPlan::solved(
            rounds
                .iter()
                .map(|r| r.iter().map(|&s| NodeId::from(s)).collect())
                .collect(),
        )
    }

    #[test]
    fn fig1_needs_two_rounds() {
        let net = fig1();
        let r = search_min_rounds(&net, DEFAULT_NODE_LIMIT).unwrap();
        assert!(r.exists);
        assert_eq!(r.min_rounds, Some(2));
        assert_eq!(r.witness, Some(plan(&[&["D"], &["A"]])));
        assert_eq!(search_min_rounds_careful(&net, DEFAULT_NODE_LIMIT).unwrap(), r);
    }

    #[test]
    fn verify_fig1_plans() {
        let net = fig1();
        let ok = verify_plan(&net, &plan(&[&["D"], &["A"]])).unwrap();
        assert!(ok.is_ok());
        assert_eq!(ok.regime, Regime::Exhaustive);

        let with_noop = verify_plan(&net, &plan(&[&["D", "C"], &["A", "H1"]])).unwrap();
        assert!(with_noop.is_ok());

        match verify_plan(&net, &plan(&[&["A"], &["D"]])).unwrap().violation {
            Some(Violation::Prefix { round: 0, after, .. }) => assert_eq!(after.as_str(), "A"),
            other => panic!("unexpected {other:?}"),
        }
        match verify_plan(&net, &plan(&[&["D", "A"]])).unwrap().violation {
            Some(Violation::Prefix {
                round: 0, order, after, ..
            }) => {
                assert_eq!(after.as_str(), "A");
                assert_eq!(order, [NodeId::from("A"), NodeId::from("D")]);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            verify_plan(&net, &plan(&[&["D"]])).unwrap().violation,
            Some(Violation::Partition { .. })
        ));
        assert!(matches!(
            verify_plan(&net, &plan(&[&["D"], &["A", "D"]])).unwrap().violation,
            Some(Violation::Partition { .. })
        ));
        assert!(matches!(
            verify_plan(&net, &plan(&[&["Z"]])),
            Err(OracleError::UnknownNode(_))
        ));
    }

    #[test]
    fn identity_instance() {
        use EdgeLabel::*;
        let net = NetworkInstance::new(
            ["H1", "H2"].map(NodeId::from),
            "H1".into(),
            [Edge::new("H1", "H2", Both)],
        )
        .unwrap();
        let r = search_min_rounds(&net, DEFAULT_NODE_LIMIT).unwrap();
        assert!(r.exists);
        assert_eq!(r.min_rounds, Some(0));
    }

    #[test]
    fn node_limit_enforced() {
        let net = fig1();
        assert!(matches!(
            search_min_rounds(&net, 1),
            Err(OracleError::TooLarge { count: 2, limit: 1 })
        ));
    }
}
