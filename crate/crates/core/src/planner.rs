//! Update planning: which switches to update, grouped into rounds separated
//! by waits.
//!
//! Both planners repeatedly pick nodes whose update keeps the current
//! configuration consistent. The sequential planner updates one node per
//! round. The optimal planner puts into each round every node that is valid
//! at the start of the round, plus pending nodes that stay cut off from the
//! source for the whole round and become valid as the round proceeds.
//! Nodes inside a round are reported in pick order: the valid ones
//! lexicographically, then the others in the order they became valid.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::{self, AnalysisError, Marker, UpstreamKind};
use crate::netmodel::{Configuration, ModelError, NetworkInstance, NodeId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PlanStatus {
    Solved,
    NoConsistentOrder,
}

impl fmt::Display for PlanStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PlanStatus::Solved => f.write_str("Solved"),
            PlanStatus::NoConsistentOrder => f.write_str("NoConsistentOrder"),
        }
    }
}

/// Rounds of node updates; a wait separates consecutive rounds.
///
/// A plan that failed keeps the rounds found before the planner got stuck.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct WaitedPlan {
    pub status: PlanStatus,
    pub rounds: Vec<Vec<NodeId>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlanFile {
    status: PlanStatus,
    rounds: Vec<Vec<NodeId>>,
    #[serde(default)]
    waits: Option<usize>,
}

#[derive(Debug, Error)]
pub enum PlanFormatError {
    #[error("malformed plan: {0}")]
    Json(#[from] serde_json::Error),
    #[error("plan declares {declared} waits but has {rounds} rounds")]
    WaitCount { declared: usize, rounds: usize },
}

impl WaitedPlan {
    pub fn solved(rounds: Vec<Vec<NodeId>>) -> Self {
        WaitedPlan {
            status: PlanStatus::Solved,
            rounds,
        }
    }

    pub fn waits(&self) -> usize {
        self.rounds.len().saturating_sub(1)
    }

    pub fn is_solved(&self) -> bool {
        self.status == PlanStatus::Solved
    }

    /// All nodes in update order.
    pub fn sequence(&self) -> Vec<NodeId> {
        self.rounds.iter().flatten().cloned().collect()
    }

    /// Pretty JSON with keys `status`, `rounds`, `waits` in that order.
    pub fn to_json(&self) -> String {
        let file = PlanFile {
            status: self.status,
            rounds: self.rounds.clone(),
            waits: Some(self.waits()),
        };
        serde_json::to_string_pretty(&file).expect("plan serialization cannot fail")
    }

    /// Parses a plan; `waits` is optional but must match when present.
    pub fn from_json(text: &str) -> Result<Self, PlanFormatError> {
        let file: PlanFile = serde_json::from_str(text)?;
        let plan = WaitedPlan {
            status: file.status,
            rounds: file.rounds,
        };
        match file.waits {
            Some(w) if w != plan.waits() => Err(PlanFormatError::WaitCount {
                declared: w,
                rounds: plan.rounds.len(),
            }),
            _ => Ok(plan),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlanMode {
    Sequential,
    Optimal,
}

#[derive(Debug, Error)]
pub enum PlannerError {
    #[error("node `{0}` is not a changed node")]
    NotChanged(NodeId),
    #[error("node `{0}` was already updated")]
    AlreadyUpdated(NodeId),
    #[error("node `{0}` cannot be updated safely in the current configuration")]
    NotEligible(NodeId),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

const CONSISTENT: &str = "planner only reaches consistent configurations";

/// Pending changed nodes, as a membership table plus count.
struct Pending {
    flags: Vec<bool>,
    left: usize,
}

impl Pending {
    fn all_changed(net: &NetworkInstance) -> Self {
        let flags: Vec<bool> = (0..net.node_count()).map(|u| !net.is_noop(u)).collect();
        let left = flags.iter().filter(|&&p| p).count();
        Pending { flags, left }
    }

    fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.flags.iter().enumerate().filter(|(_, &p)| p).map(|(u, _)| u)
    }

    fn take(&mut self, u: usize) {
        debug_assert!(self.flags[u]);
        self.flags[u] = false;
        self.left -= 1;
    }
}

fn ids(net: &NetworkInstance, nodes: &[usize]) -> Vec<NodeId> {
    nodes.iter().map(|&u| net.node_id(u).clone()).collect()
}

/// One node per round, always the smallest valid one.
pub fn plan_sequential(net: &NetworkInstance) -> WaitedPlan {
    let mut current = net.initial();
    let mut pending = Pending::all_changed(net);
    let mut rounds = Vec::new();
    while pending.left > 0 {
        let valid = analysis::valid_nodes(net, &current, pending.iter()).expect(CONSISTENT);
        let Some(&u) = valid.first() else {
            return WaitedPlan {
                status: PlanStatus::NoConsistentOrder,
                rounds,
            };
        };
        net.apply_update(&mut current, u);
        pending.take(u);
        rounds.push(vec![net.node_id(u).clone()]);
    }
    WaitedPlan::solved(rounds)
}

/// Nodes that share the next round from `config`, in pick order.
///
/// The round starts with every pending valid node. Pending nodes that stay
/// unreachable from the source even with the new edges of those valid
/// nodes added on top of the current ones then join in passes, each once
/// it is valid after the updates picked in earlier passes. A path from the
/// source to such a node would have to enter it through an edge of some
/// node outside the round, so none of them becomes reachable during the
/// round and their position in it cannot affect any packet.
pub fn round_candidates(
    net: &NetworkInstance,
    config: &Configuration,
    pending: impl IntoIterator<Item = usize>,
) -> Result<Vec<usize>, AnalysisError> {
    let pending: Vec<usize> = pending.into_iter().collect();
    let valid = analysis::valid_nodes(net, config, pending.iter().copied())?;
    let mut grown = config.clone();
    for &u in &valid {
        for &e in net.out_links(u) {
            if net.link(e).label.in_final() {
                grown.insert(e);
            }
        }
    }
    let seen = reach(net, &grown);
    let mut in_round = vec![false; net.node_count()];
    for &u in &valid {
        in_round[u] = true;
    }
    let mut detached: Vec<usize> = pending.iter().copied().filter(|&u| !seen[u] && !in_round[u]).collect();

    let mut current = config.clone();
    for &u in &valid {
        net.apply_update(&mut current, u);
    }
    let mut round = valid;
    // A joining node only needs its final successors to be good in
    // `current`; joins never spoil a good node, so each pass can admit every
    // qualifying node against one shared marking.
    loop {
        let joined: Vec<usize> = {
            let mut marker = Marker::new(net, &current);
            detached
                .iter()
                .copied()
                .filter(|&x| {
                    net.out_links(x)
                        .iter()
                        .filter(|&&e| net.link(e).label.in_final())
                        .all(|&e| marker.mark(net.link(e).to).all_cf_max)
                })
                .collect()
        };
        if joined.is_empty() {
            break;
        }
        for &x in &joined {
            net.apply_update(&mut current, x);
            in_round[x] = true;
        }
        detached.retain(|&x| !in_round[x]);
        round.extend(joined);
    }
    Ok(round)
}

fn reach(net: &NetworkInstance, config: &Configuration) -> Vec<bool> {
    let mut seen = vec![false; net.node_count()];
    let mut stack = vec![net.source()];
    seen[net.source()] = true;
    while let Some(u) = stack.pop() {
        for &e in net.out_links(u) {
            let v = net.link(e).to;
            if config.contains(e) && !seen[v] {
                seen[v] = true;
                stack.push(v);
            }
        }
    }
    seen
}

/// Fewest rounds: each round updates every node of [`round_candidates`].
pub fn plan_optimal(net: &NetworkInstance) -> WaitedPlan {
    plan_optimal_with(net, |_, _, _| {})
}

/// Runs the optimal planner, calling `observe(config, pending, round)` at
/// the start of every round.
fn plan_optimal_with(net: &NetworkInstance, mut observe: impl FnMut(&Configuration, &[usize], &[usize])) -> WaitedPlan {
    let mut current = net.initial();
    let mut pending = Pending::all_changed(net);
    let mut rounds = Vec::new();
    while pending.left > 0 {
        let waiting: Vec<usize> = pending.iter().collect();
        let round = round_candidates(net, &current, waiting.iter().copied()).expect(CONSISTENT);
        if round.is_empty() {
            return WaitedPlan {
                status: PlanStatus::NoConsistentOrder,
                rounds,
            };
        }
        observe(&current, &waiting, &round);
        for &u in &round {
            net.apply_update(&mut current, u);
            pending.take(u);
        }
        rounds.push(ids(net, &round));
    }
    WaitedPlan::solved(rounds)
}

pub fn plan(net: &NetworkInstance, mode: PlanMode) -> WaitedPlan {
    match mode {
        PlanMode::Sequential => plan_sequential(net),
        PlanMode::Optimal => plan_optimal(net),
    }
}

/// Whether a wait must precede updating `node` after the rounds in
/// `history`: true unless `node` could have joined the last round.
///
/// `node` must be pending and safe to update now, i.e. valid or unreachable
/// from the source. No-op nodes in `history` are ignored.
pub fn needs_wait(net: &NetworkInstance, history: &[Vec<NodeId>], node: &NodeId) -> Result<bool, PlannerError> {
    let n = net.require_node(node)?;
    if net.is_noop(n) {
        return Err(PlannerError::NotChanged(node.clone()));
    }
    let mut updated = vec![false; net.node_count()];
    let mut before_last = net.initial();
    let mut current = net.initial();
    for (i, round) in history.iter().enumerate() {
        if i + 1 == history.len() {
            before_last = current.clone();
        }
        for id in round {
            let u = net.require_node(id)?;
            if net.is_noop(u) {
                continue;
            }
            if updated[u] {
                return Err(PlannerError::AlreadyUpdated(id.clone()));
            }
            updated[u] = true;
            net.apply_update(&mut current, u);
        }
    }
    if updated[n] {
        return Err(PlannerError::AlreadyUpdated(node.clone()));
    }
    let up = analysis::upstream(net, &current)?;
    let eligible = up[n].kind == UpstreamKind::TypeA || analysis::valid_nodes(net, &current, [n])?.contains(&n);
    if !eligible {
        return Err(PlannerError::NotEligible(node.clone()));
    }
    if history.is_empty() {
        before_last = current;
    }
    // Pending at the start of the last round: everything not updated before it.
    let last: Vec<usize> = history
        .last()
        .map(|r| r.iter().filter_map(|id| net.node_index(id)).collect())
        .unwrap_or_default();
    let pending_then = (0..net.node_count()).filter(|&u| !net.is_noop(u) && (!updated[u] || last.contains(&u)));
    let round = round_candidates(net, &before_last, pending_then)?;
    Ok(!round.contains(&n))
}

/// A broken planner invariant, found by [`plan_optimal_checked`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum InvariantViolation {
    /// The configuration after updating `after` is inconsistent.
    Prefix { round: usize, after: NodeId },
    /// `lost` was valid before `updated` (itself valid) was updated, and is
    /// not afterwards. `unreachable` tells whether `lost` is now cut off from
    /// the source, so that only the downstream check for such nodes failed.
    Validity {
        round: usize,
        updated: NodeId,
        lost: NodeId,
        unreachable: bool,
    },
    /// `lost` was scheduled for the round but, after `updated`, is neither
    /// valid nor unreachable from the source.
    RoundMembership {
        round: usize,
        updated: NodeId,
        lost: NodeId,
    },
}

/// Statistics of a checked run.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CheckReport {
    pub steps: usize,
    pub violations: Vec<InvariantViolation>,
}

/// The optimal planner with every round replayed one node at a time, in
/// pick order, checking after each update that the configuration is
/// consistent, that valid nodes stay valid, and that the remaining nodes of
/// the round stay safe to update.
pub fn plan_optimal_checked(net: &NetworkInstance) -> (WaitedPlan, CheckReport) {
    let mut report = CheckReport::default();
    let mut round_no = 0;
    let plan = plan_optimal_with(net, |start, waiting, round| {
        let mut config = start.clone();
        let mut left: Vec<usize> = waiting.to_vec();
        for (i, &u) in round.iter().enumerate() {
            let valid_before = analysis::valid_nodes(net, &config, left.iter().copied()).expect(CONSISTENT);
            net.apply_update(&mut config, u);
            left.retain(|&w| w != u);
            report.steps += 1;
            let name = net.node_id(u).clone();
            if !analysis::is_consistent(net, &config).is_consistent() {
                report.violations.push(InvariantViolation::Prefix {
                    round: round_no,
                    after: name,
                });
                // Further checks need a consistent configuration.
                return;
            }
            let up = analysis::upstream(net, &config).expect(CONSISTENT);
            let valid_after = analysis::valid_nodes(net, &config, left.iter().copied()).expect(CONSISTENT);
            if valid_before.contains(&u) {
                for &w in valid_before.iter().filter(|&&w| w != u) {
                    if !valid_after.contains(&w) {
                        report.violations.push(InvariantViolation::Validity {
                            round: round_no,
                            updated: name.clone(),
                            lost: net.node_id(w).clone(),
                            unreachable: up[w].kind == UpstreamKind::TypeA,
                        });
                    }
                }
            }
            for &w in &round[i + 1..] {
                if up[w].kind != UpstreamKind::TypeA && !valid_after.contains(&w) {
                    report.violations.push(InvariantViolation::RoundMembership {
                        round: round_no,
                        updated: name.clone(),
                        lost: net.node_id(w).clone(),
                    });
                }
            }
        }
        round_no += 1;
    });
    (plan, report)
}
