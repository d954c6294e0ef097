//! Path predicates over configurations, computed without enumerating paths.
//!
//! Upstream questions ("is every path from the source to `u` an initial
//! path?") are answered by a breadth-first search over pairs of a node and
//! two flags recording whether the path so far lies in the initial and in the
//! final configuration. Downstream questions ("is every maximal path from `u`
//! a maximal path of the final configuration?") are answered by memoized
//! marks evaluated in reverse topological order.
//!
//! The zero-length path counts as a path from every node to itself, so the
//! source is always reachable with both flags set.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::netmodel::{Configuration, EdgeLabel, ModelError, NetworkInstance, NodeId};

/// Upstream classification of a node in a configuration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum UpstreamKind {
    /// Not reachable from the source.
    TypeA,
    /// Reachable only along paths present in both configurations.
    TypeB,
    /// Every path from the source is a final path, some not initial.
    TypeC,
    /// Every path from the source is an initial path, some not final.
    TypeD,
    /// Reached both by initial-only and by final-only paths.
    TypeE,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UpstreamClass {
    pub node: NodeId,
    pub kind: UpstreamKind,
    /// Some path from the source lies in neither configuration.
    pub anomalous: bool,
}

/// Downstream verdict for a node: which families of maximal paths contain
/// every maximal path leaving it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct DownMark {
    pub all_ci_max: bool,
    pub all_cf_max: bool,
    pub all_either_max: bool,
    pub all_both_max: bool,
}

impl DownMark {
    /// Mark of a node on or upstream of a cycle.
    pub const BAD: DownMark = DownMark {
        all_ci_max: false,
        all_cf_max: false,
        all_either_max: false,
        all_both_max: false,
    };
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Validity {
    Valid,
    Invalid,
    NotAChangedNode,
}

/// Why a configuration is not consistent.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Inconsistency {
    /// A maximal path from the source lying in neither configuration.
    Path(Vec<NodeId>),
    /// A cycle reachable from the source, with the path leading to it.
    Cycle { stem: Vec<NodeId>, cycle: Vec<NodeId> },
}

impl fmt::Display for Inconsistency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |ids: &[NodeId]| ids.iter().map(NodeId::as_str).collect::<Vec<_>>().join(" -> ");
        match self {
            Inconsistency::Path(p) => write!(f, "path {}", join(p)),
            Inconsistency::Cycle { stem, cycle } => {
                let first = cycle.first().map(NodeId::as_str).unwrap_or("");
                if stem.is_empty() {
                    write!(f, "cycle {} -> {}", join(cycle), first)
                } else {
                    write!(f, "path {} -> cycle {} -> {}", join(stem), join(cycle), first)
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Consistency {
    Consistent,
    Inconsistent(Inconsistency),
}

impl Consistency {
    pub fn is_consistent(&self) -> bool {
        matches!(self, Consistency::Consistent)
    }
}

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("configuration has a cycle reachable from the source: {0}")]
    CycleFromSource(Inconsistency),
    #[error("node `{0}` is reachable along a path in neither configuration")]
    Anomalous(NodeId),
    #[error(transparent)]
    Model(#[from] ModelError),
}

// Bits of the reachable-state mask: (initial, final) flags of a path prefix.
const TT: u8 = 1 << 3;
const TF: u8 = 1 << 2;
const FT: u8 = 1 << 1;
const FF: u8 = 1;

fn state_bit(initial: bool, fin: bool) -> u8 {
    match (initial, fin) {
        (true, true) => TT,
        (true, false) => TF,
        (false, true) => FT,
        (false, false) => FF,
    }
}

/// Upstream kind and anomaly flag per node, by index.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Upstream {
    pub kind: UpstreamKind,
    pub anomalous: bool,
}

fn kind_of(mask: u8) -> UpstreamKind {
    let clean = mask & !FF;
    if mask == 0 {
        UpstreamKind::TypeA
    } else if clean == TT {
        UpstreamKind::TypeB
    } else if clean != 0 && clean & TF == 0 {
        UpstreamKind::TypeC
    } else if clean != 0 && clean & FT == 0 {
        UpstreamKind::TypeD
    } else {
        UpstreamKind::TypeE
    }
}

/// Reachable (initial, final) states per node, as a bit mask.
pub fn upstream_masks(net: &NetworkInstance, config: &Configuration) -> Vec<u8> {
    let mut mask = vec![0u8; net.node_count()];
    let mut queue = std::collections::VecDeque::new();
    mask[net.source()] = TT;
    queue.push_back((net.source(), true, true));
    while let Some((u, ai, af)) = queue.pop_front() {
        for &e in net.out_links(u) {
            if !config.contains(e) {
                continue;
            }
            let l = net.link(e);
            let (bi, bf) = (ai && l.label.in_initial(), af && l.label.in_final());
            let bit = state_bit(bi, bf);
            if mask[l.to] & bit == 0 {
                mask[l.to] |= bit;
                queue.push_back((l.to, bi, bf));
            }
        }
    }
    mask
}

/// Index-based upstream classification. Fails if a cycle is reachable from
/// the source.
pub fn upstream(net: &NetworkInstance, config: &Configuration) -> Result<Vec<Upstream>, AnalysisError> {
    if let Some(witness) = cycle_from_source(net, config) {
        return Err(AnalysisError::CycleFromSource(witness));
    }
    Ok(upstream_masks(net, config)
        .into_iter()
        .map(|m| Upstream {
            kind: kind_of(m),
            anomalous: m & FF != 0,
        })
        .collect())
}

pub fn classify_upstream(
    net: &NetworkInstance,
    config: &Configuration,
) -> Result<BTreeMap<NodeId, UpstreamClass>, AnalysisError> {
    Ok(upstream(net, config)?
        .into_iter()
        .enumerate()
        .map(|(u, up)| {
            let node = net.node_id(u).clone();
            (
                node.clone(),
                UpstreamClass {
                    node,
                    kind: up.kind,
                    anomalous: up.anomalous,
                },
            )
        })
        .collect())
}

/// Memoized downstream marks for one configuration, optionally with a
/// single node's out-edges replaced by its final ones.
pub struct Marker<'a> {
    net: &'a NetworkInstance,
    config: &'a Configuration,
    updated: Option<usize>,
    memo: Vec<Option<DownMark>>,
    on_stack: Vec<bool>,
}

impl<'a> Marker<'a> {
    pub fn new(net: &'a NetworkInstance, config: &'a Configuration) -> Self {
        Self::with_update(net, config, None)
    }

    /// Marks for `upd1(config, updated)` without materializing it.
    pub fn with_update(net: &'a NetworkInstance, config: &'a Configuration, updated: Option<usize>) -> Self {
        Marker {
            net,
            config,
            updated,
            memo: vec![None; net.node_count()],
            on_stack: vec![false; net.node_count()],
        }
    }

    #[inline]
    fn present(&self, e: usize) -> bool {
        let l = self.net.link(e);
        if Some(l.from) == self.updated {
            l.label.in_final()
        } else {
            self.config.contains(e)
        }
    }

    fn base(&self, u: usize) -> DownMark {
        let net = self.net;
        let ci = net.out_links(u).iter().all(|&e| !net.link(e).label.in_initial());
        let cf = net.out_links(u).iter().all(|&e| !net.link(e).label.in_final());
        DownMark {
            all_ci_max: ci,
            all_cf_max: cf,
            all_either_max: ci || cf,
            all_both_max: ci && cf,
        }
    }

    fn combine(&self, u: usize) -> DownMark {
        let mut any = false;
        let mut m = DownMark {
            all_ci_max: true,
            all_cf_max: true,
            all_either_max: true,
            all_both_max: true,
        };
        for &e in self.net.out_links(u) {
            if !self.present(e) {
                continue;
            }
            any = true;
            let l = self.net.link(e);
            let v = self.memo[l.to].unwrap_or(DownMark::BAD);
            let (i, f) = (l.label.in_initial(), l.label.in_final());
            m.all_ci_max &= i && v.all_ci_max;
            m.all_cf_max &= f && v.all_cf_max;
            m.all_both_max &= l.label == EdgeLabel::Both && v.all_both_max;
            m.all_either_max &= match l.label {
                EdgeLabel::Both => v.all_either_max,
                EdgeLabel::InitialOnly => v.all_ci_max,
                EdgeLabel::FinalOnly => v.all_cf_max,
            };
        }
        if any {
            m
        } else {
            self.base(u)
        }
    }

    /// Mark of `root`, computing marks of everything below it as needed.
    pub fn mark(&mut self, root: usize) -> DownMark {
        if let Some(m) = self.memo[root] {
            return m;
        }
        let mut stack: Vec<(usize, usize)> = vec![(root, 0)];
        self.on_stack[root] = true;
        // A successor still on the stack closes a cycle; its memo entry is
        // empty, which `combine` reads as BAD.
        while let Some(&(u, next)) = stack.last() {
            let outs = self.net.out_links(u);
            if next < outs.len() {
                stack.last_mut().unwrap().1 += 1;
                let e = outs[next];
                if !self.present(e) {
                    continue;
                }
                let v = self.net.link(e).to;
                if self.memo[v].is_none() && !self.on_stack[v] {
                    self.on_stack[v] = true;
                    stack.push((v, 0));
                }
            } else {
                let m = self.combine(u);
                self.memo[u] = Some(m);
                self.on_stack[u] = false;
                stack.pop();
            }
        }
        self.memo[root].unwrap()
    }

    /// Mark of `s` once `s` alone switches to its final out-edges, read off
    /// the marks of its final successors in the unchanged configuration.
    ///
    /// Exact for every flag a successor can pass on: a successor whose
    /// downstream returned to `s` along edges carrying that flag would close
    /// a cycle inside one of the two proper configurations.
    pub fn mark_updated(&mut self, s: usize) -> DownMark {
        debug_assert!(self.updated.is_none());
        let net = self.net;
        let mut any = false;
        let mut m = DownMark {
            all_ci_max: true,
            all_cf_max: true,
            all_either_max: true,
            all_both_max: true,
        };
        for &e in net.out_links(s) {
            let l = net.link(e);
            if !l.label.in_final() {
                continue;
            }
            any = true;
            let v = self.mark(l.to);
            let both = l.label == EdgeLabel::Both;
            m.all_ci_max &= both && v.all_ci_max;
            m.all_cf_max &= v.all_cf_max;
            m.all_both_max &= both && v.all_both_max;
            m.all_either_max &= if both { v.all_either_max } else { v.all_cf_max };
        }
        if any {
            m
        } else {
            self.base(s)
        }
    }
}

/// Marks for every node of `config`, by index.
pub fn marks(net: &NetworkInstance, config: &Configuration) -> Vec<DownMark> {
    let mut marker = Marker::new(net, config);
    (0..net.node_count()).map(|u| marker.mark(u)).collect()
}

pub fn mark_downstream(net: &NetworkInstance, config: &Configuration) -> BTreeMap<NodeId, DownMark> {
    marks(net, config)
        .into_iter()
        .enumerate()
        .map(|(u, m)| (net.node_id(u).clone(), m))
        .collect()
}

fn downstream_holds(kind: UpstreamKind, m: DownMark) -> bool {
    match kind {
        // A node with no final out-edge is already final-maximal at its base case.
        UpstreamKind::TypeA => m.all_cf_max,
        UpstreamKind::TypeB => m.all_either_max,
        UpstreamKind::TypeC => m.all_cf_max,
        UpstreamKind::TypeD => m.all_ci_max,
        UpstreamKind::TypeE => m.all_both_max,
    }
}

/// Whether updating changed node `s` from `config` keeps it consistent,
/// given the node's upstream classification in `config`.
pub fn valid_with(net: &NetworkInstance, config: &Configuration, up: Upstream, s: usize) -> bool {
    let mut marker = Marker::with_update(net, config, Some(s));
    downstream_holds(up.kind, marker.mark(s))
}

pub fn is_valid(net: &NetworkInstance, config: &Configuration, s: &NodeId) -> Result<Validity, AnalysisError> {
    let s = net.require_node(s)?;
    if net.is_noop(s) {
        return Ok(Validity::NotAChangedNode);
    }
    let up = upstream(net, config)?[s];
    if up.anomalous {
        return Err(AnalysisError::Anomalous(net.node_id(s).clone()));
    }
    Ok(if valid_with(net, config, up, s) {
        Validity::Valid
    } else {
        Validity::Invalid
    })
}

/// The valid nodes among `candidates`, in the order given.
pub fn valid_nodes(
    net: &NetworkInstance,
    config: &Configuration,
    candidates: impl IntoIterator<Item = usize>,
) -> Result<Vec<usize>, AnalysisError> {
    let up = upstream(net, config)?;
    let mut marker = Marker::new(net, config);
    let mut out = Vec::new();
    for s in candidates {
        if up[s].anomalous {
            return Err(AnalysisError::Anomalous(net.node_id(s).clone()));
        }
        if !net.is_noop(s) && downstream_holds(up[s].kind, marker.mark_updated(s)) {
            out.push(s);
        }
    }
    Ok(out)
}

/// A cycle reachable from the source, as (stem, cycle) index paths.
pub fn cycle_from_source_ix(net: &NetworkInstance, config: &Configuration) -> Option<(Vec<usize>, Vec<usize>)> {
    const WHITE: u8 = 0;
    const GRAY: u8 = 1;
    const BLACK: u8 = 2;
    let mut color = vec![WHITE; net.node_count()];
    let mut stack: Vec<(usize, usize)> = vec![(net.source(), 0)];
    color[net.source()] = GRAY;
    while let Some(&(u, next)) = stack.last() {
        let outs = net.out_links(u);
        if next < outs.len() {
            stack.last_mut().unwrap().1 += 1;
            let e = outs[next];
            if !config.contains(e) {
                continue;
            }
            let v = net.link(e).to;
            match color[v] {
                WHITE => {
                    color[v] = GRAY;
                    stack.push((v, 0));
                }
                GRAY => {
                    let at = stack.iter().position(|&(w, _)| w == v).unwrap();
                    let nodes: Vec<usize> = stack.iter().map(|&(w, _)| w).collect();
                    return Some((nodes[..at].to_vec(), nodes[at..].to_vec()));
                }
                _ => {}
            }
        } else {
            color[u] = BLACK;
            stack.pop();
        }
    }
    None
}

fn ids(net: &NetworkInstance, path: &[usize]) -> Vec<NodeId> {
    path.iter().map(|&u| net.node_id(u).clone()).collect()
}

fn cycle_from_source(net: &NetworkInstance, config: &Configuration) -> Option<Inconsistency> {
    cycle_from_source_ix(net, config).map(|(stem, cycle)| Inconsistency::Cycle {
        stem: ids(net, &stem),
        cycle: ids(net, &cycle),
    })
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Follow {
    Either,
    Initial,
    Final,
    Any,
}

/// Whether every maximal path from the source is a maximal path of the
/// initial or of the final configuration.
pub fn is_consistent(net: &NetworkInstance, config: &Configuration) -> Consistency {
    if let Some(w) = cycle_from_source(net, config) {
        return Consistency::Inconsistent(w);
    }
    let mut marker = Marker::new(net, config);
    if marker.mark(net.source()).all_either_max {
        return Consistency::Consistent;
    }
    // Walk down along failing marks; the walk ends at a sink of `config`.
    let mut path = vec![net.source()];
    let mut u = net.source();
    let mut mode = Follow::Either;
    loop {
        let outs: Vec<usize> = net
            .out_links(u)
            .iter()
            .copied()
            .filter(|&e| config.contains(e))
            .collect();
        if outs.is_empty() {
            break;
        }
        let mut step = None;
        for &e in &outs {
            let l = net.link(e);
            let v = marker.mark(l.to);
            let (i, f) = (l.label.in_initial(), l.label.in_final());
            let next = match mode {
                Follow::Either => match l.label {
                    EdgeLabel::Both if !v.all_either_max => Some(Follow::Either),
                    EdgeLabel::InitialOnly if !v.all_ci_max => Some(Follow::Initial),
                    EdgeLabel::FinalOnly if !v.all_cf_max => Some(Follow::Final),
                    _ => None,
                },
                Follow::Initial if !i => Some(Follow::Any),
                Follow::Initial if !v.all_ci_max => Some(Follow::Initial),
                Follow::Final if !f => Some(Follow::Any),
                Follow::Final if !v.all_cf_max => Some(Follow::Final),
                Follow::Any => Some(Follow::Any),
                _ => None,
            };
            if let Some(m) = next {
                step = Some((l.to, m));
                break;
            }
        }
        match step {
            Some((v, m)) => {
                path.push(v);
                u = v;
                mode = m;
            }
            None => unreachable!("failing mark without a failing edge"),
        }
    }
    Consistency::Inconsistent(Inconsistency::Path(ids(net, &path)))
}
