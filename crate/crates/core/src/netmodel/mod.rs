//! Topologies, forwarding configurations and the per-switch update primitive.
//!
//! A [`NetworkInstance`] fixes the node set, the designated source and every
//! edge of the topology. Each edge carries an [`EdgeLabel`] saying whether it
//! belongs to the initial configuration, the final one, or both, so the two
//! canonical configurations are recovered exactly from the labels. Any other
//! forwarding state (the current state during an update, unions of states)
//! is a [`Configuration`]: a set of edges of the owning instance.
//!
//! Internally nodes and edges are addressed by dense indices. Nodes are kept
//! sorted by id, so index order and lexicographic id order coincide, which is
//! what the planners rely on for deterministic tie-breaking.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

mod file;

pub use file::{parse_instance, parse_instance_with, EdgeEntry, InstanceFile, Membership, ParseOptions};

/// Identifier of a switch or host.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(String);

impl NodeId {
    pub fn new(id: impl Into<String>) -> Self {
        NodeId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for NodeId {
    fn from(s: &str) -> Self {
        NodeId(s.to_owned())
    }
}

impl From<String> for NodeId {
    fn from(s: String) -> Self {
        NodeId(s)
    }
}

impl std::borrow::Borrow<str> for NodeId {
    fn borrow(&self) -> &str {
        &self.0
    }
}

/// Membership of a topology edge in the initial and final configurations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EdgeLabel {
    InitialOnly,
    FinalOnly,
    Both,
}

impl EdgeLabel {
    #[inline]
    pub fn in_initial(self) -> bool {
        matches!(self, EdgeLabel::InitialOnly | EdgeLabel::Both)
    }

    #[inline]
    pub fn in_final(self) -> bool {
        matches!(self, EdgeLabel::FinalOnly | EdgeLabel::Both)
    }
}

/// Which of the two canonical configurations an error refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConfigKind {
    Initial,
    Final,
}

impl fmt::Display for ConfigKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigKind::Initial => f.write_str("initial"),
            ConfigKind::Final => f.write_str("final"),
        }
    }
}

/// A labeled, directed topology edge.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Edge {
    pub from: NodeId,
    pub to: NodeId,
    pub label: EdgeLabel,
}

impl Edge {
    pub fn new(from: impl Into<NodeId>, to: impl Into<NodeId>, label: EdgeLabel) -> Self {
        Edge {
            from: from.into(),
            to: to.into(),
            label,
        }
    }
}

/// Errors raised while building, parsing or querying an instance.
#[derive(Debug, Error)]
pub enum ModelError {
    #[error("node ids must be nonempty")]
    EmptyNodeId,
    #[error("duplicate node `{0}`")]
    DuplicateNode(NodeId),
    #[error("duplicate edge `{from}` -> `{to}`")]
    DuplicateEdge { from: NodeId, to: NodeId },
    #[error("unknown node `{0}`")]
    UnknownNode(NodeId),
    #[error("self-loop at `{0}`")]
    SelfLoop(NodeId),
    #[error("cycle in {config} configuration: {}", display_cycle(.nodes))]
    Cycle { config: ConfigKind, nodes: Vec<NodeId> },
    #[error("source `{source_node}` has an incoming edge from `{from}` in the {config} configuration")]
    SourceHasIncoming {
        config: ConfigKind,
        source_node: NodeId,
        from: NodeId,
    },
    #[error("instance declares {} sources ({}); enable the multi-source reduction", .0.len(), display_list(.0))]
    MultipleSources(Vec<NodeId>),
    #[error("instance must declare exactly one of `source` or `sources`")]
    SourceDeclaration,
    #[error("the source list is empty")]
    NoSources,
    #[error("node `{0}` appears more than once in the update sequence")]
    RepeatedNode(NodeId),
    #[error("malformed instance: {0}")]
    Json(#[from] serde_json::Error),
}

fn display_cycle(nodes: &[NodeId]) -> String {
    let mut s = display_list_sep(nodes, " -> ");
    if let Some(first) = nodes.first() {
        s.push_str(" -> ");
        s.push_str(first.as_str());
    }
    s
}

fn display_list(nodes: &[NodeId]) -> String {
    display_list_sep(nodes, ", ")
}

fn display_list_sep(nodes: &[NodeId], sep: &str) -> String {
    nodes.iter().map(NodeId::as_str).collect::<Vec<_>>().join(sep)
}

/// Index-based view of an edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Link {
    pub from: usize,
    pub to: usize,
    pub label: EdgeLabel,
}

/// A topology together with its initial and final configurations.
///
/// Both canonical configurations are proper: acyclic, and the source has no
/// incoming edge in either. This is checked on construction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NetworkInstance {
    nodes: Vec<NodeId>,
    index: HashMap<NodeId, usize>,
    source: usize,
    links: Vec<Link>,
    out_links: Vec<Vec<usize>>,
    in_links: Vec<Vec<usize>>,
    synthetic: Option<usize>,
}

impl NetworkInstance {
    /// Builds and validates an instance with a single designated source.
    pub fn new(
        nodes: impl IntoIterator<Item = NodeId>,
        source: NodeId,
        edges: impl IntoIterator<Item = Edge>,
    ) -> Result<Self, ModelError> {
        Self::build(nodes.into_iter().collect(), source, edges.into_iter().collect(), false)
    }

    /// Builds an instance with several sources joined under a synthetic
    /// master source. With a single source this is the same as [`new`].
    ///
    /// [`new`]: NetworkInstance::new
    pub fn with_sources(
        nodes: impl IntoIterator<Item = NodeId>,
        sources: &[NodeId],
        edges: impl IntoIterator<Item = Edge>,
    ) -> Result<Self, ModelError> {
        let nodes: Vec<NodeId> = nodes.into_iter().collect();
        let edges: Vec<Edge> = edges.into_iter().collect();
        match sources {
            [] => Err(ModelError::NoSources),
            [single] => Self::build(nodes, single.clone(), edges, false),
            _ => {
                let mut seen = BTreeSet::new();
                for s in sources {
                    if !seen.insert(s) {
                        return Err(ModelError::DuplicateNode(s.clone()));
                    }
                }
                let known: BTreeSet<&NodeId> = nodes.iter().collect();
                for s in sources {
                    if !known.contains(s) {
                        return Err(ModelError::UnknownNode(s.clone()));
                    }
                }
                for e in &edges {
                    if seen.contains(&e.to) {
                        let config = if e.label.in_initial() {
                            ConfigKind::Initial
                        } else {
                            ConfigKind::Final
                        };
                        return Err(ModelError::SourceHasIncoming {
                            config,
                            source_node: e.to.clone(),
                            from: e.from.clone(),
                        });
                    }
                }
                let master = fresh_master_id(&nodes);
                let mut all_nodes = nodes;
                all_nodes.push(master.clone());
                let mut all_edges = edges;
                all_edges.extend(
                    sources
                        .iter()
                        .map(|s| Edge::new(master.clone(), s.clone(), EdgeLabel::Both)),
                );
                Self::build(all_nodes, master, all_edges, true)
            }
        }
    }

    fn build(
        mut nodes: Vec<NodeId>,
        source: NodeId,
        edges: Vec<Edge>,
        source_is_synthetic: bool,
    ) -> Result<Self, ModelError> {
        if nodes.iter().any(|n| n.as_str().is_empty()) {
            return Err(ModelError::EmptyNodeId);
        }
        nodes.sort();
        if let Some(w) = nodes.windows(2).find(|w| w[0] == w[1]) {
            return Err(ModelError::DuplicateNode(w[0].clone()));
        }
        let index: HashMap<NodeId, usize> = nodes.iter().cloned().enumerate().map(|(i, n)| (n, i)).collect();
        let source_ix = *index
            .get(&source)
            .ok_or_else(|| ModelError::UnknownNode(source.clone()))?;

        let mut links = Vec::with_capacity(edges.len());
        for e in &edges {
            let from = *index
                .get(&e.from)
                .ok_or_else(|| ModelError::UnknownNode(e.from.clone()))?;
            let to = *index.get(&e.to).ok_or_else(|| ModelError::UnknownNode(e.to.clone()))?;
            if from == to {
                return Err(ModelError::SelfLoop(e.from.clone()));
            }
            links.push(Link {
                from,
                to,
                label: e.label,
            });
        }
        links.sort_by_key(|l| (l.from, l.to));
        if let Some(w) = links.windows(2).find(|w| (w[0].from, w[0].to) == (w[1].from, w[1].to)) {
            return Err(ModelError::DuplicateEdge {
                from: nodes[w[0].from].clone(),
                to: nodes[w[0].to].clone(),
            });
        }

        let mut out_links = vec![Vec::new(); nodes.len()];
        let mut in_links = vec![Vec::new(); nodes.len()];
        for (i, l) in links.iter().enumerate() {
            out_links[l.from].push(i);
            in_links[l.to].push(i);
        }

        let instance = NetworkInstance {
            nodes,
            index,
            source: source_ix,
            links,
            out_links,
            in_links,
            synthetic: source_is_synthetic.then_some(source_ix),
        };
        instance.check_proper(ConfigKind::Initial)?;
        instance.check_proper(ConfigKind::Final)?;
        Ok(instance)
    }

    fn check_proper(&self, kind: ConfigKind) -> Result<(), ModelError> {
        let config = match kind {
            ConfigKind::Initial => self.initial(),
            ConfigKind::Final => self.final_config(),
        };
        if let Some(&e) = self.in_links[self.source].iter().find(|&&e| config.contains(e)) {
            return Err(ModelError::SourceHasIncoming {
                config: kind,
                source_node: self.nodes[self.source].clone(),
                from: self.nodes[self.links[e].from].clone(),
            });
        }
        if let Some(cycle) = self.find_cycle(&config) {
            return Err(ModelError::Cycle {
                config: kind,
                nodes: cycle.into_iter().map(|u| self.nodes[u].clone()).collect(),
            });
        }
        Ok(())
    }

    /// Some cycle of `config`, as the node sequence around it.
    pub fn find_cycle(&self, config: &Configuration) -> Option<Vec<usize>> {
        const WHITE: u8 = 0;
        const GRAY: u8 = 1;
        const BLACK: u8 = 2;
        let mut color = vec![WHITE; self.nodes.len()];
        let mut stack: Vec<(usize, usize)> = Vec::new();
        for root in 0..self.nodes.len() {
            if color[root] != WHITE {
                continue;
            }
            color[root] = GRAY;
            stack.push((root, 0));
            while let Some(&mut (u, ref mut next)) = stack.last_mut() {
                let outs = &self.out_links[u];
                if *next < outs.len() {
                    let e = outs[*next];
                    *next += 1;
                    if !config.contains(e) {
                        continue;
                    }
                    let v = self.links[e].to;
                    match color[v] {
                        WHITE => {
                            color[v] = GRAY;
                            stack.push((v, 0));
                        }
                        GRAY => {
                            let start = stack.iter().position(|&(w, _)| w == v).unwrap();
                            return Some(stack[start..].iter().map(|&(w, _)| w).collect());
                        }
                        _ => {}
                    }
                } else {
                    color[u] = BLACK;
                    stack.pop();
                }
            }
        }
        None
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn link_count(&self) -> usize {
        self.links.len()
    }

    /// Node ids in index (lexicographic) order.
    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    pub fn node_id(&self, ix: usize) -> &NodeId {
        &self.nodes[ix]
    }

    pub fn node_index(&self, id: &NodeId) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn require_node(&self, id: &NodeId) -> Result<usize, ModelError> {
        self.node_index(id).ok_or_else(|| ModelError::UnknownNode(id.clone()))
    }

    pub fn source(&self) -> usize {
        self.source
    }

    pub fn source_id(&self) -> &NodeId {
        &self.nodes[self.source]
    }

    /// The master source added by the multi-source reduction, if any.
    pub fn synthetic_source(&self) -> Option<usize> {
        self.synthetic
    }

    pub fn is_synthetic(&self, ix: usize) -> bool {
        self.synthetic == Some(ix)
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn link(&self, e: usize) -> Link {
        self.links[e]
    }

    pub fn out_links(&self, u: usize) -> &[usize] {
        &self.out_links[u]
    }

    pub fn in_links(&self, u: usize) -> &[usize] {
        &self.in_links[u]
    }

    /// All edges, ordered by (from, to).
    pub fn edges(&self) -> Vec<Edge> {
        self.links
            .iter()
            .map(|l| Edge {
                from: self.nodes[l.from].clone(),
                to: self.nodes[l.to].clone(),
                label: l.label,
            })
            .collect()
    }

    pub fn edge(&self, e: usize) -> Edge {
        let l = self.links[e];
        Edge {
            from: self.nodes[l.from].clone(),
            to: self.nodes[l.to].clone(),
            label: l.label,
        }
    }

    /// The initial configuration.
    pub fn initial(&self) -> Configuration {
        self.config_where(|l| l.label.in_initial())
    }

    /// The final configuration.
    pub fn final_config(&self) -> Configuration {
        self.config_where(|l| l.label.in_final())
    }

    /// Every edge of the topology.
    pub fn union(&self) -> Configuration {
        self.config_where(|_| true)
    }

    pub fn empty_config(&self) -> Configuration {
        Configuration::empty(self.links.len())
    }

    fn config_where(&self, keep: impl Fn(&Link) -> bool) -> Configuration {
        let mut c = Configuration::empty(self.links.len());
        for (i, l) in self.links.iter().enumerate() {
            if keep(l) {
                c.insert(i);
            }
        }
        c
    }

    /// Whether the node forwards identically in both configurations.
    pub fn is_noop(&self, u: usize) -> bool {
        self.out_links[u]
            .iter()
            .all(|&e| self.links[e].label == EdgeLabel::Both)
    }

    /// Nodes whose outgoing edges differ between the two configurations, in
    /// index order.
    pub fn changed_nodes(&self) -> Vec<usize> {
        (0..self.nodes.len()).filter(|&u| !self.is_noop(u)).collect()
    }

    /// Edges of `config` leaving `u`.
    pub fn out(&self, config: &Configuration, u: &NodeId) -> Result<Vec<Edge>, ModelError> {
        let u = self.require_node(u)?;
        Ok(self.out_links[u]
            .iter()
            .copied()
            .filter(|&e| config.contains(e))
            .map(|e| self.edge(e))
            .collect())
    }

    /// Replaces the initial out-edges of `u` with its final ones.
    pub fn upd1(&self, config: &Configuration, u: &NodeId) -> Result<Configuration, ModelError> {
        let u = self.require_node(u)?;
        let mut next = config.clone();
        self.apply_update(&mut next, u);
        Ok(next)
    }

    /// Applies [`upd1`](Self::upd1) for each node of `sequence`, left to right.
    pub fn upd(&self, config: &Configuration, sequence: &[NodeId]) -> Result<Configuration, ModelError> {
        let mut seen = BTreeSet::new();
        let mut next = config.clone();
        for id in sequence {
            let u = self.require_node(id)?;
            if !seen.insert(u) {
                return Err(ModelError::RepeatedNode(id.clone()));
            }
            self.apply_update(&mut next, u);
        }
        Ok(next)
    }

    /// In-place update of node `u`.
    pub fn apply_update(&self, config: &mut Configuration, u: usize) {
        for &e in &self.out_links[u] {
            if self.links[e].label.in_initial() {
                config.remove(e);
            }
        }
        for &e in &self.out_links[u] {
            if self.links[e].label.in_final() {
                config.insert(e);
            }
        }
    }

    /// The configuration reached from the initial one by updating exactly the
    /// nodes in `updated`.
    pub fn config_after<I: IntoIterator<Item = usize>>(&self, updated: I) -> Configuration {
        let mut c = self.initial();
        for u in updated {
            self.apply_update(&mut c, u);
        }
        c
    }
}

fn fresh_master_id(nodes: &[NodeId]) -> NodeId {
    let taken: BTreeSet<&str> = nodes.iter().map(NodeId::as_str).collect();
    let mut candidate = String::from("H1");
    let mut n = 0usize;
    while taken.contains(candidate.as_str()) {
        n += 1;
        candidate = format!("master{n}");
    }
    NodeId(candidate)
}

/// Joins several sources under a fresh master source.
///
/// Every declared source must be free of incoming edges in both
/// configurations. The master is connected to each source by an edge present
/// in both configurations, so it never needs an update. With a single source
/// the instance is returned with that source designated and no master.
pub fn reduce_multi_source(sources: &[NodeId], instance: &NetworkInstance) -> Result<NetworkInstance, ModelError> {
    let keep: Vec<usize> = (0..instance.node_count())
        .filter(|&u| !instance.is_synthetic(u))
        .collect();
    let nodes = keep.iter().map(|&u| instance.node_id(u).clone());
    let edges = instance
        .links()
        .iter()
        .filter(|l| !instance.is_synthetic(l.from))
        .map(|l| Edge {
            from: instance.node_id(l.from).clone(),
            to: instance.node_id(l.to).clone(),
            label: l.label,
        })
        .collect::<Vec<_>>();
    NetworkInstance::with_sources(nodes, sources, edges)
}

/// A set of topology edges: the forwarding state of the whole network.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Configuration {
    words: Vec<u64>,
    capacity: usize,
}

impl Configuration {
    pub fn empty(capacity: usize) -> Self {
        Configuration {
            words: vec![0; capacity.div_ceil(64)],
            capacity,
        }
    }

    #[inline]
    pub fn contains(&self, e: usize) -> bool {
        e < self.capacity && self.words[e / 64] & (1 << (e % 64)) != 0
    }

    #[inline]
    pub fn insert(&mut self, e: usize) {
        assert!(e < self.capacity, "edge index out of range");
        self.words[e / 64] |= 1 << (e % 64);
    }

    #[inline]
    pub fn remove(&mut self, e: usize) {
        if e < self.capacity {
            self.words[e / 64] &= !(1 << (e % 64));
        }
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Edge indices in increasing order.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.capacity).filter(move |&e| self.contains(e))
    }

    pub fn union_with(&mut self, other: &Configuration) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= *b;
        }
    }

    pub fn is_subset(&self, other: &Configuration) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }
}
