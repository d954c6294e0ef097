//! JSON instance format.
//!
//! ```json
//! {
//!   "nodes": ["H1", "A", "H2"],
//!   "source": "H1",
//!   "edges": [
//!     {"from": "H1", "to": "A", "in": "both"},
//!     {"from": "A", "to": "H2", "in": "f"}
//!   ]
//! }
//! ```
//!
//! `"sources": [..]` may replace `"source"`; more than one entry requires the
//! multi-source reduction to be enabled.

use serde::{Deserialize, Serialize};

use super::{Edge, EdgeLabel, ModelError, NetworkInstance, NodeId};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub nodes: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sources: Option<Vec<String>>,
    pub edges: Vec<EdgeEntry>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeEntry {
    pub from: String,
    pub to: String,
    #[serde(rename = "in")]
    pub membership: Membership,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Membership {
    #[serde(rename = "i")]
    Initial,
    #[serde(rename = "f")]
    Final,
    #[serde(rename = "both")]
    Both,
}

impl From<Membership> for EdgeLabel {
    fn from(m: Membership) -> Self {
        match m {
            Membership::Initial => EdgeLabel::InitialOnly,
            Membership::Final => EdgeLabel::FinalOnly,
            Membership::Both => EdgeLabel::Both,
        }
    }
}

impl From<EdgeLabel> for Membership {
    fn from(l: EdgeLabel) -> Self {
        match l {
            EdgeLabel::InitialOnly => Membership::Initial,
            EdgeLabel::FinalOnly => Membership::Final,
            EdgeLabel::Both => Membership::Both,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ParseOptions {
    /// Accept several sources by joining them under a synthetic master.
    pub reduce_multi_source: bool,
}

/// Parses an instance, rejecting multi-source files.
pub fn parse_instance(text: &str) -> Result<NetworkInstance, ModelError> {
    parse_instance_with(text, ParseOptions::default())
}

pub fn parse_instance_with(text: &str, opts: ParseOptions) -> Result<NetworkInstance, ModelError> {
    let file: InstanceFile = serde_json::from_str(text)?;
    file.into_instance(opts)
}

impl InstanceFile {
    pub fn into_instance(self, opts: ParseOptions) -> Result<NetworkInstance, ModelError> {
        let sources: Vec<NodeId> = match (self.source, self.sources) {
            (Some(s), None) => vec![NodeId::new(s)],
            (None, Some(list)) => list.into_iter().map(NodeId::new).collect(),
            _ => return Err(ModelError::SourceDeclaration),
        };
        if sources.len() > 1 && !opts.reduce_multi_source {
            return Err(ModelError::MultipleSources(sources));
        }
        let nodes = self.nodes.into_iter().map(NodeId::new);
        let edges = self.edges.into_iter().map(|e| Edge {
            from: NodeId::new(e.from),
            to: NodeId::new(e.to),
            label: e.membership.into(),
        });
        NetworkInstance::with_sources(nodes, &sources, edges)
    }

    /// File form of an instance. A synthetic master is written back as the
    /// list of sources it joins.
    pub fn from_instance(net: &NetworkInstance) -> Self {
        let real = |u: usize| !net.is_synthetic(u);
        let nodes = (0..net.node_count())
            .filter(|&u| real(u))
            .map(|u| net.node_id(u).to_string())
            .collect();
        let (source, sources) = match net.synthetic_source() {
            Some(m) => (
                None,
                Some(
                    net.out_links(m)
                        .iter()
                        .map(|&e| net.node_id(net.link(e).to).to_string())
                        .collect(),
                ),
            ),
            None => (Some(net.source_id().to_string()), None),
        };
        let edges = net
            .links()
            .iter()
            .filter(|l| real(l.from))
            .map(|l| EdgeEntry {
                from: net.node_id(l.from).to_string(),
                to: net.node_id(l.to).to_string(),
                membership: l.label.into(),
            })
            .collect();
        InstanceFile {
            nodes,
            source,
            sources,
            edges,
        }
    }
}

impl NetworkInstance {
    /// Pretty-printed JSON with nodes and edges in index order.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&InstanceFile::from_instance(self)).expect("instance serialization cannot fail")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = r#"{
        "nodes": ["H1", "A", "H2"],
        "source": "H1",
        "edges": [
            {"from": "H1", "to": "A", "in": "both"},
            {"from": "A", "to": "H2", "in": "f"},
            {"from": "H1", "to": "H2", "in": "i"}
        ]
    }"#;

    #[test]
    fn parses_and_round_trips() {
        let net = parse_instance(SMALL).unwrap();
        assert_eq!(net.node_count(), 3);
        assert_eq!(net.source_id().as_str(), "H1");
        let again = parse_instance(&net.to_json()).unwrap();
        assert_eq!(again, net);
    }

    #[test]
    fn rejects_bad_files() {
        let unknown_field = SMALL.replace("\"source\"", "\"origin\"");
        assert!(matches!(parse_instance(&unknown_field), Err(ModelError::Json(_))));

        let bad_label = SMALL.replace("\"f\"", "\"x\"");
        assert!(matches!(parse_instance(&bad_label), Err(ModelError::Json(_))));

        let both = SMALL.replace("\"source\": \"H1\",", "\"source\": \"H1\", \"sources\": [\"H1\"],");
        assert!(matches!(parse_instance(&both), Err(ModelError::SourceDeclaration)));

        let neither = SMALL.replace("\"source\": \"H1\",", "");
        assert!(matches!(parse_instance(&neither), Err(ModelError::SourceDeclaration)));

        assert!(matches!(parse_instance("{"), Err(ModelError::Json(_))));
    }

    #[test]
    fn multi_source_needs_opt_in() {
        let text = r#"{
            "nodes": ["HA", "HB", "X"],
            "sources": ["HA", "HB"],
            "edges": [
                {"from": "HA", "to": "X", "in": "i"},
                {"from": "HB", "to": "X", "in": "both"}
            ]
        }"#;
        assert!(matches!(parse_instance(text), Err(ModelError::MultipleSources(_))));
        let opts = ParseOptions {
            reduce_multi_source: true,
        };
        let net = parse_instance_with(text, opts).unwrap();
        assert!(net.synthetic_source().is_some());
        let again = parse_instance_with(&net.to_json(), opts).unwrap();
        assert_eq!(again, net);

        let single = text.replace("[\"HA\", \"HB\"]", "[\"HA\"]");
        let net = parse_instance(&single).unwrap();
        assert!(net.synthetic_source().is_none());
    }
}
