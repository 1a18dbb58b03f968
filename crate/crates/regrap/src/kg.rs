//! Knowledge graph data model.
//!
//! A graph is a set of named nodes (main concepts plus enrichment attributes)
//! and a directed multigraph of labeled edges. The JSON form mirrors the
//! builder prompt's example output: a top-level object with `nodes` and
//! `edges`, where nodes carry `id` plus arbitrary string fields. Rendering is
//! byte-stable: field order is fixed and extra node fields are sorted.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum KgError {
    #[error("invalid node id {given:?}: {reason}")]
    InvalidNodeId { given: String, reason: String },
    #[error("graph JSON is malformed: {0}")]
    Parse(String),
    #[error("graph failed validation: {report}")]
    InvalidGraph { report: ValidationReport },
    #[error("unknown node {0:?}")]
    UnknownNode(String),
    #[error("a chain needs at least one edge")]
    EmptyChain,
    #[error("route is not a path in the graph: no edge {from:?} -[{relation}]-> {to:?}")]
    MissingEdge {
        from: String,
        relation: String,
        to: String,
    },
    #[error("chain repeats entity {0:?}; chain entities must be distinct")]
    RepeatedEntity(String),
    #[error("malformed route: {0}")]
    MalformedRoute(String),
}

/// Non-empty, control-character-free node name. Surrounding whitespace is
/// trimmed on construction.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct NodeId(String);

impl NodeId {
    pub fn new(raw: impl Into<String>) -> Result<Self, KgError> {
        let raw = raw.into();
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            return Err(KgError::InvalidNodeId {
                given: raw.clone(),
                reason: "empty after trimming".into(),
            });
        }
        if trimmed.chars().any(char::is_control) {
            return Err(KgError::InvalidNodeId {
                given: raw.clone(),
                reason: "contains control characters".into(),
            });
        }
        Ok(NodeId(trimmed.to_string()))
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

impl<'de> Deserialize<'de> for NodeId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(deserializer)?;
        NodeId::new(raw).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    /// An entry of the main entity list.
    Concept,
    /// A node added by enrichment (attributes, new concepts).
    Attribute,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub id: NodeId,
    pub kind: NodeKind,
    pub description: Option<String>,
    /// Extra string fields carried through from the model's JSON, sorted by
    /// key on render.
    pub attributes: BTreeMap<String, String>,
}

impl Node {
    pub fn concept(id: NodeId) -> Self {
        Node {
            id,
            kind: NodeKind::Concept,
            description: None,
            attributes: BTreeMap::new(),
        }
    }

    pub fn attribute(id: NodeId) -> Self {
        Node {
            kind: NodeKind::Attribute,
            ..Node::concept(id)
        }
    }

    pub fn with_description(mut self, text: impl Into<String>) -> Self {
        self.description = Some(text.into());
        self
    }

    pub fn with_attr(mut self, key: impl Into<String>, value: impl Into<String>) -> Self {
        self.attributes.insert(key.into(), value.into());
        self
    }
}

#[derive(Serialize, Deserialize)]
struct NodeRepr {
    id: NodeId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    kind: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    description: Option<String>,
    #[serde(flatten)]
    rest: BTreeMap<String, serde_json::Value>,
}

fn scalar_to_string(value: &serde_json::Value) -> String {
    match value {
        serde_json::Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

impl Serialize for Node {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let repr = NodeRepr {
            id: self.id.clone(),
            kind: match self.kind {
                NodeKind::Concept => None,
                NodeKind::Attribute => Some("attribute".into()),
            },
            description: self.description.clone(),
            rest: self
                .attributes
                .iter()
                .map(|(k, v)| (k.clone(), serde_json::Value::String(v.clone())))
                .collect(),
        };
        repr.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Node {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = NodeRepr::deserialize(deserializer)?;
        let kind = match repr.kind.as_deref() {
            None | Some("concept") => NodeKind::Concept,
            Some("attribute") => NodeKind::Attribute,
            Some(other) => {
                return Err(serde::de::Error::custom(format!(
                    "unknown node kind {other:?} on node {:?}",
                    repr.id.as_str()
                )))
            }
        };
        Ok(Node {
            id: repr.id,
            kind,
            description: repr.description,
            attributes: repr
                .rest
                .iter()
                .map(|(k, v)| (k.clone(), scalar_to_string(v)))
                .collect(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub from: NodeId,
    pub to: NodeId,
    pub relation: String,
}

impl Edge {
    pub fn new(from: NodeId, relation: impl Into<String>, to: NodeId) -> Self {
        Edge {
            from,
            to,
            relation: relation.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    DuplicateNodeId { id: String },
    UnknownEndpoint { edge: usize, endpoint: String },
    EmptyRelation { edge: usize },
    DuplicateEdge { edge: usize, first_seen: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DuplicateNodeId { id } => write!(f, "duplicate node id {id:?}"),
            Violation::UnknownEndpoint { edge, endpoint } => {
                write!(f, "edge {edge} references unknown endpoint {endpoint:?}")
            }
            Violation::EmptyRelation { edge } => {
                write!(f, "edge {edge} has an empty relation label")
            }
            Violation::DuplicateEdge { edge, first_seen } => {
                write!(f, "edge {edge} duplicates edge {first_seen}")
            }
        }
    }
}

/// Violations are data: callers decide whether to fail. Duplicate edges are
/// legal in the multigraph and surface as warnings only.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    pub warnings: Vec<Violation>,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.ok() && self.warnings.is_empty() {
            return f.write_str("ok");
        }
        let lines: Vec<String> = self
            .violations
            .iter()
            .map(|v| v.to_string())
            .chain(self.warnings.iter().map(|w| format!("warning: {w}")))
            .collect();
        f.write_str(&lines.join("; "))
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct KnowledgeGraph {
    set_name: String,
    nodes: Vec<Node>,
    edges: Vec<Edge>,
}

#[derive(Serialize, Deserialize)]
struct GraphRepr {
    #[serde(default, skip_serializing_if = "String::is_empty")]
    set_name: String,
    nodes: Vec<Node>,
    edges: Vec<Edge>,
}

impl KnowledgeGraph {
    pub fn new(set_name: impl Into<String>) -> Self {
        KnowledgeGraph {
            set_name: set_name.into(),
            nodes: Vec::new(),
            edges: Vec::new(),
        }
    }

    pub fn set_name(&self) -> &str {
        &self.set_name
    }

    pub fn rename_set(&mut self, name: impl Into<String>) {
        self.set_name = name.into();
    }

    pub fn add_node(&mut self, node: Node) -> &mut Self {
        self.nodes.push(node);
        self
    }

    pub fn add_edge(&mut self, edge: Edge) -> &mut Self {
        self.edges.push(edge);
        self
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn node(&self, id: &str) -> Option<&Node> {
        self.nodes.iter().find(|n| n.id.as_str() == id)
    }

    pub fn node_mut(&mut self, id: &str) -> Option<&mut Node> {
        self.nodes.iter_mut().find(|n| n.id.as_str() == id)
    }

    pub fn contains_node(&self, id: &str) -> bool {
        self.node(id).is_some()
    }

    pub fn out_edges<'a>(&'a self, id: &'a str) -> impl Iterator<Item = &'a Edge> + 'a {
        self.edges.iter().filter(move |e| e.from.as_str() == id)
    }

    pub fn in_degree(&self, id: &str) -> usize {
        self.edges.iter().filter(|e| e.to.as_str() == id).count()
    }

    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        let mut seen: BTreeSet<&str> = BTreeSet::new();
        for node in &self.nodes {
            if !seen.insert(node.id.as_str()) {
                report.violations.push(Violation::DuplicateNodeId {
                    id: node.id.as_str().to_string(),
                });
            }
        }
        let mut first_seen: HashMap<(&str, &str, &str), usize> = HashMap::new();
        for (i, edge) in self.edges.iter().enumerate() {
            for endpoint in [&edge.from, &edge.to] {
                if !seen.contains(endpoint.as_str()) {
                    report.violations.push(Violation::UnknownEndpoint {
                        edge: i,
                        endpoint: endpoint.as_str().to_string(),
                    });
                }
            }
            if edge.relation.trim().is_empty() {
                report.violations.push(Violation::EmptyRelation { edge: i });
            }
            let key = (edge.from.as_str(), edge.relation.as_str(), edge.to.as_str());
            match first_seen.get(&key) {
                Some(&first) => report.warnings.push(Violation::DuplicateEdge {
                    edge: i,
                    first_seen: first,
                }),
                None => {
                    first_seen.insert(key, i);
                }
            }
        }
        report
    }

    /// Edge list as (head, relation, tail) triplets, in edge order.
    pub fn triplets(&self) -> Result<Vec<(NodeId, String, NodeId)>, KgError> {
        let report = self.validate();
        if !report.ok() {
            return Err(KgError::InvalidGraph { report });
        }
        Ok(self
            .edges
            .iter()
            .map(|e| (e.from.clone(), e.relation.clone(), e.to.clone()))
            .collect())
    }

    /// Subgraph on the named nodes plus every edge whose endpoints are both
    /// named. Node order follows the graph, not the argument.
    pub fn induced_subgraph(&self, ids: &[NodeId]) -> Result<KnowledgeGraph, KgError> {
        for id in ids {
            if !self.contains_node(id.as_str()) {
                return Err(KgError::UnknownNode(id.as_str().to_string()));
            }
        }
        let wanted: BTreeSet<&str> = ids.iter().map(NodeId::as_str).collect();
        let mut sub = KnowledgeGraph::new(self.set_name.clone());
        for node in &self.nodes {
            if wanted.contains(node.id.as_str()) {
                sub.add_node(node.clone());
            }
        }
        for edge in &self.edges {
            if wanted.contains(edge.from.as_str()) && wanted.contains(edge.to.as_str()) {
                sub.add_edge(edge.clone());
            }
        }
        Ok(sub)
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(GraphRepr {
            set_name: self.set_name.clone(),
            nodes: self.nodes.clone(),
            edges: self.edges.clone(),
        })
        .expect("graph serialization cannot fail")
    }

    /// Byte-stable pretty render with four-space indentation.
    pub fn to_json(&self) -> String {
        pretty_json(&self.to_json_value())
    }

    pub fn from_json(text: &str) -> Result<Self, KgError> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| KgError::Parse(e.to_string()))?;
        Self::from_json_value(value)
    }

    pub fn from_json_value(value: serde_json::Value) -> Result<Self, KgError> {
        let repr: GraphRepr =
            serde_json::from_value(value).map_err(|e| KgError::Parse(e.to_string()))?;
        Ok(KnowledgeGraph {
            set_name: repr.set_name,
            nodes: repr.nodes,
            edges: repr.edges,
        })
    }
}

impl Serialize for KnowledgeGraph {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.to_json_value().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for KnowledgeGraph {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let value = serde_json::Value::deserialize(deserializer)?;
        KnowledgeGraph::from_json_value(value).map_err(serde::de::Error::custom)
    }
}

/// Renders a JSON value with four-space indentation, matching the format the
/// builder prompt shows to the model.
pub fn pretty_json(value: &serde_json::Value) -> String {
    let mut out = Vec::new();
    let formatter = serde_json::ser::PrettyFormatter::with_indent(b"    ");
    let mut serializer = serde_json::Serializer::with_formatter(&mut out, formatter);
    value
        .serialize(&mut serializer)
        .expect("JSON rendering cannot fail");
    String::from_utf8(out).expect("serde_json emits UTF-8")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainTriple {
    pub head: NodeId,
    pub relation: String,
    pub tail: NodeId,
}

/// A linear chain (E_1, r_1, E_2), ..., (E_N, r_N, E_{N+1}) with description
/// text for each of the N+1 entities and N relations.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainSubgraph {
    triples: Vec<ChainTriple>,
    entity_descriptions: Vec<String>,
    relation_descriptions: Vec<String>,
}

impl ChainSubgraph {
    pub fn new(
        triples: Vec<ChainTriple>,
        entity_descriptions: Vec<String>,
        relation_descriptions: Vec<String>,
    ) -> Result<Self, KgError> {
        if triples.is_empty() {
            return Err(KgError::EmptyChain);
        }
        for pair in triples.windows(2) {
            if pair[0].tail != pair[1].head {
                return Err(KgError::MalformedRoute(format!(
                    "triple tail {:?} does not meet next head {:?}",
                    pair[0].tail.as_str(),
                    pair[1].head.as_str()
                )));
            }
        }
        let mut seen = BTreeSet::new();
        let mut entities = vec![triples[0].head.clone()];
        entities.extend(triples.iter().map(|t| t.tail.clone()));
        for entity in &entities {
            if !seen.insert(entity.as_str().to_string()) {
                return Err(KgError::RepeatedEntity(entity.as_str().to_string()));
            }
        }
        if entity_descriptions.len() != triples.len() + 1 {
            return Err(KgError::MalformedRoute(format!(
                "{} entity descriptions for {} entities",
                entity_descriptions.len(),
                triples.len() + 1
            )));
        }
        if relation_descriptions.len() != triples.len() {
            return Err(KgError::MalformedRoute(format!(
                "{} relation descriptions for {} relations",
                relation_descriptions.len(),
                triples.len()
            )));
        }
        Ok(ChainSubgraph {
            triples,
            entity_descriptions,
            relation_descriptions,
        })
    }

    /// Number of edges N.
    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn triples(&self) -> &[ChainTriple] {
        &self.triples
    }

    /// The N+1 chain entities in order.
    pub fn entities(&self) -> Vec<&NodeId> {
        let mut out = vec![&self.triples[0].head];
        out.extend(self.triples.iter().map(|t| &t.tail));
        out
    }

    pub fn entity_descriptions(&self) -> &[String] {
        &self.entity_descriptions
    }

    pub fn relation_descriptions(&self) -> &[String] {
        &self.relation_descriptions
    }
}

impl<'de> Deserialize<'de> for ChainSubgraph {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            triples: Vec<ChainTriple>,
            entity_descriptions: Vec<String>,
            relation_descriptions: Vec<String>,
        }
        let repr = Repr::deserialize(deserializer)?;
        ChainSubgraph::new(
            repr.triples,
            repr.entity_descriptions,
            repr.relation_descriptions,
        )
        .map_err(serde::de::Error::custom)
    }
}

/// Builds a chain from an alternating node/relation walk through the graph.
/// Entity descriptions come from the nodes' `description` fields (empty when
/// absent); relation descriptions are the relation labels themselves.
pub fn to_chain(
    graph: &KnowledgeGraph,
    nodes: &[NodeId],
    relations: &[String],
) -> Result<ChainSubgraph, KgError> {
    if nodes.len() < 2 {
        return Err(KgError::EmptyChain);
    }
    if relations.len() + 1 != nodes.len() {
        return Err(KgError::MalformedRoute(format!(
            "{} relations for {} nodes",
            relations.len(),
            nodes.len()
        )));
    }
    for id in nodes {
        if !graph.contains_node(id.as_str()) {
            return Err(KgError::UnknownNode(id.as_str().to_string()));
        }
    }
    let mut triples = Vec::with_capacity(relations.len());
    for (i, relation) in relations.iter().enumerate() {
        let (from, to) = (&nodes[i], &nodes[i + 1]);
        let exists = graph
            .edges()
            .iter()
            .any(|e| &e.from == from && &e.to == to && &e.relation == relation);
        if !exists {
            return Err(KgError::MissingEdge {
                from: from.as_str().to_string(),
                relation: relation.clone(),
                to: to.as_str().to_string(),
            });
        }
        triples.push(ChainTriple {
            head: from.clone(),
            relation: relation.clone(),
            tail: to.clone(),
        });
    }
    let entity_descriptions = nodes
        .iter()
        .map(|id| {
            graph
                .node(id.as_str())
                .and_then(|n| n.description.clone())
                .unwrap_or_default()
        })
        .collect();
    ChainSubgraph::new(triples, entity_descriptions, relations.to_vec())
}
