//! Reasoning trees and routes.
//!
//! Trees are rooted at every in-degree-zero node (or at every node when the
//! graph has none, the cyclic fallback) and expand along outgoing edges
//! without revisiting a node already on the current path. Children are
//! visited in lexicographic (relation label, child id) order, so the whole
//! pipeline is deterministic. Routes are the root-to-leaf paths in DFS
//! order; pruning drops any route whose alternating node/relation sequence
//! appears contiguously inside another route.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::kg::{ChainSubgraph, Edge, KgError, KnowledgeGraph, NodeId};

#[derive(Debug, Clone, Copy)]
pub struct RouteConfig {
    /// Maximum number of edges per route; bounds pathological graphs.
    pub max_depth: usize,
}

impl Default for RouteConfig {
    fn default() -> Self {
        RouteConfig { max_depth: 12 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TreeNode {
    pub id: NodeId,
    /// Child subtrees with the relation label that leads to them, in
    /// (relation, child id) order.
    pub children: Vec<(String, TreeNode)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReasoningTree {
    pub root: TreeNode,
}

impl ReasoningTree {
    pub fn node_count(&self) -> usize {
        fn count(node: &TreeNode) -> usize {
            1 + node.children.iter().map(|(_, c)| count(c)).sum::<usize>()
        }
        count(&self.root)
    }
}

/// An alternating walk E_1 -r_1-> E_2 ... -r_k-> E_{k+1}. A single isolated
/// node is a legal route with no relations.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ReasoningRoute {
    nodes: Vec<NodeId>,
    relations: Vec<String>,
}

impl ReasoningRoute {
    pub fn new(nodes: Vec<NodeId>, relations: Vec<String>) -> Result<Self, KgError> {
        if nodes.is_empty() {
            return Err(KgError::MalformedRoute("no nodes".into()));
        }
        if relations.len() + 1 != nodes.len() {
            return Err(KgError::MalformedRoute(format!(
                "{} relations for {} nodes",
                relations.len(),
                nodes.len()
            )));
        }
        Ok(ReasoningRoute { nodes, relations })
    }

    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    pub fn relations(&self) -> &[String] {
        &self.relations
    }

    /// Number of edges.
    pub fn len(&self) -> usize {
        self.relations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.relations.is_empty()
    }

    /// The alternating node/relation sequence used for nesting checks and
    /// serialization.
    pub fn alternating(&self) -> Vec<RouteItem<'_>> {
        let mut out = Vec::with_capacity(self.nodes.len() + self.relations.len());
        for (i, node) in self.nodes.iter().enumerate() {
            if i > 0 {
                out.push(RouteItem::Relation(&self.relations[i - 1]));
            }
            out.push(RouteItem::Node(node.as_str()));
        }
        out
    }

    pub fn to_chain(&self, graph: &KnowledgeGraph) -> Result<ChainSubgraph, KgError> {
        crate::kg::to_chain(graph, &self.nodes, &self.relations)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RouteItem<'a> {
    Node(&'a str),
    Relation(&'a str),
}

impl Serialize for ReasoningRoute {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let flat: Vec<&str> = self
            .alternating()
            .into_iter()
            .map(|item| match item {
                RouteItem::Node(s) | RouteItem::Relation(s) => s,
            })
            .collect();
        flat.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ReasoningRoute {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let flat = Vec::<String>::deserialize(deserializer)?;
        if flat.is_empty() || flat.len() % 2 == 0 {
            return Err(D::Error::custom(format!(
                "a route alternates nodes and relations and has odd length, got {}",
                flat.len()
            )));
        }
        let mut nodes = Vec::with_capacity(flat.len() / 2 + 1);
        let mut relations = Vec::with_capacity(flat.len() / 2);
        for (i, item) in flat.into_iter().enumerate() {
            if i % 2 == 0 {
                nodes.push(NodeId::new(item).map_err(D::Error::custom)?);
            } else {
                relations.push(item);
            }
        }
        ReasoningRoute::new(nodes, relations).map_err(D::Error::custom)
    }
}

/// Roots are the in-degree-zero nodes in insertion order; when a cyclic graph
/// has none, every node becomes a root.
pub fn tree_roots(graph: &KnowledgeGraph) -> Vec<NodeId> {
    let zero_in: Vec<NodeId> = graph
        .nodes()
        .iter()
        .filter(|n| graph.in_degree(n.id.as_str()) == 0)
        .map(|n| n.id.clone())
        .collect();
    if zero_in.is_empty() {
        graph.nodes().iter().map(|n| n.id.clone()).collect()
    } else {
        zero_in
    }
}

pub fn build_reasoning_trees(graph: &KnowledgeGraph) -> Result<Vec<ReasoningTree>, KgError> {
    build_reasoning_trees_with(graph, RouteConfig::default())
}

pub fn build_reasoning_trees_with(
    graph: &KnowledgeGraph,
    config: RouteConfig,
) -> Result<Vec<ReasoningTree>, KgError> {
    let report = graph.validate();
    if !report.ok() {
        return Err(KgError::InvalidGraph { report });
    }
    let roots = tree_roots(graph);
    let mut trees = Vec::with_capacity(roots.len());
    for root in roots {
        let mut on_path = vec![root.clone()];
        let node = expand(graph, &root, &mut on_path, 0, config.max_depth);
        trees.push(ReasoningTree { root: node });
    }
    Ok(trees)
}

fn expand(
    graph: &KnowledgeGraph,
    id: &NodeId,
    on_path: &mut Vec<NodeId>,
    depth: usize,
    max_depth: usize,
) -> TreeNode {
    let mut children = Vec::new();
    if depth < max_depth {
        let mut out: Vec<&Edge> = graph
            .out_edges(id.as_str())
            .filter(|e| !on_path.contains(&e.to))
            .collect();
        out.sort_by(|a, b| {
            (a.relation.as_str(), a.to.as_str()).cmp(&(b.relation.as_str(), b.to.as_str()))
        });
        for edge in out {
            on_path.push(edge.to.clone());
            let child = expand(graph, &edge.to, on_path, depth + 1, max_depth);
            on_path.pop();
            children.push((edge.relation.clone(), child));
        }
    }
    TreeNode {
        id: id.clone(),
        children,
    }
}

/// Root-to-leaf paths of each tree, in DFS order.
pub fn extract_routes(trees: &[ReasoningTree]) -> Vec<ReasoningRoute> {
    let mut routes = Vec::new();
    for tree in trees {
        let mut nodes = vec![tree.root.id.clone()];
        let mut relations = Vec::new();
        walk(&tree.root, &mut nodes, &mut relations, &mut routes);
    }
    routes
}

fn walk(
    node: &TreeNode,
    nodes: &mut Vec<NodeId>,
    relations: &mut Vec<String>,
    routes: &mut Vec<ReasoningRoute>,
) {
    if node.children.is_empty() {
        routes.push(ReasoningRoute {
            nodes: nodes.clone(),
            relations: relations.clone(),
        });
        return;
    }
    for (relation, child) in &node.children {
        nodes.push(child.id.clone());
        relations.push(relation.clone());
        walk(child, nodes, relations, routes);
        relations.pop();
        nodes.pop();
    }
}

/// Drops every route whose alternating sequence occurs contiguously inside
/// another route, and keeps only the first of exact duplicates. Order is
/// preserved.
pub fn prune_nested(routes: &[ReasoningRoute]) -> Vec<ReasoningRoute> {
    let sequences: Vec<Vec<RouteItem<'_>>> = routes.iter().map(|r| r.alternating()).collect();
    let mut kept = Vec::new();
    'outer: for (i, route) in routes.iter().enumerate() {
        for (j, other) in sequences.iter().enumerate() {
            if j < i && sequences[j] == sequences[i] {
                continue 'outer;
            }
            if j != i && sequences[i].len() < other.len() && contains_window(other, &sequences[i]) {
                continue 'outer;
            }
        }
        kept.push(route.clone());
    }
    kept
}

fn contains_window(haystack: &[RouteItem<'_>], needle: &[RouteItem<'_>]) -> bool {
    haystack.windows(needle.len()).any(|w| w == needle)
}

/// Trees, routes, and pruning in one step.
pub fn routes_for_graph(graph: &KnowledgeGraph) -> Result<Vec<ReasoningRoute>, KgError> {
    routes_for_graph_with(graph, RouteConfig::default())
}

pub fn routes_for_graph_with(
    graph: &KnowledgeGraph,
    config: RouteConfig,
) -> Result<Vec<ReasoningRoute>, KgError> {
    let trees = build_reasoning_trees_with(graph, config)?;
    Ok(prune_nested(&extract_routes(&trees)))
}

/// The traversed path as a graph: route nodes in route order with cloned
/// metadata, and exactly the traversed edges.
pub fn route_to_subgraph(
    route: &ReasoningRoute,
    graph: &KnowledgeGraph,
) -> Result<KnowledgeGraph, KgError> {
    let mut sub = KnowledgeGraph::new(graph.set_name().to_string());
    for id in &route.nodes {
        let node = graph
            .node(id.as_str())
            .ok_or_else(|| KgError::UnknownNode(id.as_str().to_string()))?;
        sub.add_node(node.clone());
    }
    for (i, relation) in route.relations.iter().enumerate() {
        let (from, to) = (&route.nodes[i], &route.nodes[i + 1]);
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
        sub.add_edge(Edge::new(from.clone(), relation.clone(), to.clone()));
    }
    Ok(sub)
}
