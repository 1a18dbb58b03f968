//! Builds a small graph in code and lists its reasoning routes: the maximal
//! simple paths from every root, with nested routes pruned.
//!
//!     cargo run -p regrap --example extract_routes

use std::error::Error;

use regrap::kg::{Edge, KnowledgeGraph, Node, NodeId};
use regrap::routes::{routes_for_graph, RouteItem};

fn id(s: &str) -> NodeId {
    NodeId::new(s).unwrap()
}

fn main() -> Result<(), Box<dyn Error>> {
    let mut graph = KnowledgeGraph::new("kessoku_band");
    for name in ["Ryo", "Nijika", "Kita", "Bocchi", "Kessoku Band", "pink hair"] {
        graph.add_node(Node::concept(id(name)));
    }
    graph.add_edge(Edge::new(id("Ryo"), "is a senior of", id("Kita")));
    graph.add_edge(Edge::new(id("Kita"), "is potential couple of", id("Bocchi")));
    graph.add_edge(Edge::new(id("Bocchi"), "is guitarist of", id("Kessoku Band")));
    graph.add_edge(Edge::new(id("Bocchi"), "has hair color", id("pink hair")));

    let routes = routes_for_graph(&graph)?;
    println!("{} routes:", routes.len());
    for route in &routes {
        let line: Vec<String> = route
            .alternating()
            .into_iter()
            .map(|item| match item {
                RouteItem::Node(n) => format!("<{n}>"),
                RouteItem::Relation(r) => format!("-[{r}]->"),
            })
            .collect();
        println!("  {} ({} steps)", line.join(" "), route.len());
    }
    Ok(())
}
