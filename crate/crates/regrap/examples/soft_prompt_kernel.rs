//! Encodes a graph as one-hot features, runs the graph network and the
//! projection head, verifies the analytic gradients against finite
//! differences, and prepends the result to a token embedding block.
//!
//!     cargo run -p regrap --example soft_prompt_kernel

use std::error::Error;

use regrap::kg::{Edge, KnowledgeGraph, Node, NodeId};
use regrap::soft_prompt::{
    assemble, grad_check, soft_prompt_for_graph, EmbeddingTable, SoftPromptConfig,
};

fn id(s: &str) -> NodeId {
    NodeId::new(s).unwrap()
}

fn main() -> Result<(), Box<dyn Error>> {
    let mut graph = KnowledgeGraph::new("kessoku_band");
    for name in ["Ryo", "Kita", "Bocchi", "Kessoku Band"] {
        graph.add_node(Node::concept(id(name)));
    }
    graph.add_edge(Edge::new(id("Ryo"), "is a senior of", id("Kita")));
    graph.add_edge(Edge::new(id("Kita"), "is potential couple of", id("Bocchi")));
    graph.add_edge(Edge::new(id("Bocchi"), "is guitarist of", id("Kessoku Band")));

    // Small dimensions keep the finite-difference sweep instant.
    let config = SoftPromptConfig {
        hidden: 8,
        mid: 16,
        dim: 32,
        layers: 2,
    };
    let (soft, encoded, gnn, proj) = soft_prompt_for_graph(&graph, &config, 42)?;
    println!(
        "encoded {} nodes and {} relation kinds; soft prompt has {} values",
        encoded.node_count(),
        encoded.relation_count(),
        soft.len()
    );

    let report = grad_check(&gnn, &proj, &encoded, 1e-5)?;
    println!(
        "gradient check over {} parameters: max relative error {:.3e} (worst: {})",
        report.params_checked, report.max_rel_error, report.worst_param
    );

    let table = EmbeddingTable::seeded(1_000, config.dim, 7);
    let tokens = table.embed_tokens(&[5, 17, 255, 900])?;
    let block = assemble(&soft, &tokens)?;
    println!(
        "assembled block: {} rows x {} cols (soft prompt + {} tokens)",
        block.rows(),
        block.cols(),
        tokens.rows()
    );
    Ok(())
}
