//! Turns a reasoning route into a hard prompt: new special tokens for the
//! chain's entities and relations, a rendered description, and the matching
//! growth of the language-model head.
//!
//!     cargo run -p regrap --example hard_prompt_tokens

use std::error::Error;

use regrap::hard_prompt::{expand_head, render_prompt, tokenize_with_vocab, ReasoningVocab};
use regrap::kg::{Edge, KnowledgeGraph, Node, NodeId};
use regrap::routes::ReasoningRoute;

fn id(s: &str) -> NodeId {
    NodeId::new(s).unwrap()
}

fn described(name: &str, text: &str) -> Node {
    let mut node = Node::concept(id(name));
    node.description = Some(text.into());
    node
}

fn main() -> Result<(), Box<dyn Error>> {
    let mut graph = KnowledgeGraph::new("kessoku_band");
    graph.add_node(described("Ryo", "a bassist at school B"));
    graph.add_node(described("Kita", "a cheerful classmate"));
    graph.add_node(described("Bocchi", "a shy pink-haired guitarist"));
    graph.add_edge(Edge::new(id("Ryo"), "is a senior of", id("Kita")));
    graph.add_edge(Edge::new(id("Kita"), "is potential couple of", id("Bocchi")));

    let route = ReasoningRoute::new(
        vec![id("Ryo"), id("Kita"), id("Bocchi")],
        vec!["is a senior of".into(), "is potential couple of".into()],
    )?;
    let chain = route.to_chain(&graph)?;

    const BASE_VOCAB: usize = 32_000;
    let vocab = ReasoningVocab::new(&chain, BASE_VOCAB)?;
    println!(
        "chain of {} edges adds {} tokens ({} entities + {} relations)",
        chain.len(),
        vocab.new_token_count(),
        vocab.entity_tokens().len(),
        vocab.relation_tokens().len()
    );
    for token in vocab.entity_tokens().iter().chain(vocab.relation_tokens()) {
        println!("  {} -> id {}", token, vocab.id_of(token).unwrap());
    }

    let report = render_prompt(&chain);
    println!("\nrendered prompt:\n{}\n", report.prompt);

    let ids = tokenize_with_vocab(&report.prompt, &vocab);
    let special = ids.iter().filter(|&&t| t >= BASE_VOCAB).count();
    println!("tokenized to {} ids, {} of them special", ids.len(), special);

    let expansion = expand_head(4_096, BASE_VOCAB, &chain)?;
    println!(
        "head grows from {} to {} output columns ({} added), hidden rows fixed at {}",
        expansion.cols_before,
        expansion.cols_after,
        expansion.new_token_ids.len(),
        expansion.rows
    );
    Ok(())
}
