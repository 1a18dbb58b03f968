//! Builds and enriches a knowledge graph from the recorded fixtures, with no
//! network access.
//!
//!     cargo run -p regrap --example build_graph_replay

use std::error::Error;
use std::path::PathBuf;

use regrap::builder::{
    build_relation_graph, enrich_graph, BuildConfig, EntityList, ImageSet, TextualKnowledge,
};
use regrap::llm::{Backend, FixtureStore, LlmClient};
use regrap::templates::TemplateSet;

fn main() -> Result<(), Box<dyn Error>> {
    let crate_dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let set_dir = crate_dir.join("fixtures/sets/bocchi_the_rock");
    let spec: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(set_dir.join("input.json"))?)?;

    let entities = EntityList::new(
        spec["entities"]
            .as_array()
            .unwrap()
            .iter()
            .map(|e| e.as_str().unwrap().to_string()),
    )?;
    let knowledge = TextualKnowledge::new(
        spec["relational"].as_str().unwrap(),
        spec["attribute"].as_str().unwrap(),
    );
    let image_paths = |key: &str| {
        spec[key]
            .as_array()
            .unwrap()
            .iter()
            .map(|p| set_dir.join(p.as_str().unwrap()))
            .collect()
    };
    let images = ImageSet {
        train: image_paths("train_images"),
        test: image_paths("test_images"),
    };

    // Replay answers every request from fixtures/llm, keyed by request digest.
    let client = LlmClient::new(Backend::Replay(FixtureStore::new(crate_dir.join("fixtures/llm"))));
    let templates = TemplateSet::builtin();
    let config = BuildConfig::default();

    let relation_graph = build_relation_graph(
        &client,
        &templates,
        "bocchi_the_rock",
        &knowledge,
        &entities,
        &images,
        &config,
    )?;
    println!(
        "relation graph: {} nodes, {} edges",
        relation_graph.nodes().len(),
        relation_graph.edges().len()
    );

    let enriched = enrich_graph(&client, &templates, &relation_graph, &knowledge, &entities, &config)?;
    println!(
        "enriched graph: {} nodes, {} edges",
        enriched.nodes().len(),
        enriched.edges().len()
    );
    let report = enriched.validate();
    println!("validation: {}", if report.ok() { "clean" } else { "violations" });
    println!("{}", enriched.to_json());
    Ok(())
}
