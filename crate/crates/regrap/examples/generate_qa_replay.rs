//! Runs the whole pipeline from recorded fixtures: build, enrich, extract
//! routes, and generate chain-of-thought QA pairs.
//!
//!     cargo run -p regrap --example generate_qa_replay

use std::error::Error;
use std::path::PathBuf;

use regrap::builder::{
    build_relation_graph, enrich_graph, BuildConfig, EntityList, ImageSet, TextualKnowledge,
};
use regrap::llm::{Backend, FixtureStore, LlmClient};
use regrap::qa::{generate_pairs, QaConfig};
use regrap::routes::routes_for_graph;
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
    let graph = enrich_graph(&client, &templates, &relation_graph, &knowledge, &entities, &config)?;
    let routes = routes_for_graph(&graph)?;
    println!("{} routes from the enriched graph", routes.len());

    let qa_config = QaConfig {
        target_count: 2,
        ..QaConfig::default()
    };
    let generated = generate_pairs(&client, &templates, &routes, &knowledge, &qa_config)?;
    println!(
        "{} pairs generated in {} round(s), {} edgeless route(s) skipped\n",
        generated.pairs.len(),
        generated.rounds_run,
        generated.skipped_routes
    );
    for pair in &generated.pairs {
        println!("Q: {}", pair.question);
        println!("A: {}", pair.answer);
        println!("   ({} reasoning steps)\n", pair.step_count);
    }
    Ok(())
}
