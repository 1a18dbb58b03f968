//! Summarizes a dataset manifest with exact rational averages.
//!
//!     cargo run -p regrap --example dataset_stats

use std::error::Error;
use std::path::PathBuf;

use regrap::store::{compute_stats, Manifest};

fn main() -> Result<(), Box<dyn Error>> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/manifest_table1.json");
    let manifest: Manifest = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    let stats = compute_stats(&manifest)?;

    println!(
        "sets: {} ({} single-object, {} multi-object)",
        stats.total_sets, stats.single_object_sets, stats.multi_object_sets
    );
    println!("pairs: {}", stats.total_pairs);
    println!("avg objects per multi-object set: {}", stats.avg_objects_multi);
    println!("avg images per set: {}", stats.avg_images_per_set);
    println!("avg reasoning steps per pair: {}", stats.avg_steps);
    Ok(())
}
