//! Grades a model transcript against a benchmark set: letter and boolean
//! extraction, normalized text keys, fractional point coverage, and the
//! aggregated accuracy table.
//!
//!     cargo run -p regrap --example score_benchmark

use std::error::Error;
use std::path::PathBuf;

use regrap::bench::{aggregate, grade_set, parse_transcript, point_score, BenchmarkSet, Key};

fn main() -> Result<(), Box<dyn Error>> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/benchmarks");
    let set: BenchmarkSet =
        serde_json::from_str(&std::fs::read_to_string(dir.join("anime_cup.json"))?)?;
    let transcript =
        parse_transcript(&std::fs::read_to_string(dir.join("anime_cup_responses.jsonl"))?)?;

    let outcomes = grade_set(&set, &transcript)?;
    for outcome in &outcomes {
        let kind = outcome.kind.to_string();
        println!(
            "{:<4} {kind:<18} {}{}",
            outcome.item_id,
            if outcome.correct { "correct" } else { "incorrect" },
            match &outcome.extracted {
                Some(got) => format!(" (extracted {got:?})"),
                None => " (nothing extracted, flagged)".to_string(),
            }
        );
    }

    // Closed descriptive items also earn a fractional score per key point.
    let mut fractions = Vec::new();
    for item in &set.items {
        if let Some(Key::Points(points)) = &item.key {
            if let Some(record) = transcript.iter().find(|r| r.item_id == item.id) {
                fractions.push(point_score(points, &record.response));
            }
        }
    }

    let report = aggregate(&outcomes, &fractions, &[])?;
    println!("\n{}", report.render_table());
    Ok(())
}
