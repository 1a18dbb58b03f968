//! End-to-end acceptance checks. Each check prints one PASS/FAIL line with
//! its runtime; the test fails if any check fails or overruns its budget.
//!
//! Run with `cargo test -p regrap --test acceptance -- --nocapture` to see
//! the lines as they complete.

mod common;

use std::collections::BTreeMap;
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use regrap::bench::{
    aggregate, grade_closed, grade_set, parse_transcript, point_score, validate_composition,
    BenchmarkItem, BenchmarkSet, Difficulty, ItemKind, Key, ScoreReport,
};
use regrap::kg::{ChainSubgraph, ChainTriple, Edge, KnowledgeGraph, Node, NodeId};
use regrap::hard_prompt::{expand_head, ReasoningVocab};
use regrap::qa::validate_pair;
use regrap::rat::Rat;
use regrap::routes::routes_for_graph;
use regrap::soft_prompt::{
    assemble, grad_check, soft_prompt_for_graph, EmbeddingTable, SoftPromptConfig,
};
use regrap::store::{compute_stats, load_set, Manifest};

fn manifest_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn run_check(name: &str, budget: Duration, check: impl FnOnce()) -> bool {
    let start = Instant::now();
    let outcome = catch_unwind(AssertUnwindSafe(check));
    let elapsed = start.elapsed();
    let ok = outcome.is_ok() && elapsed <= budget;
    println!(
        "{} {name} ({elapsed:.2?}, budget {budget:?})",
        if ok { "PASS" } else { "FAIL" }
    );
    if let Err(payload) = outcome {
        let msg = payload
            .downcast_ref::<String>()
            .map(String::as_str)
            .or_else(|| payload.downcast_ref::<&str>().copied())
            .unwrap_or("non-string panic");
        println!("     {msg}");
    }
    ok
}

#[test]
fn acceptance() {
    let mut all = true;
    all &= run_check(
        "1. reasoning-token accounting stays 2N+1",
        Duration::from_secs(1),
        token_accounting,
    );
    all &= run_check(
        "2. route extraction matches exhaustive maximal-path oracle",
        Duration::from_secs(30),
        route_oracle,
    );
    all &= run_check(
        "3. analytic gradients match finite differences",
        Duration::from_secs(30),
        gradient_check,
    );
    all &= run_check(
        "4. assembled prompt blocks are (m+1) x d",
        Duration::from_secs(5),
        shape_chain,
    );
    all &= run_check(
        "5. dataset stats reproduce the reference manifest exactly",
        Duration::from_secs(1),
        reference_manifest_stats,
    );
    all &= run_check(
        "6. benchmark composition accepts the layout and rejects 20 mutations",
        Duration::from_secs(1),
        composition_gate,
    );
    all &= run_check(
        "7. grading is exact: fractions, pooling, 30 normalization cases",
        Duration::from_secs(1),
        grading_exactness,
    );
    all &= run_check(
        "8. replayed run-set is loadable, consistent, and bit-identical",
        Duration::from_secs(60),
        replay_run_set,
    );
    all &= run_check(
        "9. prompt renderings match the checked-in goldens byte-for-byte",
        Duration::from_secs(1),
        golden_prompts,
    );
    assert!(all, "one or more acceptance checks failed");
}

fn random_chain(rng: &mut ChaCha8Rng, n: usize) -> ChainSubgraph {
    let ids: Vec<NodeId> = (0..=n)
        .map(|i| NodeId::new(format!("E{i}")).unwrap())
        .collect();
    let triples: Vec<ChainTriple> = (0..n)
        .map(|i| ChainTriple {
            head: ids[i].clone(),
            relation: format!("rel{}", rng.gen_range(0..5)),
            tail: ids[i + 1].clone(),
        })
        .collect();
    let entity_descriptions = (0..=n).map(|i| format!("entity {i}")).collect();
    let relation_descriptions = triples.iter().map(|t| t.relation.clone()).collect();
    ChainSubgraph::new(triples, entity_descriptions, relation_descriptions).unwrap()
}

fn token_accounting() {
    for case in 0..500u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(case);
        let n = rng.gen_range(1..=50);
        let chain = random_chain(&mut rng, n);
        let base = rng.gen_range(1_000..=50_000);
        let vocab = ReasoningVocab::new(&chain, base).unwrap();
        assert_eq!(vocab.entity_tokens().len(), n + 1);
        assert_eq!(vocab.relation_tokens().len(), n);
        assert_eq!(vocab.new_token_count(), 2 * n + 1);

        let rows = rng.gen_range(1..=4_096);
        let expansion = expand_head(rows, base, &chain).unwrap();
        assert_eq!(expansion.rows, rows);
        assert_eq!(expansion.cols_after - expansion.cols_before, 2 * n + 1);
        assert_eq!(expansion.new_token_ids.len(), 2 * n + 1);
        assert_eq!(expansion.new_token_ids.first(), Some(&base));
    }
}

fn random_digraph(rng: &mut ChaCha8Rng) -> KnowledgeGraph {
    let n = rng.gen_range(1..=10);
    let mut graph = KnowledgeGraph::new("oracle");
    for i in 0..n {
        graph.add_node(Node::concept(NodeId::new(format!("N{i}")).unwrap()));
    }
    let edges = rng.gen_range(0..=20);
    for _ in 0..edges {
        let from = rng.gen_range(0..n);
        let to = rng.gen_range(0..n);
        let relation = format!("r{}", rng.gen_range(0..4));
        graph.add_edge(Edge::new(
            NodeId::new(format!("N{from}")).unwrap(),
            relation,
            NodeId::new(format!("N{to}")).unwrap(),
        ));
    }
    graph
}

/// Alternating node/relation items, tagged so a node never equals a relation.
fn tagged(nodes: &[String], relations: &[String]) -> Vec<String> {
    let mut out = vec![format!("N:{}", nodes[0])];
    for (i, rel) in relations.iter().enumerate() {
        out.push(format!("R:{rel}"));
        out.push(format!("N:{}", nodes[i + 1]));
    }
    out
}

/// Every maximal simple path from each root, by brute-force DFS. A path is
/// maximal when no out-edge of its last node reaches an unvisited node.
/// Paths embedded contiguously in another path are dropped, as are exact
/// duplicates.
fn oracle_routes(graph: &KnowledgeGraph) -> Vec<String> {
    let ids: Vec<String> = graph
        .nodes()
        .iter()
        .map(|node| node.id.as_str().to_string())
        .collect();
    let no_incoming: Vec<String> = ids
        .iter()
        .filter(|id| graph.edges().iter().all(|e| e.to.as_str() != id.as_str()))
        .cloned()
        .collect();
    let roots = if no_incoming.is_empty() { ids } else { no_incoming };

    fn dfs(
        graph: &KnowledgeGraph,
        nodes: &mut Vec<String>,
        relations: &mut Vec<String>,
        found: &mut Vec<Vec<String>>,
    ) {
        let here = nodes.last().unwrap().clone();
        let extensions: Vec<(String, String)> = graph
            .edges()
            .iter()
            .filter(|e| e.from.as_str() == here && !nodes.contains(&e.to.as_str().to_string()))
            .map(|e| (e.relation.clone(), e.to.as_str().to_string()))
            .collect();
        if extensions.is_empty() {
            found.push(tagged(nodes, relations));
            return;
        }
        for (relation, to) in extensions {
            nodes.push(to);
            relations.push(relation);
            dfs(graph, nodes, relations, found);
            relations.pop();
            nodes.pop();
        }
    }

    let mut found = Vec::new();
    for root in roots {
        dfs(graph, &mut vec![root], &mut Vec::new(), &mut found);
    }

    let mut kept: Vec<String> = Vec::new();
    'outer: for (i, path) in found.iter().enumerate() {
        for (j, other) in found.iter().enumerate() {
            if j < i && other == path {
                continue 'outer;
            }
            if j != i
                && path.len() < other.len()
                && other.windows(path.len()).any(|w| w == path.as_slice())
            {
                continue 'outer;
            }
        }
        kept.push(path.join("|"));
    }
    kept.sort();
    kept
}

fn route_oracle() {
    for case in 0..1_000u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(7_000 + case);
        let graph = random_digraph(&mut rng);
        let mut produced: Vec<String> = routes_for_graph(&graph)
            .unwrap()
            .iter()
            .map(|route| {
                let nodes: Vec<String> =
                    route.nodes().iter().map(|n| n.as_str().to_string()).collect();
                tagged(&nodes, route.relations()).join("|")
            })
            .collect();
        produced.sort();
        let expected = oracle_routes(&graph);
        assert_eq!(produced, expected, "route mismatch on seeded graph {case}");
    }
}

fn random_small_graph(rng: &mut ChaCha8Rng, min_nodes: usize, max_nodes: usize) -> KnowledgeGraph {
    let n = rng.gen_range(min_nodes..=max_nodes);
    let mut graph = KnowledgeGraph::new("soft");
    for i in 0..n {
        graph.add_node(Node::concept(NodeId::new(format!("N{i}")).unwrap()));
    }
    let edges = rng.gen_range(1..=8);
    for _ in 0..edges {
        let from = rng.gen_range(0..n);
        let to = rng.gen_range(0..n);
        graph.add_edge(Edge::new(
            NodeId::new(format!("N{from}")).unwrap(),
            format!("r{}", rng.gen_range(0..3)),
            NodeId::new(format!("N{to}")).unwrap(),
        ));
    }
    graph
}

fn gradient_check() {
    for case in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(11_000 + case);
        let graph = random_small_graph(&mut rng, 2, 6);
        let config = SoftPromptConfig {
            hidden: rng.gen_range(2..=5),
            mid: rng.gen_range(2..=5),
            dim: rng.gen_range(2..=6),
            layers: rng.gen_range(1..=2),
        };
        let (_, encoded, gnn, proj) = soft_prompt_for_graph(&graph, &config, case).unwrap();
        let report = grad_check(&gnn, &proj, &encoded, 1e-5).unwrap();
        assert!(
            report.max_rel_error <= 1e-4,
            "case {case}: max relative error {} at {}",
            report.max_rel_error,
            report.worst_param
        );
    }
}

fn shape_chain() {
    for case in 0..200u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(23_000 + case);
        let graph = random_small_graph(&mut rng, 1, 5);
        let d = rng.gen_range(1..=32);
        let m = rng.gen_range(1..=20);
        let config = SoftPromptConfig {
            hidden: rng.gen_range(1..=4),
            mid: rng.gen_range(1..=4),
            dim: d,
            layers: rng.gen_range(1..=3),
        };
        let (soft, _, _, _) = soft_prompt_for_graph(&graph, &config, case).unwrap();
        assert_eq!(soft.len(), d);
        let table = EmbeddingTable::seeded(100, d, case);
        let ids: Vec<usize> = (0..m).map(|_| rng.gen_range(0..100)).collect();
        let tokens = table.embed_tokens(&ids).unwrap();
        let block = assemble(&soft, &tokens).unwrap();
        assert_eq!(block.rows(), m + 1, "case {case}");
        assert_eq!(block.cols(), d, "case {case}");
    }
}

fn reference_manifest_stats() {
    let path = manifest_dir().join("fixtures/manifest_table1.json");
    let manifest: Manifest = serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
    let stats = compute_stats(&manifest).unwrap();
    assert_eq!(stats.total_sets, 120);
    assert_eq!(stats.single_object_sets, 80);
    assert_eq!(stats.multi_object_sets, 40);
    assert_eq!(stats.total_pairs, 2_400);
    assert_eq!(stats.avg_objects_multi, Rat::from_ratio(11, 2));
    assert_eq!(stats.avg_images_per_set, Rat::from_int(20));
    assert_eq!(stats.avg_steps, Rat::from_ratio(26, 5));
    assert_eq!(stats.avg_objects_multi.to_string(), "5.500");
    assert_eq!(stats.avg_images_per_set.to_string(), "20.000");
}

fn item(id: &str, kind: ItemKind, difficulty: Option<Difficulty>, key: Option<Key>) -> BenchmarkItem {
    let options = if kind == ItemKind::MultipleChoice {
        vec!["Red".into(), "Green".into(), "Blue".into(), "Yellow".into()]
    } else {
        Vec::new()
    };
    BenchmarkItem {
        id: id.to_string(),
        kind,
        difficulty,
        question: format!("question {id}"),
        options,
        key,
    }
}

/// The expected layout: 40 multiple choice (20 simple), 15 true/false (5),
/// 10 fill-in-the-blank (5), 3 closed descriptive (1), 5 open descriptive,
/// and 1 full description.
fn well_formed_set() -> BenchmarkSet {
    let mut items = Vec::new();
    for i in 0..40 {
        let difficulty = if i < 20 { Difficulty::Simple } else { Difficulty::Difficult };
        items.push(item(
            &format!("mc{i}"),
            ItemKind::MultipleChoice,
            Some(difficulty),
            Some(Key::Letter('A')),
        ));
    }
    for i in 0..15 {
        let difficulty = if i < 5 { Difficulty::Simple } else { Difficulty::Difficult };
        items.push(item(
            &format!("tf{i}"),
            ItemKind::TrueFalse,
            Some(difficulty),
            Some(Key::Boolean(true)),
        ));
    }
    for i in 0..10 {
        let difficulty = if i < 5 { Difficulty::Simple } else { Difficulty::Difficult };
        items.push(item(
            &format!("fb{i}"),
            ItemKind::FillBlank,
            Some(difficulty),
            Some(Key::Text("x".into())),
        ));
    }
    for i in 0..3 {
        let difficulty = if i < 1 { Difficulty::Simple } else { Difficulty::Difficult };
        items.push(item(
            &format!("dc{i}"),
            ItemKind::DescriptiveClosed,
            Some(difficulty),
            Some(Key::Points(vec!["a point".into()])),
        ));
    }
    for i in 0..5 {
        items.push(item(&format!("open{i}"), ItemKind::DescriptiveOpen, None, None));
    }
    items.push(item("full0", ItemKind::FullDescription, None, None));
    BenchmarkSet {
        set_name: "layout".into(),
        items,
    }
}

fn composition_gate() {
    let set = well_formed_set();
    assert!(
        validate_composition(&set).is_empty(),
        "the reference layout must validate cleanly"
    );

    fn push(kind: ItemKind, difficulty: Option<Difficulty>, key: Option<Key>) -> Mutation {
        Box::new(move |set: &mut BenchmarkSet| {
            set.items.push(item("extra", kind, difficulty, key.clone()));
        })
    }
    fn remove_first(kind: ItemKind) -> Mutation {
        Box::new(move |set: &mut BenchmarkSet| {
            let at = set.items.iter().position(|i| i.kind == kind).unwrap();
            set.items.remove(at);
        })
    }
    fn flip(kind: ItemKind, from: Difficulty, to: Difficulty) -> Mutation {
        Box::new(move |set: &mut BenchmarkSet| {
            let found = set
                .items
                .iter_mut()
                .find(|i| i.kind == kind && i.difficulty == Some(from))
                .unwrap();
            found.difficulty = Some(to);
        })
    }
    type Mutation = Box<dyn Fn(&mut BenchmarkSet)>;
    let mutations: Vec<Mutation> = vec![
        push(ItemKind::MultipleChoice, Some(Difficulty::Simple), Some(Key::Letter('A'))),
        push(ItemKind::TrueFalse, Some(Difficulty::Simple), Some(Key::Boolean(true))),
        push(ItemKind::FillBlank, Some(Difficulty::Simple), Some(Key::Text("x".into()))),
        push(
            ItemKind::DescriptiveClosed,
            Some(Difficulty::Simple),
            Some(Key::Points(vec!["a point".into()])),
        ),
        push(ItemKind::DescriptiveOpen, None, None),
        push(ItemKind::FullDescription, None, None),
        remove_first(ItemKind::MultipleChoice),
        remove_first(ItemKind::TrueFalse),
        remove_first(ItemKind::FillBlank),
        remove_first(ItemKind::DescriptiveClosed),
        remove_first(ItemKind::DescriptiveOpen),
        remove_first(ItemKind::FullDescription),
        flip(ItemKind::MultipleChoice, Difficulty::Simple, Difficulty::Difficult),
        flip(ItemKind::MultipleChoice, Difficulty::Difficult, Difficulty::Simple),
        flip(ItemKind::TrueFalse, Difficulty::Simple, Difficulty::Difficult),
        flip(ItemKind::FillBlank, Difficulty::Simple, Difficulty::Difficult),
        flip(ItemKind::DescriptiveClosed, Difficulty::Simple, Difficulty::Difficult),
        Box::new(|set: &mut BenchmarkSet| {
            let found = set
                .items
                .iter_mut()
                .find(|i| i.kind == ItemKind::DescriptiveOpen)
                .unwrap();
            found.kind = ItemKind::FullDescription;
        }),
        Box::new(|set: &mut BenchmarkSet| {
            let found = set
                .items
                .iter_mut()
                .find(|i| i.kind == ItemKind::FullDescription)
                .unwrap();
            found.kind = ItemKind::DescriptiveOpen;
        }),
        Box::new(|set: &mut BenchmarkSet| {
            set.items.retain(|i| i.kind != ItemKind::TrueFalse);
        }),
    ];
    assert_eq!(mutations.len(), 20);
    for (i, mutate) in mutations.iter().enumerate() {
        let mut mutated = well_formed_set();
        mutate(&mut mutated);
        assert!(
            !validate_composition(&mutated).is_empty(),
            "mutation {i} slipped through the composition gate"
        );
    }
}

fn mc(id: &str, key: char) -> BenchmarkItem {
    item(id, ItemKind::MultipleChoice, Some(Difficulty::Simple), Some(Key::Letter(key)))
}

fn tf(id: &str, key: bool) -> BenchmarkItem {
    item(id, ItemKind::TrueFalse, Some(Difficulty::Simple), Some(Key::Boolean(key)))
}

fn fb(id: &str, key: &str) -> BenchmarkItem {
    item(id, ItemKind::FillBlank, Some(Difficulty::Simple), Some(Key::Text(key.into())))
}

fn dc(id: &str, points: &[&str]) -> BenchmarkItem {
    item(
        id,
        ItemKind::DescriptiveClosed,
        Some(Difficulty::Difficult),
        Some(Key::Points(points.iter().map(|p| p.to_string()).collect())),
    )
}

fn grading_exactness() {
    // Exact fractional point coverage.
    let points: Vec<String> =
        ["frame", "cover", "base", "glass"].iter().map(|p| p.to_string()).collect();
    let score = point_score(&points, "The frame, cover and base are visible.");
    assert_eq!(score, Rat::from_ratio(3, 4));
    assert_eq!(score.to_string(), "0.750");

    // Textual "False" keys parse to the boolean key.
    let parsed: BenchmarkItem = serde_json::from_str(
        r#"{"id": "q", "kind": "true_false", "question": "?", "key": "False"}"#,
    )
    .unwrap();
    assert_eq!(parsed.key, Some(Key::Boolean(false)));

    // 30 extraction and normalization cases: (item, response, correct, extracted).
    let cases: Vec<(BenchmarkItem, &str, bool, Option<&str>)> = vec![
        (mc("m1", 'C'), "The answer is C.", true, Some("C")),
        (mc("m2", 'C'), "Answer: C", true, Some("C")),
        (mc("m3", 'C'), "answer is b", false, Some("B")),
        (mc("m4", 'C'), "C", true, Some("C")),
        (mc("m5", 'C'), "(C)", true, Some("C")),
        (mc("m6", 'C'), "C.", true, Some("C")),
        (mc("m7", 'C'), "Blue", true, Some("C")),
        (mc("m8", 'C'), "blue", true, Some("C")),
        (mc("m9", 'C'), "I'd pick the third one.", false, None),
        (mc("m10", 'C'), "**Answer:** C", true, Some("C")),
        (mc("m11", 'C'), "The answer is Clearly wrong", false, None),
        (mc("m12", 'B'), "A cup is blue, so B.", false, Some("A")),
        (tf("t1", true), "True.", true, Some("true")),
        (tf("t2", true), "Yes, it is.", true, Some("true")),
        (tf("t3", true), "Correct", true, Some("true")),
        (tf("t4", true), "FALSE", false, Some("false")),
        (tf("t5", false), "False. The cup is mostly white.", true, Some("false")),
        (tf("t6", false), "No", true, Some("false")),
        (tf("t7", true), "Perhaps", false, None),
        (fb("f1", "ceramic"), "Ceramic.", true, Some("ceramic")),
        (fb("f2", "ceramic"), "It is ceramic", false, Some("it is ceramic")),
        (fb("f3", "Hoshino Ai"), "hoshino ai", true, Some("hoshino ai")),
        (fb("f4", "Hoshino Ai"), "Hoshino  Ai", true, Some("hoshino ai")),
        (fb("f5", "upper/higher"), "Upper", true, Some("upper")),
        (fb("f6", "upper/higher"), "higher", true, Some("higher")),
        (fb("f7", "upper/higher"), "lower", false, Some("lower")),
        (fb("f8", "warm"), "WARM!", true, Some("warm")),
        (fb("f9", "shy, Nijika"), "shy, Nijika", true, Some("shy nijika")),
        (dc("d1", &["frame", "cover", "base"]), "The frame and cover are visible.", false, Some("2/3 points")),
        (dc("d2", &["frame"]), "A wooden frame.", true, Some("1/1 points")),
    ];
    assert_eq!(cases.len(), 30);
    for (item, response, correct, extracted) in &cases {
        let outcome = grade_closed(item, response).unwrap();
        assert_eq!(outcome.correct, *correct, "item {} on {response:?}", item.id);
        assert_eq!(
            outcome.extracted.as_deref(),
            *extracted,
            "item {} on {response:?}",
            item.id
        );
        assert_eq!(outcome.flagged, extracted.is_none(), "item {}", item.id);
    }

    // Pooling three transcripts equals grading their concatenation, and the
    // weighted accuracy is the exact pooled ratio, not a mean of means.
    let sets: Vec<Vec<BenchmarkItem>> = vec![
        vec![mc("a1", 'A'), mc("a2", 'B'), tf("a3", true), fb("a4", "lid"), mc("a5", 'C')],
        vec![tf("b1", false), fb("b2", "wood")],
        vec![mc("c1", 'A'), mc("c2", 'B'), tf("c3", true), tf("c4", false), fb("c5", "red"), mc("c6", 'D')],
    ];
    let transcripts = [
        r#"{"item_id": "a1", "response": "A"}
{"item_id": "a2", "response": "A"}
{"item_id": "a3", "response": "True"}
{"item_id": "a4", "response": "lid"}
{"item_id": "a5", "response": "B"}"#,
        r#"{"item_id": "b1", "response": "False"}
{"item_id": "b2", "response": "metal"}"#,
        r#"{"item_id": "c1", "response": "A"}
{"item_id": "c2", "response": "A"}
{"item_id": "c3", "response": "True"}
{"item_id": "c4", "response": "True"}
{"item_id": "c5", "response": "red"}
{"item_id": "c6", "response": "D"}"#,
    ];
    let mut reports = Vec::new();
    let mut combined = Vec::new();
    for (items, transcript) in sets.iter().zip(&transcripts) {
        let records = parse_transcript(transcript).unwrap();
        let set = BenchmarkSet {
            set_name: "pooling".into(),
            items: items.clone(),
        };
        let outcomes = grade_set(&set, &records).unwrap();
        combined.extend(outcomes.clone());
        reports.push(aggregate(&outcomes, &[], &[]).unwrap());
    }
    assert_eq!(reports[0].weighted_accuracy, Rat::from_ratio(3, 5));
    assert_eq!(reports[1].weighted_accuracy, Rat::from_ratio(1, 2));
    assert_eq!(reports[2].weighted_accuracy, Rat::from_ratio(4, 6));
    let pooled = ScoreReport::pool(&reports).unwrap();
    assert_eq!(pooled.closed_total, 13);
    assert_eq!(pooled.closed_correct, 8);
    assert_eq!(pooled.weighted_accuracy, Rat::from_ratio(8, 13));
    let mean_of_means = (Rat::from_ratio(3, 5) + Rat::from_ratio(1, 2) + Rat::from_ratio(4, 6))
        / Rat::from_int(3);
    assert_ne!(pooled.weighted_accuracy, mean_of_means);
    let rescored = aggregate(&combined, &[], &[]).unwrap();
    assert_eq!(
        serde_json::to_value(&pooled).unwrap(),
        serde_json::to_value(&rescored).unwrap()
    );
}

fn walk_files(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    fn visit(root: &Path, dir: &Path, out: &mut BTreeMap<PathBuf, Vec<u8>>) {
        for entry in fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                visit(root, &path, out);
            } else {
                let rel = path.strip_prefix(root).unwrap().to_path_buf();
                out.insert(rel, fs::read(&path).unwrap());
            }
        }
    }
    let mut out = BTreeMap::new();
    visit(root, root, &mut out);
    out
}

fn replay_run_set() {
    let exe = env!("CARGO_BIN_EXE_regrap");
    let fixtures = manifest_dir().join("fixtures/llm");
    let input = manifest_dir().join("fixtures/sets/bocchi_the_rock/input.json");
    let work = tempfile::tempdir().unwrap();
    let out_a = work.path().join("a");
    let out_b = work.path().join("b");

    for out in [&out_a, &out_b] {
        let output = Command::new(exe)
            .args(["run-set", "--backend", "replay", "--fixtures"])
            .arg(&fixtures)
            .arg("--input")
            .arg(&input)
            .arg("--out")
            .arg(out)
            .args(["--count", "2"])
            .output()
            .unwrap();
        assert!(
            output.status.success(),
            "run-set exited with {}: {}",
            output.status,
            String::from_utf8_lossy(&output.stderr)
        );
    }

    let tree_a = walk_files(&out_a);
    let tree_b = walk_files(&out_b);
    assert!(!tree_a.is_empty());
    assert_eq!(tree_a, tree_b, "replayed runs differ on disk");

    let set = load_set(&out_a, "bocchi_the_rock").unwrap();
    assert!(set.graph.validate().ok());
    assert_eq!(set.pairs.len(), 2);
    for pair in &set.pairs {
        let verdict = validate_pair(pair);
        assert!(verdict.all(), "pair {:?} failed validation", pair.question);
    }

    let relation_path = work.path().join("relation.json");
    let output = Command::new(exe)
        .args(["build-graph", "--backend", "replay", "--fixtures"])
        .arg(&fixtures)
        .arg("--input")
        .arg(&input)
        .arg("--out")
        .arg(&relation_path)
        .output()
        .unwrap();
    assert!(
        output.status.success(),
        "build-graph exited with {}: {}",
        output.status,
        String::from_utf8_lossy(&output.stderr)
    );
    let relation = KnowledgeGraph::from_json(&fs::read_to_string(&relation_path).unwrap()).unwrap();
    assert!(!relation.nodes().is_empty());
    for node in relation.nodes() {
        assert!(
            set.graph.contains_node(node.id.as_str()),
            "enrichment dropped node {}",
            node.id
        );
    }
    for edge in relation.edges() {
        assert!(
            set.graph.edges().iter().any(|e| e.from == edge.from
                && e.relation == edge.relation
                && e.to == edge.to),
            "enrichment dropped edge {} -[{}]-> {}",
            edge.from,
            edge.relation,
            edge.to
        );
    }
    assert!(set.graph.nodes().len() > relation.nodes().len());
}

fn golden_prompts() {
    let dir = common::goldens_dir();
    for (name, rendered) in common::template_renderings() {
        let expected = fs::read_to_string(dir.join(name)).unwrap();
        assert_eq!(rendered, expected, "golden drift in {name}");
    }
    let report = common::hard_prompt_rendering();
    let expected = fs::read_to_string(dir.join("hard_prompt.txt")).unwrap();
    assert_eq!(report.prompt, expected, "golden drift in hard_prompt.txt");
}
