//! Command-line dispatch: wires the pipeline stages into subcommands.
//!
//! Output is JSON on stdout unless `--pretty` selects a human rendering.
//! Exit codes: 0 success, 1 failure (pipeline or validation), 2 usage.

use std::collections::VecDeque;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use serde_json::json;
use thiserror::Error;

use crate::bench::{
    self, point_score, validate_composition, BenchmarkSet, ItemKind, JudgeScore, Key,
    TranscriptRecord,
};
use crate::builder::{
    build_relation_graph, enrich_graph, BuildConfig, EntityList, ImageSet, TextualKnowledge,
};
use crate::hard_prompt::{expand_head, render_prompt, tokenize_with_vocab, ReasoningVocab};
use crate::kg::{pretty_json, KnowledgeGraph};
use crate::llm::{
    Backend, FixtureStore, LiveConfig, LlmClient, MockScript, ENV_API_BASE, ENV_API_KEY,
};
use crate::qa::{generate_pairs, QaConfig};
use crate::routes::{routes_for_graph_with, ReasoningRoute, RouteConfig, RouteItem};
use crate::soft_prompt::{
    grad_check, save_params, save_vector, soft_prompt_for_graph, SoftPromptConfig,
};
use crate::store::{compute_stats, save_set, Manifest, PersonalSet, Provenance, SaveOptions};
use crate::templates::TemplateSet;

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Failure(String),
}

macro_rules! failure_from {
    ($($ty:ty),* $(,)?) => {$(
        impl From<$ty> for CliError {
            fn from(e: $ty) -> Self {
                CliError::Failure(e.to_string())
            }
        }
    )*};
}

failure_from!(
    crate::bench::BenchError,
    crate::builder::BuildError,
    crate::hard_prompt::HardPromptError,
    crate::kg::KgError,
    crate::llm::LlmError,
    crate::qa::QaError,
    crate::soft_prompt::SoftError,
    crate::store::StoreError,
    crate::templates::TemplateError,
    serde_json::Error,
    std::io::Error,
);

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BackendChoice {
    Live,
    Mock,
    Replay,
}

#[derive(Debug, Args)]
struct GlobalOpts {
    /// Model backend: live HTTP, scripted mock, or fixture replay.
    #[arg(long, global = true, value_enum, default_value_t = BackendChoice::Live)]
    backend: BackendChoice,
    /// Fixture directory (required for replay; target of --record).
    #[arg(long, global = true)]
    fixtures: Option<PathBuf>,
    /// Seed for randomized components.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Config file; defaults to ./regrap.toml when present.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Record live responses into the fixture directory.
    #[arg(long, global = true)]
    record: bool,
    /// Human-readable output where available.
    #[arg(long, global = true)]
    pretty: bool,
    /// Prompt template override directory.
    #[arg(long, global = true)]
    templates: Option<PathBuf>,
    /// Chat endpoint base URL (overrides config and environment).
    #[arg(long, global = true)]
    api_base: Option<String>,
    /// API key (overrides config and environment).
    #[arg(long, global = true)]
    api_key: Option<String>,
}

#[derive(Debug, Parser)]
#[command(
    name = "regrap",
    version,
    about = "Personal knowledge graphs, CoT QA synthesis, graph prompts, and benchmark scoring"
)]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Debug, Subcommand)]
enum Verb {
    /// Build a relation graph from an input spec.
    BuildGraph {
        /// Input spec JSON (name, entities, knowledge, image paths).
        #[arg(long)]
        input: PathBuf,
        /// Write the graph here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Enrich a relation graph with attribute knowledge.
    Enrich {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        input: PathBuf,
        /// Ask for new nodes and new edges in two separate calls.
        #[arg(long)]
        two_call: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Extract pruned reasoning routes from a graph.
    Routes {
        #[arg(long)]
        graph: PathBuf,
        /// Maximum edges per route.
        #[arg(long, default_value_t = 12)]
        max_depth: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate validated CoT QA pairs for a graph's routes.
    GenQa {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        input: PathBuf,
        /// Target number of pairs.
        #[arg(long, default_value_t = 20)]
        count: usize,
        /// Validate pairs with the judge model instead of heuristics.
        #[arg(long)]
        judge: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render a route as a reasoning prompt with token accounting.
    HardPrompt {
        #[arg(long)]
        graph: PathBuf,
        /// Which extracted route to render.
        #[arg(long, default_value_t = 0)]
        route: usize,
        /// Base vocabulary size the new tokens extend.
        #[arg(long, default_value_t = 32000)]
        base_size: usize,
        /// Embedding rows for the head expansion accounting.
        #[arg(long, default_value_t = 4096)]
        rows: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Encode a graph into a soft prompt vector.
    SoftPrompt {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, default_value_t = 64)]
        hidden: usize,
        #[arg(long, default_value_t = 128)]
        mid: usize,
        #[arg(long, default_value_t = 4096)]
        dim: usize,
        #[arg(long, default_value_t = 2)]
        layers: usize,
        /// Verify analytic gradients against central differences.
        #[arg(long)]
        grad_check: bool,
        #[arg(long, default_value_t = 1e-5)]
        epsilon: f64,
        /// Save the GNN and projection parameters to this file.
        #[arg(long)]
        params_out: Option<PathBuf>,
        /// Save the soft prompt vector to this file.
        #[arg(long)]
        vector_out: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Summarize a dataset manifest.
    Stats {
        manifest: PathBuf,
    },
    /// Check a benchmark set against the expected composition.
    BenchValidate {
        set: PathBuf,
    },
    /// Grade a response transcript against a benchmark's answer keys.
    BenchGrade {
        #[arg(long)]
        set: PathBuf,
        /// JSONL transcript of {item_id, response} records.
        #[arg(long)]
        transcript: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Grade a transcript and judge its open-ended responses.
    BenchJudge {
        #[arg(long)]
        set: PathBuf,
        #[arg(long)]
        transcript: PathBuf,
        /// Text file with the set's knowledge, for reference answers.
        #[arg(long)]
        knowledge: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run build -> enrich -> routes -> QA for input specs and save the sets.
    RunSet {
        /// Input spec JSON; repeat for multiple sets.
        #[arg(long, required = true)]
        input: Vec<PathBuf>,
        /// Dataset root the sets are saved under.
        #[arg(long)]
        out: PathBuf,
        /// Override the set name (single --input only).
        #[arg(long)]
        name: Option<String>,
        /// Target number of QA pairs per set.
        #[arg(long, default_value_t = 20)]
        count: usize,
        /// Worker threads; defaults to the logical core count.
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long)]
        judge: bool,
        #[arg(long)]
        two_call: bool,
        /// Replace a set that already exists.
        #[arg(long)]
        overwrite: bool,
        /// Keep image paths in place instead of copying them into the set.
        #[arg(long)]
        no_copy_images: bool,
    },
}

/// Keys accepted in regrap.toml.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    api_base: Option<String>,
    api_key: Option<String>,
    model: Option<String>,
    fixtures: Option<PathBuf>,
    templates: Option<PathBuf>,
}

/// Flag, environment, and config-file settings folded together:
/// flags > environment > config file.
struct Settings {
    backend: BackendChoice,
    record: bool,
    fixtures: Option<PathBuf>,
    templates: TemplateSet,
    api_base: Option<String>,
    api_key: Option<String>,
    model: Option<String>,
    seed: u64,
    pretty: bool,
}

fn load_file_config(path: Option<&Path>) -> Result<FileConfig, CliError> {
    let (path, required) = match path {
        Some(p) => (p.to_path_buf(), true),
        None => (PathBuf::from("regrap.toml"), false),
    };
    if !path.exists() {
        return if required {
            Err(CliError::Usage(format!(
                "config file {} not found",
                path.display()
            )))
        } else {
            Ok(FileConfig::default())
        };
    }
    let text = std::fs::read_to_string(&path)?;
    toml::from_str(&text)
        .map_err(|e| CliError::Usage(format!("bad config {}: {e}", path.display())))
}

fn resolve_settings(
    global: &GlobalOpts,
    file: FileConfig,
    env_api_base: Option<String>,
    env_api_key: Option<String>,
) -> Settings {
    let templates = match global.templates.clone().or(file.templates) {
        Some(dir) => TemplateSet::with_dir(dir),
        None => TemplateSet::builtin(),
    };
    Settings {
        backend: global.backend,
        record: global.record,
        fixtures: global.fixtures.clone().or(file.fixtures),
        templates,
        api_base: global.api_base.clone().or(env_api_base).or(file.api_base),
        api_key: global.api_key.clone().or(env_api_key).or(file.api_key),
        model: file.model,
        seed: global.seed,
        pretty: global.pretty,
    }
}

impl Settings {
    fn client(&self) -> Result<LlmClient, CliError> {
        let backend = match self.backend {
            BackendChoice::Live => {
                let api_base = self.api_base.clone().ok_or_else(|| {
                    CliError::Usage(format!(
                        "live backend needs an API base (--api-base, {ENV_API_BASE}, or config api_base)"
                    ))
                })?;
                let api_key = self.api_key.clone().ok_or_else(|| {
                    CliError::Usage(format!(
                        "live backend needs an API key (--api-key, {ENV_API_KEY}, or config api_key)"
                    ))
                })?;
                let mut live = LiveConfig::new(api_base, api_key);
                if let Some(model) = &self.model {
                    live = live.with_model(model);
                }
                Backend::Live(live)
            }
            BackendChoice::Mock => Backend::mock(MockScript::new()),
            BackendChoice::Replay => {
                let dir = self.fixtures.clone().ok_or_else(|| {
                    CliError::Usage("replay backend needs --fixtures".into())
                })?;
                Backend::Replay(FixtureStore::new(dir))
            }
        };
        let mut client = LlmClient::new(backend);
        if self.record {
            let dir = self.fixtures.clone().ok_or_else(|| {
                CliError::Usage("--record needs --fixtures".into())
            })?;
            client = client.with_record(FixtureStore::new(dir));
        }
        Ok(client)
    }
}

/// On-disk input spec: the raw knowledge for one personalized set. Image
/// paths are resolved relative to the spec file.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct InputSpec {
    name: String,
    entities: Vec<String>,
    relational: String,
    attribute: String,
    #[serde(default)]
    train_images: Vec<PathBuf>,
    #[serde(default)]
    test_images: Vec<PathBuf>,
}

struct LoadedInput {
    name: String,
    entities: EntityList,
    knowledge: TextualKnowledge,
    images: ImageSet,
}

fn load_input(path: &Path) -> Result<LoadedInput, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Failure(format!("{}: {e}", path.display())))?;
    let spec: InputSpec = serde_json::from_str(&text)
        .map_err(|e| CliError::Failure(format!("{}: {e}", path.display())))?;
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let resolve = |p: PathBuf| if p.is_absolute() { p } else { dir.join(p) };
    Ok(LoadedInput {
        name: spec.name,
        entities: EntityList::new(spec.entities)?,
        knowledge: TextualKnowledge::new(spec.relational, spec.attribute),
        images: ImageSet {
            train: spec.train_images.into_iter().map(resolve).collect(),
            test: spec.test_images.into_iter().map(resolve).collect(),
        },
    })
}

fn load_graph(path: &Path) -> Result<KnowledgeGraph, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Failure(format!("{}: {e}", path.display())))?;
    let graph = KnowledgeGraph::from_json(&text)?;
    let report = graph.validate();
    if !report.ok() {
        return Err(CliError::Failure(format!(
            "{}: {report}",
            path.display()
        )));
    }
    Ok(graph)
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Failure(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Failure(format!("{}: {e}", path.display())))
}

/// Prints to stdout or writes to a file, always newline-terminated.
fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    let mut text = text.to_string();
    if !text.ends_with('\n') {
        text.push('\n');
    }
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn route_line(route: &ReasoningRoute) -> String {
    route
        .alternating()
        .iter()
        .map(|item| match item {
            RouteItem::Node(id) => id.to_string(),
            RouteItem::Relation(r) => format!("-[{r}]->"),
        })
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn dispatch(argv: Vec<String>) -> i32 {
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let _ = err.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            eprintln!("run with --help for usage");
            2
        }
        Err(CliError::Failure(msg)) => {
            eprintln!("error: {msg}");
            1
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let file = load_file_config(cli.global.config.as_deref())?;
    let settings = resolve_settings(
        &cli.global,
        file,
        std::env::var(ENV_API_BASE).ok(),
        std::env::var(ENV_API_KEY).ok(),
    );
    match cli.verb {
        Verb::BuildGraph { input, out } => {
            let input = load_input(&input)?;
            let client = settings.client()?;
            let graph = build_relation_graph(
                &client,
                &settings.templates,
                &input.name,
                &input.knowledge,
                &input.entities,
                &input.images,
                &BuildConfig::default(),
            )?;
            emit(out.as_deref(), &graph.to_json())
        }
        Verb::Enrich {
            graph,
            input,
            two_call,
            out,
        } => {
            let graph = load_graph(&graph)?;
            let input = load_input(&input)?;
            let client = settings.client()?;
            let config = BuildConfig {
                two_call_enrich: two_call,
                ..BuildConfig::default()
            };
            let enriched = enrich_graph(
                &client,
                &settings.templates,
                &graph,
                &input.knowledge,
                &input.entities,
                &config,
            )?;
            emit(out.as_deref(), &enriched.to_json())
        }
        Verb::Routes {
            graph,
            max_depth,
            out,
        } => {
            let graph = load_graph(&graph)?;
            let routes = routes_for_graph_with(&graph, RouteConfig { max_depth })?;
            if settings.pretty {
                let lines: Vec<String> = routes.iter().map(route_line).collect();
                emit(out.as_deref(), &lines.join("\n"))
            } else {
                emit(out.as_deref(), &pretty_json(&serde_json::to_value(&routes)?))
            }
        }
        Verb::GenQa {
            graph,
            input,
            count,
            judge,
            out,
        } => {
            let graph = load_graph(&graph)?;
            let input = load_input(&input)?;
            let client = settings.client()?;
            let routes = routes_for_graph_with(&graph, RouteConfig::default())?;
            let config = QaConfig {
                target_count: count,
                judge,
                ..QaConfig::default()
            };
            let generated = generate_pairs(
                &client,
                &settings.templates,
                &routes,
                &input.knowledge,
                &config,
            )?;
            let value = json!({
                "pairs": generated.pairs,
                "requested": generated.requested,
                "shortfall": generated.shortfall,
                "rounds_run": generated.rounds_run,
                "rejected": generated.rejected,
                "duplicates": generated.duplicates,
                "skipped_routes": generated.skipped_routes,
            });
            emit(out.as_deref(), &pretty_json(&value))
        }
        Verb::HardPrompt {
            graph,
            route,
            base_size,
            rows,
            out,
        } => {
            let graph = load_graph(&graph)?;
            let routes = routes_for_graph_with(&graph, RouteConfig::default())?;
            let picked = routes.get(route).ok_or_else(|| {
                CliError::Usage(format!(
                    "route index {route} out of range ({} routes)",
                    routes.len()
                ))
            })?;
            let chain = picked.to_chain(&graph)?;
            let vocab = ReasoningVocab::new(&chain, base_size)?;
            let render = render_prompt(&chain);
            let expansion = expand_head(rows, base_size, &chain)?;
            let token_ids = tokenize_with_vocab(&render.prompt, &vocab);
            if settings.pretty {
                let text = format!(
                    "{}\n\nnew tokens: {} entities + {} relations\nhead: {} x {} -> {} x {}",
                    render.prompt,
                    vocab.entity_tokens().len(),
                    vocab.relation_tokens().len(),
                    expansion.rows,
                    expansion.cols_before,
                    expansion.rows,
                    expansion.cols_after,
                );
                emit(out.as_deref(), &text)
            } else {
                let value = json!({
                    "prompt": render.prompt,
                    "empty_entity_descriptions": render.empty_entity_descriptions,
                    "empty_relation_descriptions": render.empty_relation_descriptions,
                    "vocab": vocab,
                    "expansion": expansion,
                    "token_ids": token_ids,
                });
                emit(out.as_deref(), &pretty_json(&value))
            }
        }
        Verb::SoftPrompt {
            graph,
            hidden,
            mid,
            dim,
            layers,
            grad_check: check,
            epsilon,
            params_out,
            vector_out,
            out,
        } => {
            let graph = load_graph(&graph)?;
            let config = SoftPromptConfig {
                hidden,
                mid,
                dim,
                layers,
            };
            let (vector, encoded, gnn, proj) =
                soft_prompt_for_graph(&graph, &config, settings.seed)?;
            if let Some(path) = &params_out {
                save_params(path, &gnn, &proj)?;
            }
            if let Some(path) = &vector_out {
                save_vector(path, &vector)?;
            }
            let report = if check {
                Some(grad_check(&gnn, &proj, &encoded, epsilon)?)
            } else {
                None
            };
            if settings.pretty {
                let mut text = format!(
                    "nodes: {}\nrelations: {}\nsoft prompt dim: {}",
                    encoded.node_count(),
                    encoded.relation_count(),
                    vector.len(),
                );
                if let Some(report) = &report {
                    text.push_str(&format!(
                        "\ngrad check: max rel error {:.3e} at {} over {} parameters",
                        report.max_rel_error, report.worst_param, report.params_checked,
                    ));
                }
                emit(out.as_deref(), &text)
            } else {
                let value = json!({
                    "nodes": encoded.node_count(),
                    "relations": encoded.relation_count(),
                    "dim": vector.len(),
                    "values": vector.values,
                    "grad_check": report,
                });
                emit(out.as_deref(), &pretty_json(&value))
            }
        }
        Verb::Stats { manifest } => {
            let manifest: Manifest = read_json(&manifest)?;
            let stats = compute_stats(&manifest)?;
            if settings.pretty {
                let text = format!(
                    "sets: {} ({} single-object, {} multi-object)\n\
                     pairs: {}\n\
                     avg objects per multi-object set: {}\n\
                     avg images per set: {}\n\
                     avg reasoning steps per pair: {}",
                    stats.total_sets,
                    stats.single_object_sets,
                    stats.multi_object_sets,
                    stats.total_pairs,
                    stats.avg_objects_multi.to_decimal_string(3),
                    stats.avg_images_per_set.to_decimal_string(3),
                    stats.avg_steps.to_decimal_string(3),
                );
                emit(None, &text)
            } else {
                emit(None, &pretty_json(&serde_json::to_value(&stats)?))
            }
        }
        Verb::BenchValidate { set } => {
            let set: BenchmarkSet = read_json(&set)?;
            let deviations = validate_composition(&set);
            emit(None, &pretty_json(&serde_json::to_value(&deviations)?))?;
            if deviations.is_empty() {
                Ok(())
            } else {
                Err(CliError::Failure(format!(
                    "{} composition deviations",
                    deviations.len()
                )))
            }
        }
        Verb::BenchGrade {
            set,
            transcript,
            out,
        } => {
            let set: BenchmarkSet = read_json(&set)?;
            let records = load_transcript(&transcript)?;
            let report = grade_transcript(&set, &records)?;
            if settings.pretty {
                emit(out.as_deref(), &report.render_table())
            } else {
                emit(out.as_deref(), &pretty_json(&serde_json::to_value(&report)?))
            }
        }
        Verb::BenchJudge {
            set,
            transcript,
            knowledge,
            out,
        } => {
            let set: BenchmarkSet = read_json(&set)?;
            let records = load_transcript(&transcript)?;
            let knowledge = std::fs::read_to_string(&knowledge)
                .map_err(|e| CliError::Failure(format!("{}: {e}", knowledge.display())))?;
            let client = settings.client()?;
            let judges = judge_open_items(&set, &records, &knowledge, &client, &settings.templates)?;
            let outcomes = bench::grade_set(&set, &records)?;
            let points = point_fractions(&set, &records);
            let report = bench::aggregate(&outcomes, &points, &judges)?;
            if settings.pretty {
                emit(out.as_deref(), &report.render_table())
            } else {
                emit(out.as_deref(), &pretty_json(&serde_json::to_value(&report)?))
            }
        }
        Verb::RunSet {
            input,
            out,
            name,
            count,
            jobs,
            judge,
            two_call,
            overwrite,
            no_copy_images,
        } => {
            if name.is_some() && input.len() > 1 {
                return Err(CliError::Usage(
                    "--name only applies to a single --input".into(),
                ));
            }
            let jobs = jobs
                .or_else(|| std::thread::available_parallelism().ok().map(|n| n.get()))
                .unwrap_or(1)
                .max(1);
            let options = RunOptions {
                out_root: out,
                name_override: name,
                count,
                judge,
                two_call,
                save: SaveOptions {
                    copy_images: !no_copy_images,
                    overwrite,
                },
            };
            run_sets(&input, jobs, &settings, &options)
        }
    }
}

fn load_transcript(path: &Path) -> Result<Vec<TranscriptRecord>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Failure(format!("{}: {e}", path.display())))?;
    Ok(bench::parse_transcript(&text)?)
}

/// Point-coverage fractions for closed descriptive items keyed on points.
fn point_fractions(set: &BenchmarkSet, records: &[TranscriptRecord]) -> Vec<crate::rat::Rat> {
    let mut scores = Vec::new();
    for item in &set.items {
        if let Some(Key::Points(points)) = &item.key {
            if let Some(record) = records.iter().find(|r| r.item_id == item.id) {
                scores.push(point_score(points, &record.response));
            }
        }
    }
    scores
}

fn grade_transcript(
    set: &BenchmarkSet,
    records: &[TranscriptRecord],
) -> Result<bench::ScoreReport, CliError> {
    let outcomes = bench::grade_set(set, records)?;
    let points = point_fractions(set, records);
    Ok(bench::aggregate(&outcomes, &points, &[])?)
}

fn judge_open_items(
    set: &BenchmarkSet,
    records: &[TranscriptRecord],
    knowledge: &str,
    client: &LlmClient,
    templates: &TemplateSet,
) -> Result<Vec<JudgeScore>, CliError> {
    let mut judges = Vec::new();
    for item in set
        .items
        .iter()
        .filter(|i| matches!(i.kind, ItemKind::DescriptiveOpen | ItemKind::FullDescription))
    {
        let record = records
            .iter()
            .find(|r| r.item_id == item.id)
            .ok_or_else(|| bench::BenchError::MissingResponse(item.id.clone()))?;
        let reference =
            bench::generate_reference(client, templates, &item.question, knowledge)?;
        judges.push(bench::judge_score(
            client,
            templates,
            &item.question,
            knowledge,
            &reference,
            &record.response,
        )?);
    }
    Ok(judges)
}

struct RunOptions {
    out_root: PathBuf,
    name_override: Option<String>,
    count: usize,
    judge: bool,
    two_call: bool,
    save: SaveOptions,
}

fn run_one_set(
    path: &Path,
    settings: &Settings,
    options: &RunOptions,
) -> Result<serde_json::Value, CliError> {
    let input = load_input(path)?;
    let name = options.name_override.clone().unwrap_or(input.name);
    let client = settings.client()?;
    let build_config = BuildConfig {
        two_call_enrich: options.two_call,
        ..BuildConfig::default()
    };
    let relation_graph = build_relation_graph(
        &client,
        &settings.templates,
        &name,
        &input.knowledge,
        &input.entities,
        &input.images,
        &build_config,
    )?;
    let graph = enrich_graph(
        &client,
        &settings.templates,
        &relation_graph,
        &input.knowledge,
        &input.entities,
        &build_config,
    )?;
    let routes = routes_for_graph_with(&graph, RouteConfig::default())?;
    let qa_config = QaConfig {
        target_count: options.count,
        judge: options.judge,
        ..QaConfig::default()
    };
    let generated = generate_pairs(
        &client,
        &settings.templates,
        &routes,
        &input.knowledge,
        &qa_config,
    )?;
    let set = PersonalSet {
        name,
        entities: input.entities,
        knowledge: input.knowledge,
        images: input.images,
        graph,
        pairs: generated.pairs,
        provenance: Provenance {
            backend: client.backend_kind(),
            fixture_digests: vec![],
        },
    };
    let dir = save_set(&options.out_root, &set, &options.save)?;
    Ok(json!({
        "name": set.name,
        "path": dir,
        "pairs": set.pairs.len(),
        "shortfall": generated.shortfall,
        "routes": routes.len(),
    }))
}

fn run_sets(
    inputs: &[PathBuf],
    jobs: usize,
    settings: &Settings,
    options: &RunOptions,
) -> Result<(), CliError> {
    let queue: Mutex<VecDeque<(usize, &PathBuf)>> =
        Mutex::new(inputs.iter().enumerate().collect());
    let results: Mutex<Vec<(usize, Result<serde_json::Value, CliError>)>> =
        Mutex::new(Vec::with_capacity(inputs.len()));
    std::thread::scope(|scope| {
        for _ in 0..jobs.min(inputs.len()) {
            scope.spawn(|| loop {
                let job = queue.lock().expect("queue poisoned").pop_front();
                let Some((index, path)) = job else {
                    break;
                };
                let result = run_one_set(path, settings, options);
                results.lock().expect("results poisoned").push((index, result));
            });
        }
    });
    let mut results = results.into_inner().expect("results poisoned");
    results.sort_by_key(|(index, _)| *index);
    let mut summaries = Vec::new();
    let mut failures = Vec::new();
    for (index, result) in results {
        match result {
            Ok(summary) => summaries.push(summary),
            Err(err) => failures.push(format!("{}: {err}", inputs[index].display())),
        }
    }
    emit(None, &pretty_json(&serde_json::Value::Array(summaries)))?;
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Failure(failures.join("; ")))
    }
}
