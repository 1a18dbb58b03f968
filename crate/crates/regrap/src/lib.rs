//! Turns raw personalized knowledge (images plus free text) into knowledge
//! graphs, reasoning routes, chain-of-thought QA pairs, graph prompts, and
//! benchmark scores.
//!
//! The library is the primary interface; each major capability has a runnable
//! example:
//!
//! ```text
//! cargo run --example build_graph_replay    # text + images -> knowledge graph
//! cargo run --example extract_routes       # graph -> pruned reasoning routes
//! cargo run --example generate_qa_replay   # routes -> validated CoT QA pairs
//! cargo run --example hard_prompt_tokens   # chain -> prompt, vocab, head accounting
//! cargo run --example soft_prompt_kernel   # graph -> GNN soft prompt + grad check
//! cargo run --example dataset_stats        # manifest -> corpus statistics
//! cargo run --example score_benchmark      # transcript -> benchmark score report
//! ```
//!
//! A thin `regrap` binary exposes the same pipeline as subcommands; see the
//! README for the verb list.

pub mod bench;
pub mod builder;
pub mod cli;
pub mod hard_prompt;
pub mod kg;
pub mod llm;
pub mod qa;
pub mod rat;
pub mod routes;
pub mod soft_prompt;
pub mod store;
pub mod templates;

pub use bench::{BenchmarkItem, BenchmarkSet, ScoreReport};
pub use builder::{EntityList, ImageSet, TextualKnowledge};
pub use hard_prompt::{HeadExpansion, ReasoningVocab};
pub use qa::CoTQAPair;
pub use soft_prompt::{GradCheckReport, OneHotGraph, SoftPromptVector};
pub use store::{DatasetStats, Manifest, PersonalSet};
pub use kg::{ChainSubgraph, Edge, KnowledgeGraph, Node, NodeId};
pub use llm::{Backend, ChatRequest, ChatResponse, LlmClient};
pub use routes::{ReasoningRoute, ReasoningTree};
