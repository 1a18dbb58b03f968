//! Shared fixtures for the integration tests: the reference chain graph and
//! the full table of prompt renderings checked against tests/goldens/.

use std::path::PathBuf;

use regrap::hard_prompt::{render_prompt, RenderReport};
use regrap::kg::{ChainSubgraph, Edge, KnowledgeGraph, Node, NodeId};
use regrap::routes::ReasoningRoute;
use regrap::templates::{TemplateKind, TemplateSet};

pub const ENTITIES: &str = "Bocchi, Ryo, Nijika, Kita, Kessoku Band";
pub const KNOWLEDGE: &str = "Ryo is a senior of Kita. Kita is a potential couple of Bocchi. \
                             Bocchi is the guitarist of Kessoku Band.";
pub const ATTRIBUTES: &str = "Bocchi is a shy first-year student at school A with pink hair. \
                              Ryo attends school B and plays bass. \
                              Nijika is the leader and drummer of the band.";
pub const QUESTION: &str =
    "Through the chain of relationships starting from Ryo, which band does Bocchi play guitar for?";
pub const ANSWER: &str = "Ryo recruited her classmate Kita into the group. Kita then introduced \
                          everyone to Bocchi, the guitarist. Bocchi plays guitar for Kessoku Band. \
                          Therefore, the band is Kessoku Band.";
pub const EXAMPLE: &str = "Which band member does Ryo's junior Kita have a close bond with, \
                           and what hair color does that member have?";
pub const STEPS: &str = "1. Ryo is a senior of Kita\n2. Kita is a potential couple of Bocchi";
pub const REFERENCE: &str = "Bocchi plays guitar for Kessoku Band, which she joined through Nijika.";

pub fn goldens_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/goldens")
}

pub fn chain_graph() -> KnowledgeGraph {
    let mut graph = KnowledgeGraph::new("kessoku_band");
    let mut ryo = Node::concept(NodeId::new("Ryo").unwrap());
    ryo.description = Some("a bassist at school B".into());
    let mut kita = Node::concept(NodeId::new("Kita").unwrap());
    kita.description = Some("a cheerful classmate".into());
    let mut bocchi = Node::concept(NodeId::new("Bocchi").unwrap());
    bocchi.description = Some("a shy pink-haired guitarist".into());
    graph.add_node(ryo);
    graph.add_node(kita);
    graph.add_node(bocchi);
    graph.add_edge(Edge::new(
        NodeId::new("Ryo").unwrap(),
        "is a senior of",
        NodeId::new("Kita").unwrap(),
    ));
    graph.add_edge(Edge::new(
        NodeId::new("Kita").unwrap(),
        "is a potential couple of",
        NodeId::new("Bocchi").unwrap(),
    ));
    graph
}

pub fn chain() -> ChainSubgraph {
    let graph = chain_graph();
    let route = ReasoningRoute::new(
        vec![
            NodeId::new("Ryo").unwrap(),
            NodeId::new("Kita").unwrap(),
            NodeId::new("Bocchi").unwrap(),
        ],
        vec!["is a senior of".into(), "is a potential couple of".into()],
    )
    .unwrap();
    route.to_chain(&graph).unwrap()
}

pub fn hard_prompt_rendering() -> RenderReport {
    render_prompt(&chain())
}

type RenderSpec<'a> = (&'static str, TemplateKind, Vec<(&'a str, &'a str)>);

/// Every template rendered with fixed inputs, as (golden file name, text).
pub fn template_renderings() -> Vec<(&'static str, String)> {
    let templates = TemplateSet::builtin();
    let graph_json = chain_graph().to_json();
    let specs: Vec<RenderSpec<'_>> = vec![
        (
            "builder.txt",
            TemplateKind::Builder,
            vec![("entities", ENTITIES), ("K_R", KNOWLEDGE)],
        ),
        (
            "enricher.txt",
            TemplateKind::Enricher,
            vec![("entities", ENTITIES), ("K_A", ATTRIBUTES), ("KG", &graph_json)],
        ),
        (
            "describe.txt",
            TemplateKind::Describe,
            vec![("entities", ENTITIES), ("K_A", ATTRIBUTES)],
        ),
        (
            "question.txt",
            TemplateKind::Question,
            vec![("knowledge", KNOWLEDGE), ("steps", STEPS), ("example", EXAMPLE)],
        ),
        (
            "answer.txt",
            TemplateKind::Answer,
            vec![("question", QUESTION), ("steps", STEPS)],
        ),
        (
            "reference.txt",
            TemplateKind::Reference,
            vec![("question", QUESTION), ("knowledge", KNOWLEDGE)],
        ),
        (
            "assessment.txt",
            TemplateKind::Assessment,
            vec![
                ("question", QUESTION),
                ("knowledge", KNOWLEDGE),
                ("reference", REFERENCE),
                ("answer", ANSWER),
            ],
        ),
        (
            "pair_validation.txt",
            TemplateKind::PairValidation,
            vec![("question", QUESTION), ("answer", ANSWER)],
        ),
        (
            "point_match.txt",
            TemplateKind::PointMatch,
            vec![
                ("point", "keeps the beverage warm"),
                ("response", "The wooden lid keeps the beverage warm for a long time."),
            ],
        ),
    ];
    assert_eq!(specs.len(), TemplateKind::ALL.len());
    specs
        .into_iter()
        .map(|(name, kind, vars)| (name, templates.render(kind, &vars).unwrap()))
        .collect()
}
