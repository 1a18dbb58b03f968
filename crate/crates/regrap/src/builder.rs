//! Graph construction and enrichment through the chat client.
//!
//! `build_relation_graph` renders the builder prompt over relational
//! knowledge, entity names, and images, then parses the model's JSON into a
//! validated graph, back-filling any main entity the model forgot as a bare
//! concept node. `enrich_graph` feeds the rendered graph plus attribute
//! knowledge back through the enricher prompt and merges the result
//! monotonically: enrichment can only add, never drop or mutate.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kg::{KgError, KnowledgeGraph, Node, NodeId, NodeKind};
use crate::llm::{ChatRequest, LlmClient, LlmError, UserPart};
use crate::templates::{entity_listing, TemplateError, TemplateKind, TemplateSet};

#[derive(Debug, Error)]
pub enum BuildError {
    #[error("entity list must be non-empty and unique; {0}")]
    BadEntityList(String),
    #[error("image {0} does not exist")]
    MissingImage(String),
    #[error(transparent)]
    Template(#[from] TemplateError),
    #[error(transparent)]
    Llm(#[from] LlmError),
    #[error("model output violates the graph schema: {0}")]
    Schema(String),
    #[error(transparent)]
    Kg(#[from] KgError),
    #[error("description output is missing a description for entity {0:?}")]
    MissingDescription(String),
    #[error("description output is not a JSON object")]
    BadDescriptionShape,
}

/// Raw personalized knowledge, split into the relational part (feeds graph
/// construction) and the attribute part (feeds enrichment).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TextualKnowledge {
    pub relational: String,
    pub attribute: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raw: Option<String>,
}

impl TextualKnowledge {
    pub fn new(relational: impl Into<String>, attribute: impl Into<String>) -> Self {
        TextualKnowledge {
            relational: relational.into(),
            attribute: attribute.into(),
            raw: None,
        }
    }

    /// Heuristic splitter for unsplit text: sentences mentioning at least two
    /// distinct entities count as relational, the rest as attribute
    /// knowledge. Offered as a helper; the pipeline never applies it
    /// silently.
    pub fn split_heuristic(raw: &str, entities: &EntityList) -> TextualKnowledge {
        let mut relational = Vec::new();
        let mut attribute = Vec::new();
        for sentence in split_sentences(raw) {
            let lower = sentence.to_lowercase();
            let mentions = entities
                .names()
                .iter()
                .filter(|e| lower.contains(&e.to_lowercase()))
                .count();
            if mentions >= 2 {
                relational.push(sentence);
            } else {
                attribute.push(sentence);
            }
        }
        TextualKnowledge {
            relational: relational.join(" "),
            attribute: attribute.join(" "),
            raw: Some(raw.to_string()),
        }
    }
}

fn split_sentences(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut current = String::new();
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        current.push(c);
        if matches!(c, '.' | '!' | '?') {
            let boundary = chars.peek().is_none_or(|n| n.is_whitespace());
            if boundary {
                let trimmed = current.trim();
                if !trimmed.is_empty() {
                    out.push(trimmed.to_string());
                }
                current.clear();
            }
        }
    }
    let trimmed = current.trim();
    if !trimmed.is_empty() {
        out.push(trimmed.to_string());
    }
    out
}

/// The main entities of a set: non-empty, trimmed, pairwise distinct.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct EntityList(Vec<String>);

impl EntityList {
    pub fn new(names: impl IntoIterator<Item = impl Into<String>>) -> Result<Self, BuildError> {
        let mut seen = std::collections::BTreeSet::new();
        let mut out = Vec::new();
        for name in names {
            let name = name.into();
            let trimmed = name.trim().to_string();
            if trimmed.is_empty() {
                return Err(BuildError::BadEntityList("blank entity name".into()));
            }
            if !seen.insert(trimmed.clone()) {
                return Err(BuildError::BadEntityList(format!(
                    "duplicate entity {trimmed:?}"
                )));
            }
            out.push(trimmed);
        }
        if out.is_empty() {
            return Err(BuildError::BadEntityList("no entities".into()));
        }
        Ok(EntityList(out))
    }

    pub fn names(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, name: &str) -> bool {
        self.0.iter().any(|e| e == name)
    }
}

impl<'de> Deserialize<'de> for EntityList {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let names = Vec::<String>::deserialize(deserializer)?;
        EntityList::new(names).map_err(serde::de::Error::custom)
    }
}

/// Train/test image paths for a set. Files are referenced by path; pixels
/// are never decoded.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ImageSet {
    #[serde(default)]
    pub train: Vec<PathBuf>,
    #[serde(default)]
    pub test: Vec<PathBuf>,
}

impl ImageSet {
    pub fn check_exists(&self) -> Result<(), BuildError> {
        for path in self.train.iter().chain(&self.test) {
            if !path.exists() {
                return Err(BuildError::MissingImage(path.display().to_string()));
            }
        }
        Ok(())
    }

    pub fn total(&self) -> usize {
        self.train.len() + self.test.len()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct BuildConfig {
    pub temperature: f64,
    /// Split enrichment into two passes: first new nodes, then new edges.
    pub two_call_enrich: bool,
}

impl Default for BuildConfig {
    fn default() -> Self {
        BuildConfig {
            temperature: 0.0,
            two_call_enrich: false,
        }
    }
}

fn image_parts(prompt: String, images: &[PathBuf]) -> Vec<UserPart> {
    let mut parts = vec![UserPart::Text(prompt)];
    parts.extend(images.iter().cloned().map(UserPart::Image));
    parts
}

fn parse_graph_response(
    content: &str,
    set_name: &str,
) -> Result<KnowledgeGraph, BuildError> {
    let value = crate::llm::extract_json(content)?;
    let mut graph =
        KnowledgeGraph::from_json_value(value).map_err(|e| BuildError::Schema(e.to_string()))?;
    graph.rename_set(set_name);
    Ok(graph)
}

fn ensure_valid(graph: &KnowledgeGraph) -> Result<(), BuildError> {
    let report = graph.validate();
    if !report.ok() {
        return Err(BuildError::Schema(report.to_string()));
    }
    Ok(())
}

/// One builder call: relational knowledge plus images in, validated graph
/// out. Every main entity appears as a node afterwards; the model's edges
/// must reference declared nodes or main entities.
pub fn build_relation_graph(
    client: &LlmClient,
    templates: &TemplateSet,
    set_name: &str,
    knowledge: &TextualKnowledge,
    entities: &EntityList,
    images: &ImageSet,
    config: &BuildConfig,
) -> Result<KnowledgeGraph, BuildError> {
    images.check_exists()?;
    let prompt = templates.render(
        TemplateKind::Builder,
        &[
            ("entities", &entity_listing(entities.names())),
            ("K_R", &knowledge.relational),
        ],
    )?;
    let request = ChatRequest::new(
        "",
        image_parts(prompt, &images.train),
        config.temperature,
        "build_graph",
    )?
    .expecting_json();
    let response = client.complete(&request)?;
    let mut graph = parse_graph_response(&response.content, set_name)?;
    for name in entities.names() {
        if !graph.contains_node(name) {
            let id = NodeId::new(name.clone()).map_err(|e| BuildError::Schema(e.to_string()))?;
            graph.add_node(Node::concept(id));
        }
    }
    for node in 0..graph.nodes().len() {
        let id = graph.nodes()[node].id.as_str().to_string();
        if entities.contains(&id) {
            if let Some(n) = graph.node_mut(&id) {
                n.kind = NodeKind::Concept;
            }
        }
    }
    ensure_valid(&graph)?;
    Ok(graph)
}

/// Monotone merge: everything in `base` survives; new nodes arrive as
/// attribute nodes (unless they are main entities) and new edges append in
/// model order.
fn merge_enrichment(
    base: &KnowledgeGraph,
    addition: &KnowledgeGraph,
    entities: &EntityList,
) -> KnowledgeGraph {
    let mut merged = base.clone();
    for node in addition.nodes() {
        match merged.node_mut(node.id.as_str()) {
            Some(existing) => {
                if existing.description.is_none() {
                    existing.description = node.description.clone();
                }
                for (key, value) in &node.attributes {
                    existing
                        .attributes
                        .entry(key.clone())
                        .or_insert_with(|| value.clone());
                }
            }
            None => {
                let mut incoming = node.clone();
                incoming.kind = if entities.contains(node.id.as_str()) {
                    NodeKind::Concept
                } else {
                    NodeKind::Attribute
                };
                merged.add_node(incoming);
            }
        }
    }
    let mut budget: BTreeMap<(String, String, String), usize> = BTreeMap::new();
    for edge in merged.edges() {
        *budget
            .entry((
                edge.from.as_str().into(),
                edge.relation.clone(),
                edge.to.as_str().into(),
            ))
            .or_default() += 1;
    }
    for edge in addition.edges() {
        let key = (
            edge.from.as_str().to_string(),
            edge.relation.clone(),
            edge.to.as_str().to_string(),
        );
        match budget.get_mut(&key) {
            Some(count) if *count > 0 => *count -= 1,
            _ => {
                merged.add_edge(edge.clone());
            }
        }
    }
    merged
}

fn enrich_once(
    client: &LlmClient,
    templates: &TemplateSet,
    graph: &KnowledgeGraph,
    knowledge: &TextualKnowledge,
    entities: &EntityList,
    temperature: f64,
    tag: &str,
) -> Result<KnowledgeGraph, BuildError> {
    let prompt = templates.render(
        TemplateKind::Enricher,
        &[
            ("entities", &entity_listing(entities.names())),
            ("KG", &graph.to_json()),
            ("K_A", &knowledge.attribute),
        ],
    )?;
    let request = ChatRequest::new(
        "",
        vec![UserPart::Text(prompt)],
        temperature,
        tag,
    )?
    .expecting_json();
    let response = client.complete(&request)?;
    let addition = parse_graph_response(&response.content, graph.set_name())?;
    let merged = merge_enrichment(graph, &addition, entities);
    ensure_valid(&merged)?;
    Ok(merged)
}

/// Enrichment with attribute knowledge. The default is a single call; the
/// two-call mode runs the enricher a second time over the first pass's
/// output to pick up edges between newly added nodes.
pub fn enrich_graph(
    client: &LlmClient,
    templates: &TemplateSet,
    graph: &KnowledgeGraph,
    knowledge: &TextualKnowledge,
    entities: &EntityList,
    config: &BuildConfig,
) -> Result<KnowledgeGraph, BuildError> {
    let first = enrich_once(
        client,
        templates,
        graph,
        knowledge,
        entities,
        config.temperature,
        "enrich",
    )?;
    if !config.two_call_enrich {
        return Ok(first);
    }
    enrich_once(
        client,
        templates,
        &first,
        knowledge,
        entities,
        config.temperature,
        "enrich_2",
    )
}

/// Short descriptions for the image and each entity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Descriptions {
    pub image: String,
    pub entities: BTreeMap<String, String>,
}

/// Renders the descriptor prompt and parses the `"Image Description"` /
/// `"<Entity> Description"` object it asks the model for.
pub fn describe_knowledge(
    client: &LlmClient,
    templates: &TemplateSet,
    entities: &EntityList,
    knowledge: &TextualKnowledge,
    images: &[PathBuf],
    config: &BuildConfig,
) -> Result<Descriptions, BuildError> {
    for path in images {
        if !Path::new(path).exists() {
            return Err(BuildError::MissingImage(path.display().to_string()));
        }
    }
    let prompt = templates.render(
        TemplateKind::Describe,
        &[
            ("entities", &entity_listing(entities.names())),
            ("K_A", &knowledge.attribute),
        ],
    )?;
    let request = ChatRequest::new(
        "",
        image_parts(prompt, images),
        config.temperature,
        "describe",
    )?
    .expecting_json();
    let response = client.complete(&request)?;
    let value = crate::llm::extract_json(&response.content)?;
    let object = value.as_object().ok_or(BuildError::BadDescriptionShape)?;
    let image = object
        .get("Image Description")
        .and_then(|v| v.as_str())
        .ok_or_else(|| BuildError::MissingDescription("Image".into()))?
        .to_string();
    let mut out = BTreeMap::new();
    for name in entities.names() {
        let keyed = [format!("<{name}> Description"), format!("{name} Description")];
        let found = keyed
            .iter()
            .find_map(|k| object.get(k))
            .and_then(|v| v.as_str())
            .ok_or_else(|| BuildError::MissingDescription(name.clone()))?;
        out.insert(name.clone(), found.to_string());
    }
    Ok(Descriptions {
        image,
        entities: out,
    })
}
