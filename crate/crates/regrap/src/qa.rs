//! Chain-of-thought QA pair generation and validation.
//!
//! A reasoning route renders into numbered steps; the question prompt turns
//! those steps plus the set's knowledge into a question, and the answer
//! prompt refines the steps into a full step-by-step answer. Pairs are kept
//! only when they pass validation, either the built-in heuristics or the
//! model-judged variant.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::builder::TextualKnowledge;
use crate::llm::{ChatRequest, LlmClient, LlmError, UserPart};
use crate::routes::ReasoningRoute;
use crate::templates::{TemplateError, TemplateKind, TemplateSet};

#[derive(Debug, Error)]
pub enum QaError {
    #[error(transparent)]
    Template(#[from] TemplateError),
    #[error(transparent)]
    Llm(#[from] LlmError),
    #[error("judged validation returned a malformed verdict: {0}")]
    BadJudgment(String),
    #[error("route has no edges to reason over")]
    EmptyRoute,
}

/// One generated question/answer pair tied to the route that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoTQAPair {
    pub question: String,
    pub answer: String,
    pub route: ReasoningRoute,
    pub step_count: usize,
}

#[derive(Debug, Clone)]
pub struct QaConfig {
    /// How many pairs a set should end up with.
    pub target_count: usize,
    /// Maximum round-robin passes over the routes.
    pub max_rounds: usize,
    pub question_temperature: f64,
    pub answer_temperature: f64,
    /// Few-shot example inlined into the question prompt.
    pub example: String,
    /// Use model-judged validation instead of the builtin heuristics.
    pub judge: bool,
}

pub const DEFAULT_QA_EXAMPLE: &str = "Reasoning steps:\n1. the cup has a handle\n2. the handle makes it easy to carry\nQuestion: Is the cup easy to carry?";

impl Default for QaConfig {
    fn default() -> Self {
        QaConfig {
            target_count: 20,
            max_rounds: 3,
            question_temperature: 0.7,
            answer_temperature: 0.0,
            example: DEFAULT_QA_EXAMPLE.to_string(),
            judge: false,
        }
    }
}

/// Renders a route as numbered reasoning steps, one line per edge:
/// `1. Kita is close to Bocchi`.
pub fn render_steps(route: &ReasoningRoute) -> Result<String, QaError> {
    if route.is_empty() {
        return Err(QaError::EmptyRoute);
    }
    let nodes = route.nodes();
    let out = route
        .relations()
        .iter()
        .enumerate()
        .map(|(i, rel)| {
            format!(
                "{}. {} {} {}",
                i + 1,
                nodes[i].as_str(),
                rel,
                nodes[i + 1].as_str()
            )
        })
        .collect::<Vec<_>>()
        .join("\n");
    Ok(out)
}

/// Counts sentences: a terminator (`.`, `!`, `?`) followed by whitespace or
/// end of text closes a sentence. Terminators inside `<...>` spans are
/// ignored, and trailing unterminated text counts as one more sentence.
pub fn count_steps(text: &str) -> usize {
    let chars: Vec<char> = text.chars().collect();
    let mut count = 0;
    let mut inside_token = false;
    let mut pending = false;
    for (i, &c) in chars.iter().enumerate() {
        match c {
            '<' if !inside_token => {
                inside_token = true;
                pending = true;
            }
            '>' if inside_token => {
                inside_token = false;
                pending = true;
            }
            '.' | '!' | '?' if !inside_token => {
                if chars.get(i + 1).is_none_or(|n| n.is_whitespace()) {
                    count += 1;
                    pending = false;
                } else {
                    pending = true;
                }
            }
            c if c.is_whitespace() => {}
            _ => pending = true,
        }
    }
    count + usize::from(pending)
}

fn knowledge_text(knowledge: &TextualKnowledge) -> String {
    let mut parts = Vec::new();
    if !knowledge.relational.trim().is_empty() {
        parts.push(knowledge.relational.trim());
    }
    if !knowledge.attribute.trim().is_empty() {
        parts.push(knowledge.attribute.trim());
    }
    parts.join("\n")
}

pub fn generate_question(
    client: &LlmClient,
    templates: &TemplateSet,
    route: &ReasoningRoute,
    knowledge: &TextualKnowledge,
    config: &QaConfig,
) -> Result<String, QaError> {
    let prompt = templates.render(
        TemplateKind::Question,
        &[
            ("steps", &render_steps(route)?),
            ("knowledge", &knowledge_text(knowledge)),
            ("example", &config.example),
        ],
    )?;
    let request = ChatRequest::new(
        "",
        vec![UserPart::Text(prompt)],
        config.question_temperature,
        "question",
    )?;
    Ok(client.complete(&request)?.content.trim().to_string())
}

pub fn generate_answer(
    client: &LlmClient,
    templates: &TemplateSet,
    route: &ReasoningRoute,
    question: &str,
    config: &QaConfig,
) -> Result<String, QaError> {
    let prompt = templates.render(
        TemplateKind::Answer,
        &[("steps", &render_steps(route)?), ("question", question)],
    )?;
    let request = ChatRequest::new(
        "",
        vec![UserPart::Text(prompt)],
        config.answer_temperature,
        "answer",
    )?;
    Ok(client.complete(&request)?.content.trim().to_string())
}

/// The four validation verdicts: does the answer address the question, is
/// the logic sound, does it reason step by step, and is the overall quality
/// satisfactory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairValidation {
    pub accuracy: bool,
    pub logic: bool,
    pub reason: bool,
    pub quality: bool,
}

impl PairValidation {
    pub fn all(&self) -> bool {
        self.accuracy && self.logic && self.reason && self.quality
    }
}

fn mention_position(answer_lower: &str, entity: &str) -> Option<usize> {
    let core = entity.trim_start_matches('<').trim_end_matches('>');
    if core.is_empty() {
        return None;
    }
    answer_lower.find(&core.to_lowercase())
}

/// Builtin heuristic validation of a pair against its route.
///
/// Accuracy: the answer is non-empty and mentions at least one route entity.
/// Logic: among consecutive route entities that both appear, fewer than two
/// pairs appear in reversed order of first mention. Reason: the answer has
/// at least two sentences. Quality: all of the above.
pub fn validate_pair(pair: &CoTQAPair) -> PairValidation {
    let answer_lower = pair.answer.to_lowercase();
    let nodes = pair.route.nodes();
    let mentioned = nodes
        .iter()
        .map(|n| mention_position(&answer_lower, n.as_str()))
        .collect::<Vec<_>>();
    let accuracy =
        !pair.answer.trim().is_empty() && mentioned.iter().any(|m| m.is_some());
    let mut violations = 0;
    for window in mentioned.windows(2) {
        if let (Some(a), Some(b)) = (window[0], window[1]) {
            if a > b {
                violations += 1;
            }
        }
    }
    let logic = violations < 2;
    let reason = count_steps(&pair.answer) >= 2;
    PairValidation {
        accuracy,
        logic,
        reason,
        quality: accuracy && logic && reason,
    }
}

fn parse_verdict(value: &serde_json::Value, key: &str) -> Result<bool, QaError> {
    let raw = value
        .get(key)
        .and_then(|v| v.as_str())
        .ok_or_else(|| QaError::BadJudgment(format!("missing {key:?}")))?;
    match raw.trim().to_lowercase().as_str() {
        "yes" => Ok(true),
        "no" => Ok(false),
        other => Err(QaError::BadJudgment(format!(
            "{key:?} must be Yes or No, got {other:?}"
        ))),
    }
}

/// Model-judged validation: asks the validator prompt for the four Yes/No
/// verdicts and parses them.
pub fn validate_pair_judged(
    client: &LlmClient,
    templates: &TemplateSet,
    pair: &CoTQAPair,
) -> Result<PairValidation, QaError> {
    let prompt = templates.render(
        TemplateKind::PairValidation,
        &[("question", &pair.question), ("answer", &pair.answer)],
    )?;
    let request = ChatRequest::new("", vec![UserPart::Text(prompt)], 0.0, "judge_pair")?
        .expecting_json();
    let response = client.complete(&request)?;
    let value = crate::llm::extract_json(&response.content)?;
    let accuracy = parse_verdict(&value, "accuracy")?;
    let logic = parse_verdict(&value, "logic")?;
    let reason = parse_verdict(&value, "reason")?;
    let quality = parse_verdict(&value, "quality")?;
    Ok(PairValidation {
        accuracy,
        logic,
        reason,
        quality,
    })
}

/// Outcome of a generation run, including how far short of the target the
/// usable pairs fell.
#[derive(Debug, Clone, Serialize)]
pub struct GeneratedPairs {
    pub pairs: Vec<CoTQAPair>,
    pub requested: usize,
    pub shortfall: usize,
    pub rounds_run: usize,
    pub rejected: usize,
    pub duplicates: usize,
    pub skipped_routes: usize,
}

fn route_key(route: &ReasoningRoute) -> Vec<String> {
    route
        .alternating()
        .iter()
        .map(|item| match item {
            crate::routes::RouteItem::Node(n) => format!("n:{n}"),
            crate::routes::RouteItem::Relation(r) => format!("r:{r}"),
        })
        .collect()
}

/// Round-robin generation over the routes until the target count is met,
/// the round budget runs out, or a full pass adds nothing new. Routes with
/// no edges are skipped, failed validations are dropped, and duplicate
/// (question, route) pairs are not kept.
pub fn generate_pairs(
    client: &LlmClient,
    templates: &TemplateSet,
    routes: &[ReasoningRoute],
    knowledge: &TextualKnowledge,
    config: &QaConfig,
) -> Result<GeneratedPairs, QaError> {
    let eligible: Vec<&ReasoningRoute> = routes.iter().filter(|r| !r.is_empty()).collect();
    let skipped_routes = routes.len() - eligible.len();
    let mut pairs: Vec<CoTQAPair> = Vec::new();
    let mut seen: BTreeSet<(String, Vec<String>)> = BTreeSet::new();
    let mut rejected = 0;
    let mut duplicates = 0;
    let mut rounds_run = 0;
    'rounds: for _ in 0..config.max_rounds {
        if pairs.len() >= config.target_count || eligible.is_empty() {
            break;
        }
        rounds_run += 1;
        let mut added_this_round = 0;
        for route in &eligible {
            if pairs.len() >= config.target_count {
                break 'rounds;
            }
            let question = generate_question(client, templates, route, knowledge, config)?;
            let answer = generate_answer(client, templates, route, &question, config)?;
            let pair = CoTQAPair {
                step_count: count_steps(&answer),
                question,
                answer,
                route: (*route).clone(),
            };
            let verdict = if config.judge {
                validate_pair_judged(client, templates, &pair)?
            } else {
                validate_pair(&pair)
            };
            if !verdict.quality {
                rejected += 1;
                continue;
            }
            if !seen.insert((pair.question.clone(), route_key(&pair.route))) {
                duplicates += 1;
                continue;
            }
            pairs.push(pair);
            added_this_round += 1;
        }
        if added_this_round == 0 {
            break;
        }
    }
    Ok(GeneratedPairs {
        requested: config.target_count,
        shortfall: config.target_count.saturating_sub(pairs.len()),
        rounds_run,
        rejected,
        duplicates,
        skipped_routes,
        pairs,
    })
}
