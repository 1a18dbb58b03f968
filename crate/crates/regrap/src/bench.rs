//! Benchmark definitions, answer-key grading, and score aggregation.
//!
//! A benchmark set mixes closed items (multiple choice, true/false, fill in
//! the blank, and closed descriptive questions with a text or key-point
//! answer) with open descriptive items that are scored by a judge model.
//! Closed grading is deterministic and never calls a model; key-point
//! coverage and open-ended scoring have judged variants that do.

use std::collections::BTreeMap;
use std::fmt;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::llm::{ChatRequest, LlmClient, LlmError, UserPart};
use crate::rat::Rat;
use crate::templates::{TemplateError, TemplateKind, TemplateSet};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("item {0:?} is not a closed item")]
    NotClosed(String),
    #[error("transcript has no response for item {0:?}")]
    MissingResponse(String),
    #[error("judge output is unusable: {0}")]
    BadJudgeScore(String),
    #[error("point match judgment must be Yes or No, got {0:?}")]
    BadPointMatch(String),
    #[error("no closed outcomes to aggregate")]
    EmptyReport,
    #[error("cannot pool zero reports")]
    NothingToPool,
    #[error("transcript line {line}: {detail}")]
    BadTranscript { line: usize, detail: String },
    #[error(transparent)]
    Template(#[from] TemplateError),
    #[error(transparent)]
    Llm(#[from] LlmError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ItemKind {
    MultipleChoice,
    TrueFalse,
    FillBlank,
    DescriptiveClosed,
    DescriptiveOpen,
    FullDescription,
}

impl ItemKind {
    pub const ALL: [ItemKind; 6] = [
        ItemKind::MultipleChoice,
        ItemKind::TrueFalse,
        ItemKind::FillBlank,
        ItemKind::DescriptiveClosed,
        ItemKind::DescriptiveOpen,
        ItemKind::FullDescription,
    ];

    pub fn is_closed(self) -> bool {
        matches!(
            self,
            ItemKind::MultipleChoice
                | ItemKind::TrueFalse
                | ItemKind::FillBlank
                | ItemKind::DescriptiveClosed
        )
    }

    fn label(self) -> &'static str {
        match self {
            ItemKind::MultipleChoice => "multiple_choice",
            ItemKind::TrueFalse => "true_false",
            ItemKind::FillBlank => "fill_blank",
            ItemKind::DescriptiveClosed => "descriptive_closed",
            ItemKind::DescriptiveOpen => "descriptive_open",
            ItemKind::FullDescription => "full_description",
        }
    }
}

impl fmt::Display for ItemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Difficulty {
    Simple,
    Difficult,
}

impl fmt::Display for Difficulty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Difficulty::Simple => "simple",
            Difficulty::Difficult => "difficult",
        })
    }
}

/// Answer key, shaped by the item kind.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Key {
    /// Multiple choice: the correct option letter.
    Letter(char),
    /// True/false.
    Boolean(bool),
    /// Fill in the blank or closed descriptive: normalized-equality text,
    /// with '/'-separated acceptable alternatives.
    Text(String),
    /// Closed descriptive: key points that must all be covered.
    Points(Vec<String>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkItem {
    pub id: String,
    pub kind: ItemKind,
    pub difficulty: Option<Difficulty>,
    pub question: String,
    pub options: Vec<String>,
    pub key: Option<Key>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ItemRepr {
    id: String,
    kind: ItemKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    difficulty: Option<Difficulty>,
    question: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    options: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    key: Option<serde_json::Value>,
}

fn key_from_value(
    kind: ItemKind,
    value: Option<serde_json::Value>,
) -> Result<Option<Key>, String> {
    let value = match value {
        None | Some(serde_json::Value::Null) => {
            return if kind.is_closed() {
                Err(format!("{kind} items need an answer key"))
            } else {
                Ok(None)
            };
        }
        Some(v) => v,
    };
    if !kind.is_closed() {
        return Err(format!("{kind} items take no answer key"));
    }
    let key = match kind {
        ItemKind::MultipleChoice => {
            let letter = value
                .as_str()
                .map(str::trim)
                .filter(|s| s.len() == 1)
                .and_then(|s| s.chars().next())
                .map(|c| c.to_ascii_uppercase())
                .filter(|c| ('A'..='D').contains(c))
                .ok_or("multiple_choice key must be a letter A-D")?;
            Key::Letter(letter)
        }
        ItemKind::TrueFalse => match &value {
            serde_json::Value::Bool(b) => Key::Boolean(*b),
            serde_json::Value::String(s) => match s.trim().to_lowercase().as_str() {
                "true" => Key::Boolean(true),
                "false" => Key::Boolean(false),
                other => return Err(format!("true_false key must be a boolean, got {other:?}")),
            },
            _ => return Err("true_false key must be a boolean".into()),
        },
        ItemKind::FillBlank => Key::Text(
            value
                .as_str()
                .ok_or("fill_blank key must be a string")?
                .to_string(),
        ),
        ItemKind::DescriptiveClosed => match &value {
            serde_json::Value::String(s) => Key::Text(s.clone()),
            serde_json::Value::Array(points) => {
                let texts: Option<Vec<String>> = points
                    .iter()
                    .map(|p| p.as_str().map(str::to_string))
                    .collect();
                let texts = texts.ok_or("key points must be strings")?;
                if texts.is_empty() {
                    return Err("key point list must be non-empty".into());
                }
                Key::Points(texts)
            }
            _ => return Err("descriptive_closed key must be text or a point list".into()),
        },
        _ => unreachable!("open kinds handled above"),
    };
    Ok(Some(key))
}

impl<'de> Deserialize<'de> for BenchmarkItem {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = ItemRepr::deserialize(deserializer)?;
        let key = key_from_value(repr.kind, repr.key).map_err(D::Error::custom)?;
        if repr.kind == ItemKind::MultipleChoice && repr.options.len() < 2 {
            return Err(D::Error::custom("multiple_choice items need options"));
        }
        Ok(BenchmarkItem {
            id: repr.id,
            kind: repr.kind,
            difficulty: repr.difficulty,
            question: repr.question,
            options: repr.options,
            key,
        })
    }
}

impl Serialize for BenchmarkItem {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let key = self.key.as_ref().map(|k| match k {
            Key::Letter(c) => serde_json::Value::String(c.to_string()),
            Key::Boolean(b) => serde_json::Value::Bool(*b),
            Key::Text(t) => serde_json::Value::String(t.clone()),
            Key::Points(p) => serde_json::json!(p),
        });
        ItemRepr {
            id: self.id.clone(),
            kind: self.kind,
            difficulty: self.difficulty,
            question: self.question.clone(),
            options: self.options.clone(),
            key,
        }
        .serialize(serializer)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkSet {
    pub set_name: String,
    pub items: Vec<BenchmarkItem>,
}

/// Kind, expected total, and expected simple count where the kind splits by
/// difficulty.
type CompositionRow = (ItemKind, usize, Option<usize>);

/// The intended composition of a full benchmark set.
const EXPECTED_COMPOSITION: [CompositionRow; 6] = [
    (ItemKind::MultipleChoice, 40, Some(20)),
    (ItemKind::TrueFalse, 15, Some(5)),
    (ItemKind::FillBlank, 10, Some(5)),
    (ItemKind::DescriptiveClosed, 3, Some(1)),
    (ItemKind::DescriptiveOpen, 5, None),
    (ItemKind::FullDescription, 1, None),
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "deviation", rename_all = "snake_case")]
pub enum CompositionDeviation {
    Total {
        kind: ItemKind,
        expected: usize,
        actual: usize,
    },
    /// Reported only when the kind total matches but the simple/difficult
    /// split does not.
    Split {
        kind: ItemKind,
        expected_simple: usize,
        actual_simple: usize,
    },
}

/// Compares a set against the expected composition. An empty result means
/// the set is complete; an empty set yields exactly one total deviation per
/// kind.
pub fn validate_composition(set: &BenchmarkSet) -> Vec<CompositionDeviation> {
    let mut deviations = Vec::new();
    for (kind, expected_total, split) in EXPECTED_COMPOSITION {
        let of_kind: Vec<&BenchmarkItem> =
            set.items.iter().filter(|i| i.kind == kind).collect();
        if of_kind.len() != expected_total {
            deviations.push(CompositionDeviation::Total {
                kind,
                expected: expected_total,
                actual: of_kind.len(),
            });
            continue;
        }
        if let Some(expected_simple) = split {
            let actual_simple = of_kind
                .iter()
                .filter(|i| i.difficulty == Some(Difficulty::Simple))
                .count();
            if actual_simple != expected_simple {
                deviations.push(CompositionDeviation::Split {
                    kind,
                    expected_simple,
                    actual_simple,
                });
            }
        }
    }
    deviations
}

fn normalize_text(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut last_space = true;
    for c in text.chars() {
        if c.is_alphanumeric() {
            out.extend(c.to_lowercase());
            last_space = false;
        } else if !last_space {
            out.push(' ');
            last_space = true;
        }
    }
    out.trim_end().to_string()
}

fn text_key_matches(key: &str, response: &str) -> bool {
    let normalized = normalize_text(response);
    key.split('/')
        .any(|alternative| normalize_text(alternative) == normalized)
}

fn extract_mc_letter(response: &str) -> Option<char> {
    let lower = response.to_lowercase();
    let bytes = lower.as_bytes();
    let mut explicit: Vec<usize> = Vec::new();
    for pattern in ["answer:", "answer is"] {
        let mut from = 0;
        while let Some(at) = lower[from..].find(pattern) {
            explicit.push(from + at + pattern.len());
            from += at + pattern.len();
        }
    }
    explicit.sort_unstable();
    for start in explicit {
        let mut i = start;
        while i < bytes.len() && (bytes[i].is_ascii_whitespace() || bytes[i] == b'*') {
            i += 1;
        }
        if i < bytes.len() && (b'a'..=b'd').contains(&bytes[i]) {
            let isolated = bytes
                .get(i + 1)
                .is_none_or(|next| !next.is_ascii_alphanumeric());
            if isolated {
                return Some(bytes[i].to_ascii_uppercase() as char);
            }
        }
    }
    for token in response.split_whitespace() {
        let stripped = token
            .trim_start_matches('(')
            .trim_end_matches(['.', ')', ':', ',', '?']);
        let mut chars = stripped.chars();
        if let (Some(c), None) = (chars.next(), chars.next()) {
            if ('A'..='D').contains(&c) {
                return Some(c);
            }
        }
    }
    None
}

fn extract_tf(response: &str) -> Option<bool> {
    for token in response.split_whitespace() {
        let word: String = token
            .chars()
            .filter(|c| c.is_alphanumeric())
            .collect::<String>()
            .to_lowercase();
        match word.as_str() {
            "true" | "yes" | "correct" => return Some(true),
            "false" | "no" | "incorrect" => return Some(false),
            _ => {}
        }
    }
    None
}

const STOPWORDS: &[&str] = &[
    "a", "an", "and", "are", "as", "at", "be", "been", "by", "for", "from", "had", "has", "have",
    "in", "is", "it", "its", "of", "on", "or", "that", "the", "this", "these", "those", "to",
    "was", "were", "with",
];

/// Crude suffix stemmer: strips one of ing/ed/es/s/ly when at least three
/// characters remain, then drops a trailing 'e'.
fn stem(word: &str) -> String {
    let mut out = word.to_string();
    for suffix in ["ing", "ed", "es", "s", "ly"] {
        if let Some(short) = out.strip_suffix(suffix) {
            if short.len() >= 3 {
                out = short.to_string();
                break;
            }
        }
    }
    if out.len() > 3 {
        if let Some(short) = out.strip_suffix('e') {
            out = short.to_string();
        }
    }
    out
}

fn content_stems(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .map(str::to_lowercase)
        .filter(|w| !STOPWORDS.contains(&w.as_str()))
        .map(|w| stem(&w))
        .collect()
}

/// A key point is covered when every content word of the point, after
/// stemming, appears among the response's stemmed words.
pub fn point_covered(point: &str, response: &str) -> bool {
    let response_stems = content_stems(response);
    let point_stems = content_stems(point);
    !point_stems.is_empty() && point_stems.iter().all(|p| response_stems.contains(p))
}

/// Fraction of key points covered by the response, as an exact rational.
pub fn point_score(points: &[String], response: &str) -> Rat {
    if points.is_empty() {
        return Rat::zero();
    }
    let matched = points.iter().filter(|p| point_covered(p, response)).count();
    Rat::from_ratio(matched as i64, points.len() as i64)
}

/// Judged variant of [`point_score`]: each point is put to the model as a
/// Yes/No coverage question.
pub fn point_score_judged(
    client: &LlmClient,
    templates: &TemplateSet,
    points: &[String],
    response: &str,
) -> Result<Rat, BenchError> {
    if points.is_empty() {
        return Ok(Rat::zero());
    }
    let mut matched = 0;
    for point in points {
        let prompt = templates.render(
            TemplateKind::PointMatch,
            &[("point", point.as_str()), ("response", response)],
        )?;
        let request = ChatRequest::new("", vec![UserPart::Text(prompt)], 0.0, "point_match")?;
        let verdict = client.complete(&request)?.content;
        let word: String = verdict
            .split_whitespace()
            .next()
            .unwrap_or("")
            .chars()
            .filter(|c| c.is_alphanumeric())
            .collect::<String>()
            .to_lowercase();
        match word.as_str() {
            "yes" => matched += 1,
            "no" => {}
            _ => return Err(BenchError::BadPointMatch(verdict)),
        }
    }
    Ok(Rat::from_ratio(matched as i64, points.len() as i64))
}

/// Result of grading one closed item.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GradeOutcome {
    pub item_id: String,
    pub kind: ItemKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub difficulty: Option<Difficulty>,
    pub correct: bool,
    /// What the grader extracted from the response, when extraction applies.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extracted: Option<String>,
    /// Set when no answer could be extracted; such items grade incorrect.
    pub flagged: bool,
}

/// Deterministic grading for closed items.
///
/// Multiple choice extracts the chosen letter with three attempts in order:
/// an explicit "Answer: X" / "answer is X" marker, the first isolated
/// capital A-D token, and finally exact normalized equality with an option
/// text. True/false scans for the first decisive word. Fill-in-the-blank
/// and text-keyed descriptive items use normalized equality against the
/// key's '/'-separated alternatives; point-keyed items require every key
/// point to be covered.
pub fn grade_closed(item: &BenchmarkItem, response: &str) -> Result<GradeOutcome, BenchError> {
    let key = match (&item.key, item.kind.is_closed()) {
        (Some(key), true) => key,
        _ => return Err(BenchError::NotClosed(item.id.clone())),
    };
    let mut outcome = GradeOutcome {
        item_id: item.id.clone(),
        kind: item.kind,
        difficulty: item.difficulty,
        correct: false,
        extracted: None,
        flagged: false,
    };
    match key {
        Key::Letter(expected) => {
            let extracted = extract_mc_letter(response).or_else(|| {
                let normalized = normalize_text(response);
                item.options
                    .iter()
                    .position(|option| normalize_text(option) == normalized)
                    .map(|i| (b'A' + i as u8) as char)
            });
            match extracted {
                Some(letter) => {
                    outcome.extracted = Some(letter.to_string());
                    outcome.correct = letter == *expected;
                }
                None => outcome.flagged = true,
            }
        }
        Key::Boolean(expected) => match extract_tf(response) {
            Some(value) => {
                outcome.extracted = Some(value.to_string());
                outcome.correct = value == *expected;
            }
            None => outcome.flagged = true,
        },
        Key::Text(expected) => {
            outcome.extracted = Some(normalize_text(response));
            outcome.correct = text_key_matches(expected, response);
        }
        Key::Points(points) => {
            let covered = points.iter().filter(|p| point_covered(p, response)).count();
            outcome.extracted = Some(format!("{covered}/{} points", points.len()));
            outcome.correct = covered == points.len();
        }
    }
    Ok(outcome)
}

/// One line of a model transcript: the item answered and the raw response.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptRecord {
    pub item_id: String,
    pub response: String,
}

/// Parses a JSONL transcript.
pub fn parse_transcript(text: &str) -> Result<Vec<TranscriptRecord>, BenchError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record =
            serde_json::from_str(line).map_err(|e| BenchError::BadTranscript {
                line: i + 1,
                detail: e.to_string(),
            })?;
        out.push(record);
    }
    Ok(out)
}

/// Grades every closed item in the set against the transcript. Responses to
/// open items are ignored here; a missing response to a closed item is an
/// error.
pub fn grade_set(
    set: &BenchmarkSet,
    transcript: &[TranscriptRecord],
) -> Result<Vec<GradeOutcome>, BenchError> {
    let by_id: BTreeMap<&str, &str> = transcript
        .iter()
        .map(|r| (r.item_id.as_str(), r.response.as_str()))
        .collect();
    let mut outcomes = Vec::new();
    for item in set.items.iter().filter(|i| i.kind.is_closed()) {
        let response = by_id
            .get(item.id.as_str())
            .ok_or_else(|| BenchError::MissingResponse(item.id.clone()))?;
        outcomes.push(grade_closed(item, response)?);
    }
    Ok(outcomes)
}

/// Renders the reference-answer prompt for an open item and returns the
/// model's reference answer.
pub fn generate_reference(
    client: &LlmClient,
    templates: &TemplateSet,
    question: &str,
    knowledge: &str,
) -> Result<String, BenchError> {
    let prompt = templates.render(
        TemplateKind::Reference,
        &[("question", question), ("knowledge", knowledge)],
    )?;
    let request = ChatRequest::new("", vec![UserPart::Text(prompt)], 0.0, "reference")?;
    Ok(client.complete(&request)?.content.trim().to_string())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JudgeScore {
    pub score: u8,
    pub explanation: String,
}

/// Asks the judge to assess an answer against the reference and parses the
/// {"Explanation", "Score"} verdict; the score must be an integer 1 to 10.
pub fn judge_score(
    client: &LlmClient,
    templates: &TemplateSet,
    question: &str,
    knowledge: &str,
    reference: &str,
    answer: &str,
) -> Result<JudgeScore, BenchError> {
    let prompt = templates.render(
        TemplateKind::Assessment,
        &[
            ("question", question),
            ("knowledge", knowledge),
            ("reference", reference),
            ("answer", answer),
        ],
    )?;
    let request =
        ChatRequest::new("", vec![UserPart::Text(prompt)], 0.0, "assessment")?.expecting_json();
    let content = client.complete(&request)?.content;
    let value = crate::llm::extract_json(&content)?;
    let score = value
        .get("Score")
        .and_then(|v| v.as_i64())
        .ok_or_else(|| BenchError::BadJudgeScore("missing integer \"Score\"".into()))?;
    if !(1..=10).contains(&score) {
        return Err(BenchError::BadJudgeScore(format!(
            "score {score} outside 1-10"
        )));
    }
    let explanation = value
        .get("Explanation")
        .and_then(|v| v.as_str())
        .unwrap_or("")
        .to_string();
    Ok(JudgeScore {
        score: score as u8,
        explanation,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KindCell {
    pub kind: ItemKind,
    pub total: usize,
    pub correct: usize,
    pub accuracy: Rat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DifficultyCell {
    pub difficulty: Difficulty,
    pub total: usize,
    pub correct: usize,
    pub accuracy: Rat,
}

/// Aggregated scores: pooled closed accuracy (total correct over total
/// graded), per-kind and per-difficulty cells, and optional point and judge
/// averages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub closed_total: usize,
    pub closed_correct: usize,
    pub weighted_accuracy: Rat,
    pub flagged: usize,
    pub by_kind: Vec<KindCell>,
    pub by_difficulty: Vec<DifficultyCell>,
    pub point_count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub avg_point_score: Option<Rat>,
    pub judge_count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub avg_judge_score: Option<Rat>,
}

fn ratio(correct: usize, total: usize) -> Rat {
    if total == 0 {
        Rat::zero()
    } else {
        Rat::from_ratio(correct as i64, total as i64)
    }
}

/// Builds a report from grading outcomes plus any point scores and judge
/// scores. At least one closed outcome is required.
pub fn aggregate(
    closed: &[GradeOutcome],
    point_scores: &[Rat],
    judge_scores: &[JudgeScore],
) -> Result<ScoreReport, BenchError> {
    if closed.is_empty() {
        return Err(BenchError::EmptyReport);
    }
    let closed_total = closed.len();
    let closed_correct = closed.iter().filter(|o| o.correct).count();
    let flagged = closed.iter().filter(|o| o.flagged).count();
    let mut by_kind = Vec::new();
    for kind in ItemKind::ALL.into_iter().filter(|k| k.is_closed()) {
        let of_kind: Vec<&GradeOutcome> = closed.iter().filter(|o| o.kind == kind).collect();
        if of_kind.is_empty() {
            continue;
        }
        let correct = of_kind.iter().filter(|o| o.correct).count();
        by_kind.push(KindCell {
            kind,
            total: of_kind.len(),
            correct,
            accuracy: ratio(correct, of_kind.len()),
        });
    }
    let mut by_difficulty = Vec::new();
    for difficulty in [Difficulty::Simple, Difficulty::Difficult] {
        let of_diff: Vec<&GradeOutcome> = closed
            .iter()
            .filter(|o| o.difficulty == Some(difficulty))
            .collect();
        if of_diff.is_empty() {
            continue;
        }
        let correct = of_diff.iter().filter(|o| o.correct).count();
        by_difficulty.push(DifficultyCell {
            difficulty,
            total: of_diff.len(),
            correct,
            accuracy: ratio(correct, of_diff.len()),
        });
    }
    let avg_point_score = if point_scores.is_empty() {
        None
    } else {
        let sum = point_scores
            .iter()
            .cloned()
            .fold(Rat::zero(), |acc, s| acc + s);
        Some(sum / Rat::from_int(point_scores.len() as i64))
    };
    let avg_judge_score = if judge_scores.is_empty() {
        None
    } else {
        let sum: i64 = judge_scores.iter().map(|j| i64::from(j.score)).sum();
        Some(Rat::from_ratio(sum, judge_scores.len() as i64))
    };
    Ok(ScoreReport {
        closed_total,
        closed_correct,
        weighted_accuracy: ratio(closed_correct, closed_total),
        flagged,
        by_kind,
        by_difficulty,
        point_count: point_scores.len(),
        avg_point_score,
        judge_count: judge_scores.len(),
        avg_judge_score,
    })
}

impl ScoreReport {
    /// Pools reports exactly: counts add, and every average is recomputed
    /// from the pooled counts, so pooling per-set reports equals grading the
    /// concatenated transcripts.
    pub fn pool(reports: &[ScoreReport]) -> Result<ScoreReport, BenchError> {
        if reports.is_empty() {
            return Err(BenchError::NothingToPool);
        }
        let mut kind_counts: BTreeMap<ItemKind, (usize, usize)> = BTreeMap::new();
        let mut diff_counts: BTreeMap<Difficulty, (usize, usize)> = BTreeMap::new();
        let mut closed_total = 0;
        let mut closed_correct = 0;
        let mut flagged = 0;
        let mut point_count = 0;
        let mut point_sum = Rat::zero();
        let mut judge_count = 0;
        let mut judge_sum = Rat::zero();
        for report in reports {
            closed_total += report.closed_total;
            closed_correct += report.closed_correct;
            flagged += report.flagged;
            for cell in &report.by_kind {
                let slot = kind_counts.entry(cell.kind).or_default();
                slot.0 += cell.total;
                slot.1 += cell.correct;
            }
            for cell in &report.by_difficulty {
                let slot = diff_counts.entry(cell.difficulty).or_default();
                slot.0 += cell.total;
                slot.1 += cell.correct;
            }
            if let Some(avg) = &report.avg_point_score {
                point_count += report.point_count;
                point_sum = point_sum + avg.clone() * Rat::from_int(report.point_count as i64);
            }
            if let Some(avg) = &report.avg_judge_score {
                judge_count += report.judge_count;
                judge_sum = judge_sum + avg.clone() * Rat::from_int(report.judge_count as i64);
            }
        }
        if closed_total == 0 {
            return Err(BenchError::EmptyReport);
        }
        let by_kind = kind_counts
            .into_iter()
            .map(|(kind, (total, correct))| KindCell {
                kind,
                total,
                correct,
                accuracy: ratio(correct, total),
            })
            .collect();
        let by_difficulty = diff_counts
            .into_iter()
            .map(|(difficulty, (total, correct))| DifficultyCell {
                difficulty,
                total,
                correct,
                accuracy: ratio(correct, total),
            })
            .collect();
        Ok(ScoreReport {
            closed_total,
            closed_correct,
            weighted_accuracy: ratio(closed_correct, closed_total),
            flagged,
            by_kind,
            by_difficulty,
            point_count,
            avg_point_score: (point_count > 0)
                .then(|| point_sum / Rat::from_int(point_count as i64)),
            judge_count,
            avg_judge_score: (judge_count > 0)
                .then(|| judge_sum / Rat::from_int(judge_count as i64)),
        })
    }

    /// Fixed-width text table of the report.
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        let row = |out: &mut String, label: &str, total: usize, correct: usize, acc: &Rat| {
            out.push_str(&format!(
                "{label:<22} {total:>6} {correct:>8} {:>9}\n",
                acc.to_decimal_string(3)
            ));
        };
        out.push_str(&format!(
            "{:<22} {:>6} {:>8} {:>9}\n",
            "section", "total", "correct", "accuracy"
        ));
        for cell in &self.by_kind {
            row(&mut out, cell.kind.label(), cell.total, cell.correct, &cell.accuracy);
        }
        for cell in &self.by_difficulty {
            let label = format!("({})", cell.difficulty);
            row(&mut out, &label, cell.total, cell.correct, &cell.accuracy);
        }
        row(
            &mut out,
            "closed overall",
            self.closed_total,
            self.closed_correct,
            &self.weighted_accuracy,
        );
        if self.flagged > 0 {
            out.push_str(&format!("flagged responses: {}\n", self.flagged));
        }
        if let Some(avg) = &self.avg_point_score {
            out.push_str(&format!(
                "point coverage ({} scored): {}\n",
                self.point_count,
                avg.to_decimal_string(3)
            ));
        }
        if let Some(avg) = &self.avg_judge_score {
            out.push_str(&format!(
                "judge score ({} scored): {}\n",
                self.judge_count,
                avg.to_decimal_string(3)
            ));
        }
        out
    }
}
