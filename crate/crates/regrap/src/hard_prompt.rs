//! Hard graph prompts: a reasoning chain rendered as natural language over
//! fresh special tokens, plus the exact embedding-head bookkeeping those
//! tokens require.
//!
//! A chain of N triples introduces N+1 entity tokens `<name>` and N relation
//! tokens `<Relation_i>`, so the language model head grows by exactly 2N+1
//! columns. Ids are handed out contiguously starting at the base vocabulary
//! size: entities first (chain order), then relations.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::kg::ChainSubgraph;

#[derive(Debug, Error)]
pub enum HardPromptError {
    #[error("base vocabulary size must be at least 1")]
    EmptyBaseVocab,
    #[error("reasoning token {0:?} collides with another reasoning token")]
    TokenCollision(String),
    #[error("embedding head size overflows: {0} + {1} columns")]
    HeadOverflow(usize, usize),
}

/// The reasoning tokens minted for one chain, appended after a base
/// vocabulary of `base_size` ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReasoningVocab {
    base_size: usize,
    entity_tokens: Vec<String>,
    relation_tokens: Vec<String>,
    ids: BTreeMap<String, usize>,
}

/// Exports as `{"tokens": [{"text", "id", "kind"}], "base_vocab_size"}` so a
/// downstream trainer can resize its tokenizer and head from one document.
impl Serialize for ReasoningVocab {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        #[derive(Serialize)]
        struct TokenRow<'a> {
            text: &'a str,
            id: usize,
            kind: &'static str,
        }
        let rows: Vec<TokenRow<'_>> = self
            .entity_tokens
            .iter()
            .map(|t| (t, "entity"))
            .chain(self.relation_tokens.iter().map(|t| (t, "relation")))
            .map(|(text, kind)| TokenRow {
                text,
                id: self.ids[text],
                kind,
            })
            .collect();
        let mut state = serializer.serialize_struct("ReasoningVocab", 2)?;
        state.serialize_field("tokens", &rows)?;
        state.serialize_field("base_vocab_size", &self.base_size)?;
        state.end()
    }
}

impl ReasoningVocab {
    pub fn new(chain: &ChainSubgraph, base_size: usize) -> Result<Self, HardPromptError> {
        if base_size == 0 {
            return Err(HardPromptError::EmptyBaseVocab);
        }
        let entity_tokens: Vec<String> = chain
            .entities()
            .iter()
            .map(|e| format!("<{}>", e.as_str()))
            .collect();
        let relation_tokens: Vec<String> = (1..=chain.len())
            .map(|i| format!("<Relation_{i}>"))
            .collect();
        let mut ids = BTreeMap::new();
        for (offset, token) in entity_tokens
            .iter()
            .chain(&relation_tokens)
            .enumerate()
        {
            if ids.insert(token.clone(), base_size + offset).is_some() {
                return Err(HardPromptError::TokenCollision(token.clone()));
            }
        }
        Ok(ReasoningVocab {
            base_size,
            entity_tokens,
            relation_tokens,
            ids,
        })
    }

    pub fn base_size(&self) -> usize {
        self.base_size
    }

    /// Entity token texts in chain order.
    pub fn entity_tokens(&self) -> &[String] {
        &self.entity_tokens
    }

    /// Relation token texts in chain order.
    pub fn relation_tokens(&self) -> &[String] {
        &self.relation_tokens
    }

    /// 2N+1 for a chain of N triples.
    pub fn new_token_count(&self) -> usize {
        self.entity_tokens.len() + self.relation_tokens.len()
    }

    pub fn id_of(&self, token: &str) -> Option<usize> {
        self.ids.get(token).copied()
    }

    pub fn token_for_id(&self, id: usize) -> Option<&str> {
        let offset = id.checked_sub(self.base_size)?;
        self.entity_tokens
            .iter()
            .chain(&self.relation_tokens)
            .nth(offset)
            .map(String::as_str)
    }

    fn tokens_by_length_desc(&self) -> Vec<(&str, usize)> {
        let mut all: Vec<(&str, usize)> = self
            .ids
            .iter()
            .map(|(t, id)| (t.as_str(), *id))
            .collect();
        all.sort_by(|a, b| b.0.len().cmp(&a.0.len()).then(a.0.cmp(b.0)));
        all
    }
}

/// A rendered hard prompt plus any reasoning tokens whose description came
/// up empty (they render as "<X> is ." and are worth fixing upstream).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RenderReport {
    pub prompt: String,
    pub empty_entity_descriptions: Vec<String>,
    pub empty_relation_descriptions: Vec<String>,
}

/// Renders the chain into the hard prompt: one "share a" clause per triple,
/// then one description sentence per entity and per relation.
pub fn render_prompt(chain: &ChainSubgraph) -> RenderReport {
    let clauses: Vec<String> = chain
        .triples()
        .iter()
        .enumerate()
        .map(|(i, t)| {
            format!(
                "<{}> and <{}> share a <Relation_{}>",
                t.head.as_str(),
                t.tail.as_str(),
                i + 1
            )
        })
        .collect();
    let mut empty_entities = Vec::new();
    let entity_sentences: Vec<String> = chain
        .entities()
        .iter()
        .zip(chain.entity_descriptions())
        .map(|(entity, desc)| {
            if desc.is_empty() {
                empty_entities.push(format!("<{}>", entity.as_str()));
            }
            format!("<{}> is {desc}.", entity.as_str())
        })
        .collect();
    let mut empty_relations = Vec::new();
    let relation_sentences: Vec<String> = chain
        .relation_descriptions()
        .iter()
        .enumerate()
        .map(|(i, desc)| {
            if desc.is_empty() {
                empty_relations.push(format!("<Relation_{}>", i + 1));
            }
            format!("<Relation_{}> is {desc}.", i + 1)
        })
        .collect();
    let prompt = format!(
        "{}. {} {}",
        clauses.join(", "),
        entity_sentences.join(" "),
        relation_sentences.join(" ")
    );
    RenderReport {
        prompt,
        empty_entity_descriptions: empty_entities,
        empty_relation_descriptions: empty_relations,
    }
}

/// Exact column accounting for widening a `rows x cols_before` output head
/// to cover the chain's reasoning tokens.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HeadExpansion {
    pub rows: usize,
    pub cols_before: usize,
    pub cols_after: usize,
    pub new_token_ids: Vec<usize>,
}

pub fn expand_head(
    rows: usize,
    cols_before: usize,
    chain: &ChainSubgraph,
) -> Result<HeadExpansion, HardPromptError> {
    let added = 2 * chain.len() + 1;
    let cols_after = cols_before
        .checked_add(added)
        .ok_or(HardPromptError::HeadOverflow(cols_before, added))?;
    Ok(HeadExpansion {
        rows,
        cols_before,
        cols_after,
        new_token_ids: (cols_before..cols_after).collect(),
    })
}

const FNV_OFFSET: u64 = 14695981039346656037;
const FNV_PRIME: u64 = 1099511628211;

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash = FNV_OFFSET;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(FNV_PRIME);
    }
    hash
}

/// Stable toy tokenizer: reasoning tokens match verbatim (earliest match
/// wins, longest at a tie), everything between matches splits on whitespace
/// and hashes into the base vocabulary.
pub fn tokenize_with_vocab(text: &str, vocab: &ReasoningVocab) -> Vec<usize> {
    let tokens = vocab.tokens_by_length_desc();
    let mut out = Vec::new();
    let mut rest = text;
    while !rest.is_empty() {
        let mut best: Option<(usize, usize, usize)> = None;
        for (token, id) in &tokens {
            if let Some(at) = rest.find(token) {
                let candidate = (at, token.len(), *id);
                best = match best {
                    None => Some(candidate),
                    Some((b_at, b_len, _)) if at < b_at || (at == b_at && token.len() > b_len) => {
                        Some(candidate)
                    }
                    same => same,
                };
            }
        }
        match best {
            Some((at, len, id)) => {
                hash_words(&rest[..at], vocab.base_size, &mut out);
                out.push(id);
                rest = &rest[at + len..];
            }
            None => {
                hash_words(rest, vocab.base_size, &mut out);
                break;
            }
        }
    }
    out
}

fn hash_words(span: &str, base: usize, out: &mut Vec<usize>) {
    for word in span.split_whitespace() {
        out.push((fnv1a(word.as_bytes()) % base as u64) as usize);
    }
}
