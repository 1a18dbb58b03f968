//! Soft graph prompts: a relational GNN pools a one-hot encoded graph into a
//! single vector, an MLP projects it to embedding width, and the result is
//! stitched into a token embedding sequence.
//!
//! Everything is f64 and hand-rolled so gradients can be checked against
//! finite differences exactly; see [`grad_check`].

mod grad;
mod linalg;

use std::io::{Read, Write};
use std::path::Path;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::kg::KnowledgeGraph;

pub use grad::{grad_check, GradCheckReport};
pub use linalg::Mat;

#[derive(Debug, Error)]
pub enum SoftError {
    #[error("graph has no nodes to encode")]
    EmptyGraph,
    #[error("epsilon must be in (0, 1e-2], got {0}")]
    BadEpsilon(f64),
    #[error("token id {id} is outside the embedding table ({rows} rows)")]
    BadTokenId { id: usize, rows: usize },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("invalid permutation of graph storage")]
    BadPermutation,
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("parameter file is malformed: {0}")]
    Format(String),
}

/// An edge between storage indices, with the relation's index in the
/// relation vocabulary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct OneHotEdge {
    pub src: usize,
    pub tgt: usize,
    pub relation: usize,
}

/// A graph encoded for the GNN: one-hot node features (each node keeps its
/// own identity column regardless of storage order), edges over storage
/// indices, and the id/label vocabularies in insertion order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OneHotGraph {
    node_features: Mat,
    edges: Vec<OneHotEdge>,
    node_ids: Vec<String>,
    relation_labels: Vec<String>,
}

impl OneHotGraph {
    pub fn node_count(&self) -> usize {
        self.node_ids.len()
    }

    pub fn relation_count(&self) -> usize {
        self.relation_labels.len()
    }

    pub fn node_features(&self) -> &Mat {
        &self.node_features
    }

    pub fn edges(&self) -> &[OneHotEdge] {
        &self.edges
    }

    pub fn node_ids(&self) -> &[String] {
        &self.node_ids
    }

    pub fn relation_labels(&self) -> &[String] {
        &self.relation_labels
    }

    /// Reorders node storage by `perm` (new row i holds old node `perm[i]`)
    /// while each node keeps its one-hot identity; edges are remapped to the
    /// new storage indices. Graph semantics are unchanged, which is what
    /// makes this useful for invariance checks.
    pub fn permuted(&self, perm: &[usize]) -> Result<OneHotGraph, SoftError> {
        let n = self.node_count();
        let mut seen = vec![false; n];
        if perm.len() != n || !perm.iter().all(|&p| p < n && !std::mem::replace(&mut seen[p], true))
        {
            return Err(SoftError::BadPermutation);
        }
        let mut inverse = vec![0; n];
        for (new_idx, &old_idx) in perm.iter().enumerate() {
            inverse[old_idx] = new_idx;
        }
        let mut features = Mat::zeros(n, self.node_features.cols());
        let mut node_ids = Vec::with_capacity(n);
        for (new_idx, &old_idx) in perm.iter().enumerate() {
            features.data_mut()[new_idx * n..(new_idx + 1) * n]
                .copy_from_slice(self.node_features.row(old_idx));
            node_ids.push(self.node_ids[old_idx].clone());
        }
        let edges = self
            .edges
            .iter()
            .map(|e| OneHotEdge {
                src: inverse[e.src],
                tgt: inverse[e.tgt],
                relation: e.relation,
            })
            .collect();
        Ok(OneHotGraph {
            node_features: features,
            edges,
            node_ids,
            relation_labels: self.relation_labels.clone(),
        })
    }
}

/// Encodes a graph with one-hot node features in node insertion order and a
/// relation vocabulary in first-appearance order.
pub fn encode_one_hot(graph: &KnowledgeGraph) -> Result<OneHotGraph, SoftError> {
    let nodes = graph.nodes();
    if nodes.is_empty() {
        return Err(SoftError::EmptyGraph);
    }
    let node_ids: Vec<String> = nodes.iter().map(|n| n.id.as_str().to_string()).collect();
    let index_of = |id: &str| node_ids.iter().position(|n| n == id).unwrap();
    let mut relation_labels: Vec<String> = Vec::new();
    let mut edges = Vec::new();
    for edge in graph.edges() {
        let relation = match relation_labels.iter().position(|r| r == &edge.relation) {
            Some(i) => i,
            None => {
                relation_labels.push(edge.relation.clone());
                relation_labels.len() - 1
            }
        };
        edges.push(OneHotEdge {
            src: index_of(edge.from.as_str()),
            tgt: index_of(edge.to.as_str()),
            relation,
        });
    }
    let n = node_ids.len();
    let mut features = Mat::zeros(n, n);
    for i in 0..n {
        *features.at_mut(i, i) = 1.0;
    }
    Ok(OneHotGraph {
        node_features: features,
        edges,
        node_ids,
        relation_labels,
    })
}

/// One message-passing layer: a self transform, a neighbor transform over
/// `[h_u; onehot(r)]`, and a bias.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GnnLayer {
    pub w_self: Mat,
    pub w_nbr: Mat,
    pub bias: Mat,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GnnParams {
    pub layers: Vec<GnnLayer>,
}

impl GnnParams {
    /// Layer 1 maps the one-hot width, later layers map hidden to hidden.
    pub fn seeded(
        node_dim: usize,
        relation_dim: usize,
        hidden: usize,
        layers: usize,
        rng: &mut impl Rng,
    ) -> Self {
        let mut out = Vec::with_capacity(layers);
        let mut input = node_dim;
        for _ in 0..layers {
            out.push(GnnLayer {
                w_self: Mat::seeded(hidden, input, rng),
                w_nbr: Mat::seeded(hidden, input + relation_dim, rng),
                bias: Mat::seeded(hidden, 1, rng),
            });
            input = hidden;
        }
        GnnParams { layers: out }
    }

    pub fn hidden(&self) -> usize {
        self.layers.last().map_or(0, |l| l.w_self.rows())
    }
}

/// The projection MLP from pooled graph state to embedding width.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProjectionParams {
    pub w1: Mat,
    pub b1: Mat,
    pub w2: Mat,
    pub b2: Mat,
}

impl ProjectionParams {
    pub fn seeded(hidden: usize, mid: usize, dim: usize, rng: &mut impl Rng) -> Self {
        ProjectionParams {
            w1: Mat::seeded(mid, hidden, rng),
            b1: Mat::seeded(mid, 1, rng),
            w2: Mat::seeded(dim, mid, rng),
            b2: Mat::seeded(dim, 1, rng),
        }
    }

    pub fn dim(&self) -> usize {
        self.w2.rows()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SoftPromptConfig {
    pub hidden: usize,
    pub mid: usize,
    pub dim: usize,
    pub layers: usize,
}

impl Default for SoftPromptConfig {
    fn default() -> Self {
        SoftPromptConfig {
            hidden: 64,
            mid: 128,
            dim: 4096,
            layers: 2,
        }
    }
}

pub(crate) struct LayerCache {
    pub input: Vec<Vec<f64>>,
    pub pre: Vec<Vec<f64>>,
}

pub(crate) struct ForwardCache {
    pub layers: Vec<LayerCache>,
    pub h_g: Vec<f64>,
}

fn check_gnn_shapes(params: &GnnParams, graph: &OneHotGraph) -> Result<(), SoftError> {
    let first = params
        .layers
        .first()
        .ok_or_else(|| SoftError::Shape("GNN needs at least one layer".into()))?;
    let expect_in = graph.node_features.cols();
    if first.w_self.cols() != expect_in {
        return Err(SoftError::Shape(format!(
            "layer 0 expects {} input features, graph provides {expect_in}",
            first.w_self.cols()
        )));
    }
    if first.w_nbr.cols() != expect_in + graph.relation_count() {
        return Err(SoftError::Shape(format!(
            "layer 0 neighbor transform expects {} columns, graph provides {}",
            first.w_nbr.cols(),
            expect_in + graph.relation_count()
        )));
    }
    Ok(())
}

fn neighbor_input(state: &[f64], relation: usize, relation_count: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(state.len() + relation_count);
    out.extend_from_slice(state);
    let mut onehot = vec![0.0; relation_count];
    if relation < relation_count {
        onehot[relation] = 1.0;
    }
    out.extend_from_slice(&onehot);
    out
}

pub(crate) fn forward_with_cache(
    params: &GnnParams,
    graph: &OneHotGraph,
) -> Result<ForwardCache, SoftError> {
    check_gnn_shapes(params, graph)?;
    let n = graph.node_count();
    let r = graph.relation_count();
    let mut states: Vec<Vec<f64>> = (0..n).map(|v| graph.node_features.row(v).to_vec()).collect();
    let mut caches = Vec::with_capacity(params.layers.len());
    for layer in &params.layers {
        let mut pre: Vec<Vec<f64>> = Vec::with_capacity(n);
        for v in 0..n {
            let mut z = layer.w_self.matvec(&states[v]);
            let incoming: Vec<&OneHotEdge> =
                graph.edges.iter().filter(|e| e.tgt == v).collect();
            if !incoming.is_empty() {
                let mut agg = vec![0.0; z.len()];
                for edge in &incoming {
                    let msg = layer
                        .w_nbr
                        .matvec(&neighbor_input(&states[edge.src], edge.relation, r));
                    linalg::add_assign(&mut agg, &msg);
                }
                linalg::scale(&mut agg, 1.0 / incoming.len() as f64);
                linalg::add_assign(&mut z, &agg);
            }
            linalg::add_assign(&mut z, layer.bias.data());
            pre.push(z);
        }
        let next: Vec<Vec<f64>> = pre.iter().map(|z| linalg::relu(z)).collect();
        caches.push(LayerCache {
            input: std::mem::replace(&mut states, next),
            pre,
        });
    }
    let mut h_g = vec![0.0; params.hidden()];
    for state in &states {
        linalg::add_assign(&mut h_g, state);
    }
    linalg::scale(&mut h_g, 1.0 / n as f64);
    // Keep the final states as one more "input" so the backward pass can
    // reuse the same cache layout.
    caches.push(LayerCache {
        input: states,
        pre: Vec::new(),
    });
    Ok(ForwardCache {
        layers: caches,
        h_g,
    })
}

/// Runs the message-passing layers and mean-pools the final node states.
pub fn gnn_forward(params: &GnnParams, graph: &OneHotGraph) -> Result<Vec<f64>, SoftError> {
    Ok(forward_with_cache(params, graph)?.h_g)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SoftPromptVector {
    pub values: Vec<f64>,
}

impl SoftPromptVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

pub(crate) struct ProjCache {
    pub pre: Vec<f64>,
    pub act: Vec<f64>,
}

pub(crate) fn project_with_cache(
    proj: &ProjectionParams,
    h_g: &[f64],
) -> Result<(Vec<f64>, ProjCache), SoftError> {
    if proj.w1.cols() != h_g.len() {
        return Err(SoftError::Shape(format!(
            "projection expects {} pooled features, got {}",
            proj.w1.cols(),
            h_g.len()
        )));
    }
    let mut pre = proj.w1.matvec(h_g);
    linalg::add_assign(&mut pre, proj.b1.data());
    let act = linalg::relu(&pre);
    let mut out = proj.w2.matvec(&act);
    linalg::add_assign(&mut out, proj.b2.data());
    Ok((out, ProjCache { pre, act }))
}

/// Projects the pooled graph state to the soft prompt vector.
pub fn project(proj: &ProjectionParams, h_g: &[f64]) -> Result<SoftPromptVector, SoftError> {
    let (values, _) = project_with_cache(proj, h_g)?;
    Ok(SoftPromptVector { values })
}

/// A seeded stand-in for a language model's token embedding table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmbeddingTable {
    table: Mat,
}

impl EmbeddingTable {
    pub fn seeded(rows: usize, dim: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        EmbeddingTable {
            table: Mat::seeded(rows, dim, &mut rng),
        }
    }

    pub fn rows(&self) -> usize {
        self.table.rows()
    }

    pub fn dim(&self) -> usize {
        self.table.cols()
    }

    /// Looks up each id; ids must fall inside the table.
    pub fn embed_tokens(&self, ids: &[usize]) -> Result<Mat, SoftError> {
        let mut out = Mat::zeros(ids.len(), self.dim());
        for (row, &id) in ids.iter().enumerate() {
            if id >= self.rows() {
                return Err(SoftError::BadTokenId {
                    id,
                    rows: self.rows(),
                });
            }
            out.data_mut()[row * self.dim()..(row + 1) * self.dim()]
                .copy_from_slice(self.table.row(id));
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum AssembleMode {
    /// Soft prompt becomes an extra first row: (m+1) x d.
    #[default]
    Prepend,
    /// Soft prompt adds onto every token row: m x d.
    Add,
}

/// Combines the soft prompt with a token embedding block.
pub fn assemble_with_mode(
    soft: &SoftPromptVector,
    tokens: &Mat,
    mode: AssembleMode,
) -> Result<Mat, SoftError> {
    if soft.len() != tokens.cols() {
        return Err(SoftError::Shape(format!(
            "soft prompt width {} does not match embedding width {}",
            soft.len(),
            tokens.cols()
        )));
    }
    match mode {
        AssembleMode::Prepend => {
            let mut out = Mat::zeros(tokens.rows() + 1, tokens.cols());
            out.data_mut()[..tokens.cols()].copy_from_slice(&soft.values);
            out.data_mut()[tokens.cols()..].copy_from_slice(tokens.data());
            Ok(out)
        }
        AssembleMode::Add => {
            let mut out = tokens.clone();
            for row in 0..out.rows() {
                let cols = out.cols();
                let slice = &mut out.data_mut()[row * cols..(row + 1) * cols];
                for (cell, &s) in slice.iter_mut().zip(&soft.values) {
                    *cell += s;
                }
            }
            Ok(out)
        }
    }
}

/// Prepend assembly, the default.
pub fn assemble(soft: &SoftPromptVector, tokens: &Mat) -> Result<Mat, SoftError> {
    assemble_with_mode(soft, tokens, AssembleMode::Prepend)
}

/// Seeds parameters for a graph and computes its soft prompt in one shot.
pub fn soft_prompt_for_graph(
    graph: &KnowledgeGraph,
    config: &SoftPromptConfig,
    seed: u64,
) -> Result<(SoftPromptVector, OneHotGraph, GnnParams, ProjectionParams), SoftError> {
    let encoded = encode_one_hot(graph)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gnn = GnnParams::seeded(
        encoded.node_count(),
        encoded.relation_count(),
        config.hidden,
        config.layers,
        &mut rng,
    );
    let proj = ProjectionParams::seeded(config.hidden, config.mid, config.dim, &mut rng);
    let h_g = gnn_forward(&gnn, &encoded)?;
    let vector = project(&proj, &h_g)?;
    Ok((vector, encoded, gnn, proj))
}

const PARAM_MAGIC: &[u8; 8] = b"RGSPARAM";

pub(crate) fn tensor_list<'a>(
    gnn: &'a GnnParams,
    proj: &'a ProjectionParams,
) -> Vec<(String, &'a Mat)> {
    let mut out = Vec::new();
    for (i, layer) in gnn.layers.iter().enumerate() {
        out.push((format!("gnn.layer{i}.w_self"), &layer.w_self));
        out.push((format!("gnn.layer{i}.w_nbr"), &layer.w_nbr));
        out.push((format!("gnn.layer{i}.bias"), &layer.bias));
    }
    out.push(("proj.w1".into(), &proj.w1));
    out.push(("proj.b1".into(), &proj.b1));
    out.push(("proj.w2".into(), &proj.w2));
    out.push(("proj.b2".into(), &proj.b2));
    out
}

/// Same ordering as [`tensor_list`]; the two must stay in sync.
pub(crate) fn tensor_list_mut<'a>(
    gnn: &'a mut GnnParams,
    proj: &'a mut ProjectionParams,
) -> Vec<(String, &'a mut Mat)> {
    let mut out: Vec<(String, &mut Mat)> = Vec::new();
    for (i, layer) in gnn.layers.iter_mut().enumerate() {
        out.push((format!("gnn.layer{i}.w_self"), &mut layer.w_self));
        out.push((format!("gnn.layer{i}.w_nbr"), &mut layer.w_nbr));
        out.push((format!("gnn.layer{i}.bias"), &mut layer.bias));
    }
    out.push(("proj.w1".into(), &mut proj.w1));
    out.push(("proj.b1".into(), &mut proj.b1));
    out.push(("proj.w2".into(), &mut proj.w2));
    out.push(("proj.b2".into(), &mut proj.b2));
    out
}

#[derive(Debug, Serialize, serde::Deserialize)]
struct TensorMeta {
    name: String,
    rows: usize,
    cols: usize,
}

#[derive(Debug, Serialize, serde::Deserialize)]
struct ParamHeader {
    format: String,
    tensors: Vec<TensorMeta>,
}

/// Writes all parameters to a binary file: magic, JSON shape header, then
/// little-endian f64 payload. Round-trips bit-exactly.
pub fn save_params(
    path: impl AsRef<Path>,
    gnn: &GnnParams,
    proj: &ProjectionParams,
) -> Result<(), SoftError> {
    let tensors = tensor_list(gnn, proj);
    let header = ParamHeader {
        format: "soft-prompt-params/1".into(),
        tensors: tensors
            .iter()
            .map(|(name, mat)| TensorMeta {
                name: name.clone(),
                rows: mat.rows(),
                cols: mat.cols(),
            })
            .collect(),
    };
    let header_bytes = serde_json::to_vec(&header).map_err(|e| SoftError::Format(e.to_string()))?;
    let mut file = std::fs::File::create(path)?;
    file.write_all(PARAM_MAGIC)?;
    file.write_all(&u32::try_from(header_bytes.len()).map_err(|_| {
        SoftError::Format("header too large".into())
    })?.to_le_bytes())?;
    file.write_all(&header_bytes)?;
    for (_, mat) in &tensors {
        for value in mat.data() {
            file.write_all(&value.to_le_bytes())?;
        }
    }
    Ok(())
}

/// Reads a parameter file written by [`save_params`].
pub fn load_params(path: impl AsRef<Path>) -> Result<(GnnParams, ProjectionParams), SoftError> {
    let mut file = std::fs::File::open(path)?;
    let mut magic = [0u8; 8];
    file.read_exact(&mut magic)?;
    if &magic != PARAM_MAGIC {
        return Err(SoftError::Format("bad magic".into()));
    }
    let mut len_bytes = [0u8; 4];
    file.read_exact(&mut len_bytes)?;
    let mut header_bytes = vec![0u8; u32::from_le_bytes(len_bytes) as usize];
    file.read_exact(&mut header_bytes)?;
    let header: ParamHeader = serde_json::from_slice(&header_bytes)
        .map_err(|e| SoftError::Format(format!("bad header: {e}")))?;
    if header.format != "soft-prompt-params/1" {
        return Err(SoftError::Format(format!(
            "unsupported format {:?}",
            header.format
        )));
    }
    let mut named: Vec<(String, Mat)> = Vec::with_capacity(header.tensors.len());
    for meta in &header.tensors {
        let count = meta
            .rows
            .checked_mul(meta.cols)
            .ok_or_else(|| SoftError::Format("tensor shape overflows".into()))?;
        let mut data = Vec::with_capacity(count);
        let mut buf = [0u8; 8];
        for _ in 0..count {
            file.read_exact(&mut buf)?;
            data.push(f64::from_le_bytes(buf));
        }
        let mat = Mat::from_data(meta.rows, meta.cols, data)
            .ok_or_else(|| SoftError::Format("tensor shape mismatch".into()))?;
        named.push((meta.name.clone(), mat));
    }
    fn take(named: &mut Vec<(String, Mat)>, name: &str) -> Result<Mat, SoftError> {
        let at = named
            .iter()
            .position(|(n, _)| n == name)
            .ok_or_else(|| SoftError::Format(format!("missing tensor {name:?}")))?;
        Ok(named.remove(at).1)
    }
    let mut layers = Vec::new();
    for i in 0.. {
        if !named.iter().any(|(n, _)| n == &format!("gnn.layer{i}.w_self")) {
            break;
        }
        layers.push(GnnLayer {
            w_self: take(&mut named, &format!("gnn.layer{i}.w_self"))?,
            w_nbr: take(&mut named, &format!("gnn.layer{i}.w_nbr"))?,
            bias: take(&mut named, &format!("gnn.layer{i}.bias"))?,
        });
    }
    if layers.is_empty() {
        return Err(SoftError::Format("no GNN layers in file".into()));
    }
    let proj = ProjectionParams {
        w1: take(&mut named, "proj.w1")?,
        b1: take(&mut named, "proj.b1")?,
        w2: take(&mut named, "proj.w2")?,
        b2: take(&mut named, "proj.b2")?,
    };
    if !named.is_empty() {
        return Err(SoftError::Format(format!(
            "unexpected tensors: {:?}",
            named.iter().map(|(n, _)| n).collect::<Vec<_>>()
        )));
    }
    Ok((GnnParams { layers }, proj))
}

/// Writes a soft prompt vector in the same container: magic, JSON shape
/// header, little-endian f64 payload.
pub fn save_vector(path: impl AsRef<Path>, soft: &SoftPromptVector) -> Result<(), SoftError> {
    let header = ParamHeader {
        format: "soft-prompt-vector/1".into(),
        tensors: vec![TensorMeta {
            name: "soft_prompt".into(),
            rows: 1,
            cols: soft.len(),
        }],
    };
    let header_bytes = serde_json::to_vec(&header).map_err(|e| SoftError::Format(e.to_string()))?;
    let mut file = std::fs::File::create(path)?;
    file.write_all(PARAM_MAGIC)?;
    file.write_all(&u32::try_from(header_bytes.len()).map_err(|_| {
        SoftError::Format("header too large".into())
    })?.to_le_bytes())?;
    file.write_all(&header_bytes)?;
    for value in &soft.values {
        file.write_all(&value.to_le_bytes())?;
    }
    Ok(())
}

/// Reads a vector file written by [`save_vector`].
pub fn load_vector(path: impl AsRef<Path>) -> Result<SoftPromptVector, SoftError> {
    let mut file = std::fs::File::open(path)?;
    let mut magic = [0u8; 8];
    file.read_exact(&mut magic)?;
    if &magic != PARAM_MAGIC {
        return Err(SoftError::Format("bad magic".into()));
    }
    let mut len_bytes = [0u8; 4];
    file.read_exact(&mut len_bytes)?;
    let mut header_bytes = vec![0u8; u32::from_le_bytes(len_bytes) as usize];
    file.read_exact(&mut header_bytes)?;
    let header: ParamHeader = serde_json::from_slice(&header_bytes)
        .map_err(|e| SoftError::Format(format!("bad header: {e}")))?;
    if header.format != "soft-prompt-vector/1" {
        return Err(SoftError::Format(format!(
            "unsupported format {:?}",
            header.format
        )));
    }
    let [meta] = header.tensors.as_slice() else {
        return Err(SoftError::Format("expected exactly one tensor".into()));
    };
    if meta.name != "soft_prompt" || meta.rows != 1 {
        return Err(SoftError::Format(format!(
            "unexpected tensor {:?} of {} rows",
            meta.name, meta.rows
        )));
    }
    let mut values = Vec::with_capacity(meta.cols);
    let mut buf = [0u8; 8];
    for _ in 0..meta.cols {
        file.read_exact(&mut buf)?;
        values.push(f64::from_le_bytes(buf));
    }
    Ok(SoftPromptVector { values })
}

/// JSON dump of every parameter tensor, for debugging and diffing.
pub fn params_debug_json(gnn: &GnnParams, proj: &ProjectionParams) -> serde_json::Value {
    let tensors: Vec<serde_json::Value> = tensor_list(gnn, proj)
        .into_iter()
        .map(|(name, mat)| {
            serde_json::json!({
                "name": name,
                "rows": mat.rows(),
                "cols": mat.cols(),
                "data": mat.data(),
            })
        })
        .collect();
    serde_json::json!({ "format": "soft-prompt-params/1", "tensors": tensors })
}
