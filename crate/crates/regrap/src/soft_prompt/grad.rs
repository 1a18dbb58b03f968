//! Hand-derived reverse-mode gradients for the encoder and projection,
//! verified against central finite differences.
//!
//! The check optimizes nothing; its only job is to prove the backward
//! equations match the forward pass, using the scalar loss L = 0.5 ||out||^2
//! whose output gradient is the output itself.

use serde::Serialize;

use super::linalg::{self, Mat};
use super::{
    forward_with_cache, project_with_cache, tensor_list, tensor_list_mut, GnnLayer, GnnParams,
    OneHotGraph, ProjectionParams, SoftError,
};

fn zeros_like(gnn: &GnnParams, proj: &ProjectionParams) -> (GnnParams, ProjectionParams) {
    let layers = gnn
        .layers
        .iter()
        .map(|l| GnnLayer {
            w_self: Mat::zeros(l.w_self.rows(), l.w_self.cols()),
            w_nbr: Mat::zeros(l.w_nbr.rows(), l.w_nbr.cols()),
            bias: Mat::zeros(l.bias.rows(), l.bias.cols()),
        })
        .collect();
    let proj_zero = ProjectionParams {
        w1: Mat::zeros(proj.w1.rows(), proj.w1.cols()),
        b1: Mat::zeros(proj.b1.rows(), proj.b1.cols()),
        w2: Mat::zeros(proj.w2.rows(), proj.w2.cols()),
        b2: Mat::zeros(proj.b2.rows(), proj.b2.cols()),
    };
    (GnnParams { layers }, proj_zero)
}

fn loss(gnn: &GnnParams, proj: &ProjectionParams, graph: &OneHotGraph) -> Result<f64, SoftError> {
    let cache = forward_with_cache(gnn, graph)?;
    let (out, _) = project_with_cache(proj, &cache.h_g)?;
    Ok(0.5 * out.iter().map(|x| x * x).sum::<f64>())
}

/// Analytic gradients of the check loss with respect to every parameter.
fn backward(
    gnn: &GnnParams,
    proj: &ProjectionParams,
    graph: &OneHotGraph,
) -> Result<(f64, GnnParams, ProjectionParams), SoftError> {
    let cache = forward_with_cache(gnn, graph)?;
    let (out, pcache) = project_with_cache(proj, &cache.h_g)?;
    let loss = 0.5 * out.iter().map(|x| x * x).sum::<f64>();
    let (mut g_gnn, mut g_proj) = zeros_like(gnn, proj);

    let d_out = out;
    g_proj.w2.add_outer(&d_out, &pcache.act, 1.0);
    linalg::add_assign(g_proj.b2.data_mut(), &d_out);
    let d_act = proj.w2.tr_matvec(&d_out);
    let d_pre = linalg::relu_gate(&pcache.pre, &d_act);
    g_proj.w1.add_outer(&d_pre, &cache.h_g, 1.0);
    linalg::add_assign(g_proj.b1.data_mut(), &d_pre);
    let d_h_g = proj.w1.tr_matvec(&d_pre);

    let n = graph.node_count();
    let r = graph.relation_count();
    let pool = 1.0 / n as f64;
    let mut d_states: Vec<Vec<f64>> = (0..n)
        .map(|_| d_h_g.iter().map(|g| g * pool).collect())
        .collect();

    for (l, layer) in gnn.layers.iter().enumerate().rev() {
        let grads = &mut g_gnn.layers[l];
        let inputs = &cache.layers[l].input;
        let pres = &cache.layers[l].pre;
        let input_dim = inputs[0].len();
        let mut d_inputs: Vec<Vec<f64>> = (0..n).map(|_| vec![0.0; input_dim]).collect();
        for v in 0..n {
            let d_z = linalg::relu_gate(&pres[v], &d_states[v]);
            grads.w_self.add_outer(&d_z, &inputs[v], 1.0);
            linalg::add_assign(grads.bias.data_mut(), &d_z);
            linalg::add_assign(&mut d_inputs[v], &layer.w_self.tr_matvec(&d_z));
            let incoming: Vec<_> = graph.edges().iter().filter(|e| e.tgt == v).collect();
            if incoming.is_empty() {
                continue;
            }
            let share = 1.0 / incoming.len() as f64;
            for edge in incoming {
                let nbr_in = super::neighbor_input(&inputs[edge.src], edge.relation, r);
                grads.w_nbr.add_outer(&d_z, &nbr_in, share);
                let d_full = layer.w_nbr.tr_matvec(&d_z);
                for (acc, d) in d_inputs[edge.src].iter_mut().zip(&d_full[..input_dim]) {
                    *acc += share * d;
                }
            }
        }
        d_states = d_inputs;
    }
    Ok((loss, g_gnn, g_proj))
}

/// Outcome of comparing analytic gradients against central differences.
#[derive(Debug, Clone, Serialize)]
pub struct GradCheckReport {
    pub max_rel_error: f64,
    pub worst_param: String,
    pub params_checked: usize,
    pub loss: f64,
}

impl GradCheckReport {
    pub fn within(&self, tolerance: f64) -> bool {
        self.max_rel_error <= tolerance
    }
}

fn set_flat(
    gnn: &mut GnnParams,
    proj: &mut ProjectionParams,
    flat: usize,
    value: f64,
) -> f64 {
    let mut list = tensor_list_mut(gnn, proj);
    let mut offset = flat;
    for (_, mat) in list.iter_mut() {
        let len = mat.data().len();
        if offset < len {
            let old = mat.data()[offset];
            mat.data_mut()[offset] = value;
            return old;
        }
        offset -= len;
    }
    panic!("flat parameter index out of range");
}

/// Perturbs every parameter by plus and minus epsilon and compares the
/// finite-difference slope against the hand-derived gradient. The relative
/// error uses max(1, |numeric|) in the denominator so near-zero gradients
/// compare absolutely.
pub fn grad_check(
    gnn: &GnnParams,
    proj: &ProjectionParams,
    graph: &OneHotGraph,
    epsilon: f64,
) -> Result<GradCheckReport, SoftError> {
    if !(epsilon > 0.0 && epsilon <= 1e-2) {
        return Err(SoftError::BadEpsilon(epsilon));
    }
    let (loss_value, g_gnn, g_proj) = backward(gnn, proj, graph)?;
    let analytic: Vec<(String, Vec<f64>)> = tensor_list(&g_gnn, &g_proj)
        .into_iter()
        .map(|(name, mat)| (name, mat.data().to_vec()))
        .collect();
    let shapes: Vec<(String, usize)> = tensor_list(gnn, proj)
        .into_iter()
        .map(|(name, mat)| (name, mat.cols()))
        .collect();
    let mut work_gnn = gnn.clone();
    let mut work_proj = proj.clone();
    let mut max_rel_error = 0.0_f64;
    let mut worst_param = String::new();
    let mut flat = 0;
    let mut checked = 0;
    for (tensor_idx, (name, grads)) in analytic.iter().enumerate() {
        for (offset, &a) in grads.iter().enumerate() {
            let old = set_flat(&mut work_gnn, &mut work_proj, flat, 0.0);
            set_flat(&mut work_gnn, &mut work_proj, flat, old + epsilon);
            let plus = loss(&work_gnn, &work_proj, graph)?;
            set_flat(&mut work_gnn, &mut work_proj, flat, old - epsilon);
            let minus = loss(&work_gnn, &work_proj, graph)?;
            set_flat(&mut work_gnn, &mut work_proj, flat, old);
            let numeric = (plus - minus) / (2.0 * epsilon);
            let rel = (a - numeric).abs() / numeric.abs().max(1.0);
            if rel > max_rel_error {
                max_rel_error = rel;
                let cols = shapes[tensor_idx].1;
                worst_param = format!("{name}[{},{}]", offset / cols, offset % cols);
            }
            flat += 1;
            checked += 1;
        }
    }
    Ok(GradCheckReport {
        max_rel_error,
        worst_param,
        params_checked: checked,
        loss: loss_value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kg::{Edge, KnowledgeGraph, Node, NodeId};
    use crate::soft_prompt::{encode_one_hot, SoftPromptConfig};
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn graph_from_seed(seed: u64) -> KnowledgeGraph {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(2..=6);
        let mut g = KnowledgeGraph::new("t");
        let ids: Vec<NodeId> = (0..n)
            .map(|i| NodeId::new(format!("n{i}")).unwrap())
            .collect();
        for id in &ids {
            g.add_node(Node::concept(id.clone()));
        }
        let relations = ["r", "s", "t"];
        let edge_count = rng.gen_range(0..=2 * n);
        for _ in 0..edge_count {
            let a = rng.gen_range(0..n);
            let b = rng.gen_range(0..n);
            let rel = relations[rng.gen_range(0..relations.len())];
            g.add_edge(Edge::new(ids[a].clone(), rel, ids[b].clone()));
        }
        g
    }

    fn check_seed(seed: u64) -> GradCheckReport {
        let graph = graph_from_seed(seed);
        let encoded = encode_one_hot(&graph).unwrap();
        let config = SoftPromptConfig {
            hidden: 5,
            mid: 4,
            dim: 3,
            layers: 2,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xBEEF);
        let gnn = GnnParams::seeded(
            encoded.node_count(),
            encoded.relation_count(),
            config.hidden,
            config.layers,
            &mut rng,
        );
        let proj =
            ProjectionParams::seeded(config.hidden, config.mid, config.dim, &mut rng);
        grad_check(&gnn, &proj, &encoded, 1e-5).unwrap()
    }

    #[test]
    fn analytic_gradients_match_finite_differences() {
        for seed in [1, 2, 3, 4, 5] {
            let report = check_seed(seed);
            assert!(
                report.within(1e-4),
                "seed {seed}: {} at {}",
                report.max_rel_error,
                report.worst_param
            );
            assert!(report.params_checked > 0);
            assert!(report.loss.is_finite());
        }
    }

    #[test]
    fn epsilon_bounds_are_enforced() {
        let graph = graph_from_seed(1);
        let encoded = encode_one_hot(&graph).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let gnn = GnnParams::seeded(encoded.node_count(), encoded.relation_count(), 3, 2, &mut rng);
        let proj = ProjectionParams::seeded(3, 3, 3, &mut rng);
        for eps in [0.0, -1e-5, 0.5, f64::NAN] {
            assert!(matches!(
                grad_check(&gnn, &proj, &encoded, eps),
                Err(SoftError::BadEpsilon(_))
            ));
        }
    }

    #[test]
    fn worst_param_names_a_real_tensor_cell() {
        let report = check_seed(7);
        assert!(report.worst_param.contains('['), "{}", report.worst_param);
        let name = report.worst_param.split('[').next().unwrap();
        assert!(
            name.starts_with("gnn.layer") || name.starts_with("proj."),
            "{name}"
        );
    }
}
