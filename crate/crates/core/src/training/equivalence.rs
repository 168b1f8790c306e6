//! Checks that the stop-gradient cross-entropy losses differentiate like the
//! exact joint negative log-likelihood on acyclic graphs.

use crate::bp::{brute_force_joint, sum_product, MAX_EXACT_STATES};
use crate::error::{Error, Result};
use crate::graph::{build_graph, GraphType, InteractionGraph};
use crate::model::{infer_scene, InferenceConfig, JfpModel, PotentialMode};
use crate::pairwise::{PairPotentialTable, PairTableVar};
use crate::scene::Scene;
use crate::tensor::{finite_diff_check, relative_error, GradCheckConfig, GradCheckReport, Matrix, ParamStore, Tape};

use super::{assign_labels, ce_terms, structured_losses, LabelAssignment, StopGradient};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EquivalenceReport {
    pub max_abs_dev: f64,
    pub max_rel_err: f64,
    pub checked: usize,
}

fn require_exact(graph: &InteractionGraph, k: usize) -> Result<()> {
    if !graph.is_forest() {
        return Err(Error::Contract("gradient equivalence needs an acyclic graph".into()));
    }
    let states = (k as f64).powi(graph.node_count() as i32);
    if states > MAX_EXACT_STATES as f64 {
        return Err(Error::Infeasible {
            states,
            limit: MAX_EXACT_STATES,
        });
    }
    Ok(())
}

fn exact_nll(graph: &InteractionGraph, unary: &[Vec<f64>], tables: &[PairPotentialTable<f64>], labels: &[usize]) -> Result<f64> {
    Ok(brute_force_joint(graph, unary, tables)?.neg_log_prob(labels))
}

/// Compares reverse-mode gradients of `unary_ce + pair_ce` with respect to the
/// unary and pair logits against central differences of the exact `-log p(labels)`.
pub fn gradient_equivalence(
    graph: &InteractionGraph,
    unary: &[Vec<f64>],
    tables: &[PairPotentialTable<f64>],
    labels: &[usize],
    sg: StopGradient,
    eps: f64,
) -> Result<EquivalenceReport> {
    let k = unary.first().map_or(0, Vec::len);
    require_exact(graph, k)?;
    if labels.len() != graph.node_count() {
        return Err(Error::dim("labels", graph.node_count(), labels.len()));
    }
    let mut store = ParamStore::new();
    for (i, u) in unary.iter().enumerate() {
        store.insert(format!("mu.{i}"), Matrix::row_vector(u.clone()))?;
    }
    for (e, &(i, j)) in graph.edges().iter().enumerate() {
        let t = tables
            .iter()
            .find(|t| (t.i, t.j) == (i, j))
            .ok_or_else(|| Error::Contract(format!("no pair table for edge ({i}, {j})")))?;
        store.insert(format!("ups.{e}"), Matrix::row_vector(t.logits.clone()))?;
    }
    let unpack = |s: &ParamStore<f64>| -> Result<(Vec<Vec<f64>>, Vec<PairPotentialTable<f64>>)> {
        let u = (0..graph.node_count()).map(|i| Ok(s.by_name(&format!("mu.{i}"))?.as_slice().to_vec())).collect::<Result<_>>()?;
        let t = graph
            .edges()
            .iter()
            .enumerate()
            .map(|(e, &(i, j))| PairPotentialTable::new(i, j, k, s.by_name(&format!("ups.{e}"))?.as_slice().to_vec()))
            .collect::<Result<_>>()?;
        Ok((u, t))
    };

    let beliefs = sum_product(graph, unary, tables, graph.diameter().max(1))?;
    let mut tape = Tape::new();
    let unary_vars = (0..graph.node_count())
        .map(|i| tape.param_named(&store, &format!("mu.{i}")))
        .collect::<Result<Vec<_>>>()?;
    let table_vars = graph
        .edges()
        .iter()
        .enumerate()
        .map(|(e, &(i, j))| Ok(PairTableVar { i, j, var: tape.param_named(&store, &format!("ups.{e}"))? }))
        .collect::<Result<Vec<_>>>()?;
    let assignment = LabelAssignment {
        labels: labels.iter().map(|&l| Some(l)).collect(),
    };
    let (u_ce, p_ce) = ce_terms(&mut tape, &unary_vars, &table_vars, &beliefs, &assignment, graph, sg)?;
    let total = tape.add(u_ce, p_ce)?;
    let grads = tape.backward(total, &store)?;

    let mut report = EquivalenceReport {
        max_abs_dev: 0.0,
        max_rel_err: 0.0,
        checked: 0,
    };
    let mut work = store.clone();
    let ids: Vec<_> = store.iter().map(|(id, _, _)| id).collect();
    for id in ids {
        for c in 0..store.get(id).len() {
            let orig = store.get(id).as_slice()[c];
            work.get_mut(id).as_mut_slice()[c] = orig + eps;
            let (u, t) = unpack(&work)?;
            let plus = exact_nll(graph, &u, &t, labels)?;
            work.get_mut(id).as_mut_slice()[c] = orig - eps;
            let (u, t) = unpack(&work)?;
            let minus = exact_nll(graph, &u, &t, labels)?;
            work.get_mut(id).as_mut_slice()[c] = orig;
            let numeric = (plus - minus) / (2.0 * eps);
            let analytic = grads.get(id).as_slice()[c];
            report.max_abs_dev = report.max_abs_dev.max((numeric - analytic).abs());
            report.max_rel_err = report.max_rel_err.max(relative_error(analytic, numeric));
            report.checked += 1;
        }
    }
    Ok(report)
}

fn fixed_labels(scene: &Scene, labels: &LabelAssignment) -> Result<Vec<usize>> {
    labels
        .labels
        .iter()
        .enumerate()
        .map(|(i, l)| l.ok_or_else(|| Error::Contract(format!("agent {} of scene {} has no valid future", i, scene.scene_id))))
        .collect()
}

/// Runs [`gradient_equivalence`] on the model's own logits and learned tables
/// for `scene`, using the AV-centred star graph.
pub fn gradient_equivalence_check(model: &JfpModel, scene: &Scene, eps: f64) -> Result<EquivalenceReport> {
    let cfg = InferenceConfig {
        graph_type: GraphType::AvStar,
        potential: PotentialMode::Learned,
        bp_iterations: 3,
    };
    let mut tape = Tape::new();
    let inf = infer_scene(model, &model.params, scene, &cfg, 0, &mut tape)?;
    let labels = fixed_labels(scene, &assign_labels(&inf.pred.values, scene))?;
    gradient_equivalence(&inf.graph, &inf.pred.values.logits, &inf.tables, &labels, StopGradient::On, eps)
}

/// Finite-difference check of the full training gradient on an acyclic graph.
///
/// The training loss evaluates its cross-entropy terms at detached beliefs, so
/// its value is not the function whose gradient it produces. The numeric side
/// therefore differentiates `reg + exact joint NLL`, with labels and graph held
/// fixed at their values for the starting parameters.
pub fn model_gradient_check(model: &JfpModel, scene: &Scene, graph_type: GraphType, cfg: &GradCheckConfig) -> Result<GradCheckReport> {
    let mut tape = Tape::new();
    let pred = model.forward(scene, &model.params, &mut tape)?;
    let graph = build_graph(graph_type, scene, Some(&pred.values), cfg.seed)?;
    require_exact(&graph, model.config.k)?;
    let labels = assign_labels(&pred.values, scene);
    let fixed = fixed_labels(scene, &labels)?;
    let inf_cfg = InferenceConfig {
        graph_type,
        potential: PotentialMode::Learned,
        bp_iterations: graph.diameter().max(1),
    };

    let objective = |params: &ParamStore<f64>, tape: &mut Tape<f64>| -> Result<(crate::training::LossVars, f64)> {
        let inf = infer_scene(model, params, scene, &inf_cfg, cfg.seed, tape)?;
        if inf.graph != graph {
            return Err(Error::Contract("graph changed under perturbation".into()));
        }
        let (vars, _) = structured_losses(tape, scene, &inf.pred, &inf.table_vars, &inf.beliefs, &labels, &inf.graph)?;
        let nll = exact_nll(&inf.graph, &inf.pred.values.logits, &inf.tables, &fixed)?;
        Ok((vars, nll))
    };
    let (vars, _) = objective(&model.params, &mut tape)?;
    let grads = tape.backward(vars.total, &model.params)?;
    finite_diff_check(&model.params, &grads, cfg, |p| {
        let mut t = Tape::new();
        let (vars, nll) = objective(p, &mut t)?;
        Ok(t.value(vars.reg).item() + nll)
    })
}
