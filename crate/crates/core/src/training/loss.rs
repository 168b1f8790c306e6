use crate::bp::Beliefs;
use crate::error::{Error, Result};
use crate::geometry::to_agent_frame;
use crate::graph::InteractionGraph;
use crate::pairwise::PairTableVar;
use crate::scene::Scene;
use crate::backbone::Prediction;
use crate::tensor::{Matrix, Tape, Var};

use super::LabelAssignment;

pub const HUBER_DELTA: f64 = 1.0;

/// Whether the belief shift is detached. `Off` exists only as a negative control.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopGradient {
    On,
    Off,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LossBreakdown {
    pub reg: f64,
    pub unary_ce: f64,
    pub pair_ce: f64,
    pub total: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct LossVars {
    pub reg: Var,
    pub unary_ce: Var,
    pub pair_ce: Var,
    pub total: Var,
}

/// `logits + shift(beliefs - logits)`: evaluates at the beliefs, differentiates at the logits.
fn shifted(tape: &mut Tape<f64>, logits: Var, beliefs: &[f64], sg: StopGradient) -> Result<Var> {
    let (r, c) = tape.shape(logits);
    if r * c != beliefs.len() {
        return Err(Error::Contract(format!(
            "belief length {} does not match logits {r}x{c}",
            beliefs.len()
        )));
    }
    let b = tape.constant(Matrix::from_vec(r, c, beliefs.to_vec())?);
    let diff = tape.sub(b, logits)?;
    let diff = match sg {
        StopGradient::On => tape.stop_gradient(diff),
        StopGradient::Off => diff,
    };
    tape.add(logits, diff)
}

/// Unary and pair cross-entropy terms evaluated at the beliefs.
/// Agents without a label are skipped, and so are edges touching them.
pub fn ce_terms(
    tape: &mut Tape<f64>,
    unary: &[Var],
    tables: &[PairTableVar],
    beliefs: &Beliefs<f64>,
    labels: &LabelAssignment,
    graph: &InteractionGraph,
    sg: StopGradient,
) -> Result<(Var, Var)> {
    if unary.len() != beliefs.node.len() || unary.len() != graph.node_count() {
        return Err(Error::Contract(format!(
            "{} unary logits, {} node beliefs, {} graph nodes",
            unary.len(),
            beliefs.node.len(),
            graph.node_count()
        )));
    }
    if tables.len() != graph.edges().len() || beliefs.edges != graph.edges() {
        return Err(Error::Contract("pair tables and beliefs must follow the graph's edges".into()));
    }
    let k = beliefs.k;
    let mut unary_terms = Vec::new();
    for (i, &mu) in unary.iter().enumerate() {
        if let Some(label) = labels.get(i) {
            let s = shifted(tape, mu, &beliefs.node[i], sg)?;
            unary_terms.push(tape.softmax_cross_entropy(s, label)?);
        }
    }
    let mut pair_terms = Vec::new();
    for (e, &(i, j)) in graph.edges().iter().enumerate() {
        let t = &tables[e];
        if (t.i, t.j) != (i, j) {
            return Err(Error::Contract(format!("table ({}, {}) at position of edge ({i}, {j})", t.i, t.j)));
        }
        if let (Some(a), Some(b)) = (labels.get(i), labels.get(j)) {
            let s = shifted(tape, t.var, &beliefs.pair[e], sg)?;
            pair_terms.push(tape.softmax_cross_entropy(s, a * k + b)?);
        }
    }
    Ok((tape.add_scalars(&unary_terms)?, tape.add_scalars(&pair_terms)?))
}

/// `reg + unary_ce + pair_ce` for one scene. Regression is a Huber loss on the
/// assigned candidate in the agent's frame, averaged over valid waypoints.
pub fn structured_losses(
    tape: &mut Tape<f64>,
    scene: &Scene,
    pred: &Prediction,
    tables: &[PairTableVar],
    beliefs: &Beliefs<f64>,
    labels: &LabelAssignment,
    graph: &InteractionGraph,
) -> Result<(LossVars, LossBreakdown)> {
    let mut reg_terms = Vec::new();
    for (i, track) in scene.agents.iter().enumerate() {
        let Some(label) = labels.get(i) else { continue };
        let valid = track.valid_mask.iter().filter(|&&v| v).count();
        let gt = to_agent_frame(&track.gt_points(), &track.current_pose());
        let target: Vec<f64> = gt.iter().flat_map(|p| [p.x, p.y]).collect();
        let w = 1.0 / valid as f64;
        let weight: Vec<f64> = track.valid_mask.iter().flat_map(|&v| if v { [w, w] } else { [0.0, 0.0] }).collect();
        let cand = tape.row(pred.vars.local[i], label)?;
        reg_terms.push(tape.huber(cand, &target, &weight, HUBER_DELTA)?);
    }
    let reg = tape.add_scalars(&reg_terms)?;
    let (unary_ce, pair_ce) = ce_terms(tape, &pred.vars.logits, tables, beliefs, labels, graph, StopGradient::On)?;
    let partial = tape.add(reg, unary_ce)?;
    let total = tape.add(partial, pair_ce)?;
    let val = |v: Var| tape.value(v).item();
    let breakdown = LossBreakdown {
        reg: val(reg),
        unary_ce: val(unary_ce),
        pair_ce: val(pair_ce),
        total: val(total),
    };
    Ok((
        LossVars {
            reg,
            unary_ce,
            pair_ce,
            total,
        },
        breakdown,
    ))
}
