//! Marginal and pairwise forecasting metrics, and the per-dataset report.

use serde::{Deserialize, Serialize};

use crate::backbone::CandidateSet;
use crate::bp::{top_n_joint_pairs, Beliefs, JointDecode};
use crate::error::Result;
use crate::metrics::overlap::trajectories_overlap;
use crate::scene::Scene;
use crate::training::displacement_errors;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MetricConfig {
    /// FDE above this many meters is a miss.
    pub miss_threshold: f64,
    /// Joint predictions considered per pair.
    pub top_n: usize,
    /// Pairs qualify when their ground truth ever comes this close, meters.
    pub pair_radius: f64,
}

impl Default for MetricConfig {
    fn default() -> Self {
        Self {
            miss_threshold: 2.0,
            top_n: 6,
            pair_radius: 10.0,
        }
    }
}

/// Number of agent pairs whose selected trajectories overlap, overall and with the AV.
pub fn overlap_metric(scene: &Scene, decode: &JointDecode<f64>, cands: &CandidateSet) -> (usize, usize) {
    let n = scene.num_agents();
    let fps: Vec<_> = scene.agents.iter().map(|a| a.footprint()).collect();
    let (mut all, mut av) = (0, 0);
    for i in 0..n {
        for j in i + 1..n {
            let ti = &cands.trajectories[i][decode.assignment[i]];
            let tj = &cands.trajectories[j][decode.assignment[j]];
            if trajectories_overlap(ti, tj, &fps[i], &fps[j]) {
                all += 1;
                if scene.agents[i].is_av || scene.agents[j].is_av {
                    av += 1;
                }
            }
        }
    }
    (all, av)
}

/// Marginal errors of one agent.
#[derive(Clone, Debug, PartialEq)]
pub struct AgentMarginal {
    pub min_ade: f64,
    pub min_fde: f64,
    pub miss: bool,
    /// `(probability, true positive)` for every candidate, used for AP.
    pub ranked: Vec<(f64, bool)>,
}

/// Per-agent marginal metrics; agents without valid ground truth are `None`.
pub fn marginal_metrics(scene: &Scene, cands: &CandidateSet, probs: &[Vec<f64>], cfg: &MetricConfig) -> Vec<Option<AgentMarginal>> {
    scene
        .agents
        .iter()
        .enumerate()
        .map(|(i, track)| {
            let errs: Vec<(f64, f64)> = cands.trajectories[i].iter().map(|c| displacement_errors(c, track)).collect::<Option<_>>()?;
            let min_ade = errs.iter().map(|e| e.0).fold(f64::INFINITY, f64::min);
            let min_fde = errs.iter().map(|e| e.1).fold(f64::INFINITY, f64::min);
            // the highest-ranked non-miss candidate is the single true positive
            let mut order: Vec<usize> = (0..errs.len()).collect();
            order.sort_by(|&a, &b| probs[i][b].total_cmp(&probs[i][a]).then(a.cmp(&b)));
            let tp = order.iter().copied().find(|&j| errs[j].1 <= cfg.miss_threshold);
            let ranked = (0..errs.len()).map(|j| (probs[i][j], Some(j) == tp)).collect();
            Some(AgentMarginal {
                min_ade,
                min_fde,
                miss: min_fde > cfg.miss_threshold,
                ranked,
            })
        })
        .collect()
}

/// Average precision over pooled detections with `positives` ground-truth objects,
/// using the monotone precision envelope.
pub fn average_precision(detections: &mut [(f64, bool)], positives: usize) -> f64 {
    if positives == 0 {
        return 0.0;
    }
    detections.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut tp = 0usize;
    let mut points = Vec::new();
    for (rank, &(_, hit)) in detections.iter().enumerate() {
        if hit {
            tp += 1;
            points.push(tp as f64 / (rank + 1) as f64);
        }
    }
    let mut best = 0.0f64;
    for p in points.iter_mut().rev() {
        best = best.max(*p);
        *p = best;
    }
    points.iter().sum::<f64>() / positives as f64
}

#[derive(Clone, Debug, PartialEq)]
pub struct PairMetric {
    pub i: usize,
    pub j: usize,
    pub min_sade: f64,
    pub min_sfde: f64,
    pub miss: bool,
}

/// Joint metrics over agent pairs whose ground truth comes within `pair_radius`.
/// The miss test applies to the joint with the lowest SFDE (first in belief order
/// on ties): the pair misses if either agent's FDE there exceeds the threshold.
pub fn pairwise_joint_metrics(scene: &Scene, beliefs: &Beliefs<f64>, cands: &CandidateSet, cfg: &MetricConfig) -> Result<Vec<PairMetric>> {
    let n = scene.num_agents();
    let mut out = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let (ai, aj) = (&scene.agents[i], &scene.agents[j]);
            let close = (0..ai.future_gt.len())
                .filter(|&t| ai.valid_mask[t] && aj.valid_mask[t])
                .any(|t| ai.future_gt[t].position().dist(aj.future_gt[t].position()) <= cfg.pair_radius);
            if !close {
                continue;
            }
            let top = top_n_joint_pairs(beliefs, i, j, cfg.top_n.min(cands.k * cands.k))?;
            let mut m = PairMetric {
                i,
                j,
                min_sade: f64::INFINITY,
                min_sfde: f64::INFINITY,
                miss: true,
            };
            for ((a, b), _) in top {
                let (Some(ei), Some(ej)) = (
                    displacement_errors(&cands.trajectories[i][a], ai),
                    displacement_errors(&cands.trajectories[j][b], aj),
                ) else {
                    continue;
                };
                m.min_sade = m.min_sade.min(0.5 * (ei.0 + ej.0));
                let sfde = 0.5 * (ei.1 + ej.1);
                if sfde < m.min_sfde {
                    m.min_sfde = sfde;
                    m.miss = ei.1 > cfg.miss_threshold || ej.1 > cfg.miss_threshold;
                }
            }
            out.push(m);
        }
    }
    Ok(out)
}

/// Dataset-level metrics. Pair metrics are `None` when no pair qualified.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub label: String,
    pub overlap_all: f64,
    pub overlap_av: f64,
    #[serde(rename = "minADE")]
    pub min_ade: f64,
    #[serde(rename = "minFDE")]
    pub min_fde: f64,
    pub miss_rate: f64,
    pub map: f64,
    #[serde(rename = "pair_minSADE")]
    pub pair_min_sade: Option<f64>,
    #[serde(rename = "pair_minSFDE")]
    pub pair_min_sfde: Option<f64>,
    #[serde(rename = "pair_sMissRate")]
    pub pair_smiss_rate: Option<f64>,
    pub scenes: usize,
    pub agents: usize,
    pub pairs: usize,
    /// Settings that produced the report, as key/value text.
    pub config: Vec<(String, String)>,
}

/// Accumulates per-scene results in the order they are added.
#[derive(Clone, Debug, Default)]
pub struct MetricAccumulator {
    scenes: usize,
    overlap_all: usize,
    overlap_av: usize,
    agents: usize,
    ade: f64,
    fde: f64,
    misses: usize,
    detections: Vec<(f64, bool)>,
    pairs: usize,
    sade: f64,
    sfde: f64,
    smiss: usize,
}

impl MetricAccumulator {
    pub fn add_scene(&mut self, overlap: (usize, usize), marginals: &[Option<AgentMarginal>], pairs: &[PairMetric]) {
        self.scenes += 1;
        self.overlap_all += overlap.0;
        self.overlap_av += overlap.1;
        for m in marginals.iter().flatten() {
            self.agents += 1;
            self.ade += m.min_ade;
            self.fde += m.min_fde;
            self.misses += usize::from(m.miss);
            self.detections.extend_from_slice(&m.ranked);
        }
        for p in pairs {
            self.pairs += 1;
            self.sade += p.min_sade;
            self.sfde += p.min_sfde;
            self.smiss += usize::from(p.miss);
        }
    }

    pub fn finish(mut self, label: impl Into<String>, config: Vec<(String, String)>) -> MetricReport {
        let per = |x: f64, n: usize| if n == 0 { 0.0 } else { x / n as f64 };
        let pair = |x: f64| (self.pairs > 0).then(|| x / self.pairs as f64);
        MetricReport {
            label: label.into(),
            overlap_all: per(self.overlap_all as f64, self.scenes),
            overlap_av: per(self.overlap_av as f64, self.scenes),
            min_ade: per(self.ade, self.agents),
            min_fde: per(self.fde, self.agents),
            miss_rate: per(self.misses as f64, self.agents),
            map: average_precision(&mut self.detections, self.agents),
            pair_min_sade: pair(self.sade),
            pair_min_sfde: pair(self.sfde),
            pair_smiss_rate: pair(self.smiss as f64),
            scenes: self.scenes,
            agents: self.agents,
            pairs: self.pairs,
            config,
        }
    }
}
