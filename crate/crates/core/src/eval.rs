//! Dataset evaluation, plain and conditioned on the AV's trajectory.

use crate::bp::{conditional_clamp, max_product, sum_product};
use crate::error::Result;
use crate::metrics::{marginal_metrics, overlap_metric, pairwise_joint_metrics, MetricAccumulator, MetricConfig, MetricReport};
use crate::model::{infer_scene, InferenceConfig, JfpModel};
use crate::scalar::softmax;
use crate::scene::Scene;
use crate::tensor::Tape;
use crate::training::displacement_errors;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct EvalConfig {
    pub inference: InferenceConfig,
    pub metrics: MetricConfig,
    pub seed: u64,
}

impl EvalConfig {
    pub fn echo(&self) -> Vec<(String, String)> {
        vec![
            ("graph".into(), self.inference.graph_type.to_string()),
            ("potential".into(), self.inference.potential.to_string()),
            ("bp_iterations".into(), self.inference.bp_iterations.to_string()),
            ("miss_threshold".into(), self.metrics.miss_threshold.to_string()),
            ("top_n".into(), self.metrics.top_n.to_string()),
            ("pair_radius".into(), self.metrics.pair_radius.to_string()),
            ("seed".into(), self.seed.to_string()),
        ]
    }
}

/// Joint decode by max-product, marginals from the backbone, pair metrics from the beliefs.
pub fn evaluate(model: &JfpModel, dataset: &[Scene], cfg: &EvalConfig, label: &str) -> Result<MetricReport> {
    let mut acc = MetricAccumulator::default();
    for (idx, scene) in dataset.iter().enumerate() {
        let mut tape = Tape::new();
        let inf = infer_scene(model, &model.params, scene, &cfg.inference, cfg.seed.wrapping_add(idx as u64), &mut tape)?;
        let logits = &inf.pred.values.logits;
        let decode = max_product(&inf.graph, logits, &inf.tables, cfg.inference.bp_iterations)?;
        let overlap = overlap_metric(scene, &decode, &inf.pred.values);
        let probs: Vec<Vec<f64>> = logits.iter().map(|l| softmax(l)).collect();
        let marg = marginal_metrics(scene, &inf.pred.values, &probs, &cfg.metrics);
        let pairs = pairwise_joint_metrics(scene, &inf.beliefs, &inf.pred.values, &cfg.metrics)?;
        acc.add_scene(overlap, &marg, &pairs);
    }
    Ok(acc.finish(label, cfg.echo()))
}

/// Clamps the AV to its candidate closest to ground truth, then reports the
/// other agents' conditional predictions. The AV is left out of marginal metrics.
pub fn evaluate_conditional(model: &JfpModel, dataset: &[Scene], cfg: &EvalConfig, label: &str) -> Result<MetricReport> {
    let mut acc = MetricAccumulator::default();
    for (idx, scene) in dataset.iter().enumerate() {
        let mut tape = Tape::new();
        let inf = infer_scene(model, &model.params, scene, &cfg.inference, cfg.seed.wrapping_add(idx as u64), &mut tape)?;
        let cands = &inf.pred.values;
        let av = scene.av_index().unwrap_or(0);
        let best = (0..cands.k)
            .filter_map(|j| displacement_errors(&cands.trajectories[av][j], &scene.agents[av]).map(|e| (j, e.0)))
            .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
            .map_or_else(|| cands.top(av), |(j, _)| j);
        let clamped = conditional_clamp(&cands.logits, av, best)?;
        let beliefs = sum_product(&inf.graph, &clamped, &inf.tables, cfg.inference.bp_iterations)?;
        let decode = max_product(&inf.graph, &clamped, &inf.tables, cfg.inference.bp_iterations)?;
        let overlap = overlap_metric(scene, &decode, cands);
        let probs: Vec<Vec<f64>> = beliefs.node.iter().map(|b| b.iter().map(|x| x.exp()).collect()).collect();
        let mut marg = marginal_metrics(scene, cands, &probs, &cfg.metrics);
        marg[av] = None;
        let pairs = pairwise_joint_metrics(scene, &beliefs, cands, &cfg.metrics)?;
        acc.add_scene(overlap, &marg, &pairs);
    }
    let mut echo = cfg.echo();
    echo.push(("conditioned_on".into(), "av_best_candidate".into()));
    Ok(acc.finish(label, echo))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GraphType;
    use crate::model::{ModelConfig, PotentialMode};
    use crate::scene::{generate_dataset, GeneratorConfig, ScenarioKind};

    fn fixture() -> (JfpModel, Vec<Scene>) {
        let model = JfpModel::new(ModelConfig::default(), 4).unwrap();
        let data = generate_dataset(&[ScenarioKind::Intersection, ScenarioKind::Merge], 8, 9, &GeneratorConfig::default()).unwrap();
        (model, data)
    }

    #[test]
    fn evaluation_is_deterministic_and_counts_agents() {
        let (model, data) = fixture();
        let cfg = EvalConfig::default();
        let a = evaluate(&model, &data, &cfg, "a").unwrap();
        assert_eq!(a, evaluate(&model, &data, &cfg, "a").unwrap());
        assert_eq!(a.scenes, 8);
        assert_eq!(a.agents, data.iter().map(Scene::num_agents).sum::<usize>());
        assert!(a.miss_rate >= 0.0 && a.miss_rate <= 1.0 && a.map >= 0.0 && a.map <= 1.0);
        assert!(a.overlap_av <= a.overlap_all);
    }

    #[test]
    fn unary_only_decode_is_independent_argmax() {
        let (model, data) = fixture();
        let cfg = EvalConfig {
            inference: InferenceConfig {
                graph_type: GraphType::None,
                potential: PotentialMode::None,
                bp_iterations: 3,
            },
            ..EvalConfig::default()
        };
        let report = evaluate(&model, &data, &cfg, "none").unwrap();
        let mut overlaps = 0;
        for scene in &data {
            let mut tape = Tape::new();
            let cands = model.forward(scene, &model.params, &mut tape).unwrap().values;
            let decode = crate::bp::JointDecode {
                assignment: (0..cands.num_agents()).map(|i| cands.top(i)).collect(),
                score: 0.0,
            };
            overlaps += overlap_metric(scene, &decode, &cands).0;
        }
        assert!((report.overlap_all - overlaps as f64 / data.len() as f64).abs() < 1e-12);
    }

    #[test]
    fn conditional_evaluation_leaves_out_the_av() {
        let (model, data) = fixture();
        let cfg = EvalConfig::default();
        let r = evaluate_conditional(&model, &data, &cfg, "cond").unwrap();
        let total: usize = data.iter().map(Scene::num_agents).sum();
        assert_eq!(r.agents, total - data.len());
        assert!(r.config.iter().any(|(k, _)| k == "conditioned_on"));
    }
}
