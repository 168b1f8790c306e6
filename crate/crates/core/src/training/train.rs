use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{infer_scene, InferenceConfig, JfpModel, ModelConfig};
use crate::scene::Scene;
use crate::tensor::{adamw_step, AdamWConfig, AdamWState, Tape};

use super::{assign_labels, structured_losses, LossBreakdown};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrainConfig {
    pub seed: u64,
    pub steps: usize,
    pub optimizer: AdamWConfig,
    /// Multiply the learning rate by `lr_decay` once this fraction of the steps has run.
    pub lr_decay_at: Option<f64>,
    pub lr_decay: f64,
    pub inference: InferenceConfig,
    pub model: ModelConfig,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            steps: 2000,
            optimizer: AdamWConfig::default(),
            lr_decay_at: Some(0.75),
            lr_decay: 0.1,
            inference: InferenceConfig::default(),
            model: ModelConfig::default(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.optimizer.lr >= 0.0) || !self.optimizer.lr.is_finite() {
            return Err(Error::Config(format!("learning rate must be finite and non-negative, got {}", self.optimizer.lr)));
        }
        if self.inference.bp_iterations == 0 {
            return Err(Error::Config("bp_iterations must be at least 1".into()));
        }
        if let Some(f) = self.lr_decay_at {
            if !(0.0..=1.0).contains(&f) {
                return Err(Error::Config(format!("lr_decay_at must lie in [0, 1], got {f}")));
            }
        }
        if !(self.lr_decay > 0.0) {
            return Err(Error::Config(format!("lr_decay must be positive, got {}", self.lr_decay)));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LossRecord {
    pub step: usize,
    pub scene_id: String,
    pub edges: usize,
    pub loss: LossBreakdown,
}

impl LossRecord {
    pub const CSV_HEADER: &'static str = "step,scene_id,edges,reg,unary_ce,pair_ce,total";

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        let l = &self.loss;
        let _ = write!(
            s,
            "{},{},{},{:.10e},{:.10e},{:.10e},{:.10e}",
            self.step, self.scene_id, self.edges, l.reg, l.unary_ce, l.pair_ce, l.total
        );
        s
    }
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub model: JfpModel,
    pub log: Vec<LossRecord>,
}

/// One scene per step, visiting the dataset in a freshly shuffled order each epoch.
/// Starts from `init` when given, otherwise from a model seeded with `cfg.seed`.
pub fn train(dataset: &[Scene], cfg: &TrainConfig, init: Option<JfpModel>) -> Result<TrainOutcome> {
    if dataset.is_empty() {
        return Err(Error::Config("training dataset is empty".into()));
    }
    cfg.validate()?;
    let mut model = match init {
        Some(m) => m,
        None => JfpModel::new(cfg.model, cfg.seed)?,
    };
    let mut state = AdamWState::new(&model.params);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5e_ed0f_7a41);
    let mut order: Vec<usize> = Vec::new();
    let mut log = Vec::with_capacity(cfg.steps);
    let mut opt = cfg.optimizer;
    let decay_step = cfg.lr_decay_at.map(|f| (f * cfg.steps as f64).round() as usize);

    for step in 0..cfg.steps {
        if order.is_empty() {
            order = (0..dataset.len()).collect();
            order.shuffle(&mut rng);
            order.reverse();
        }
        let scene = &dataset[order.pop().unwrap_or(0)];
        if decay_step == Some(step) {
            opt.lr *= cfg.lr_decay;
        }
        let mut tape = Tape::new();
        let seed = cfg.seed.wrapping_add(step as u64);
        let inf = infer_scene(&model, &model.params, scene, &cfg.inference, seed, &mut tape)?;
        let labels = assign_labels(&inf.pred.values, scene);
        let (vars, loss) = structured_losses(&mut tape, scene, &inf.pred, &inf.table_vars, &inf.beliefs, &labels, &inf.graph)?;
        if !loss.total.is_finite() {
            return Err(Error::Numeric(format!("non-finite loss at step {step} on scene {}", scene.scene_id)));
        }
        let grads = tape.backward(vars.total, &model.params)?;
        adamw_step(&mut model.params, &grads, &opt, &mut state)
            .map_err(|e| Error::Numeric(format!("step {step} on scene {}: {e}", scene.scene_id)))?;
        if step % 100 == 0 {
            log::debug!("step {step} scene {} total {:.4}", scene.scene_id, loss.total);
        }
        log.push(LossRecord {
            step,
            scene_id: scene.scene_id.clone(),
            edges: inf.graph.edges().len(),
            loss,
        });
    }
    Ok(TrainOutcome { model, log })
}

/// Mean loss of `model` over `dataset` without updating anything.
pub fn mean_loss(model: &JfpModel, dataset: &[Scene], inference: &InferenceConfig, seed: u64) -> Result<LossBreakdown> {
    let mut sum = LossBreakdown {
        reg: 0.0,
        unary_ce: 0.0,
        pair_ce: 0.0,
        total: 0.0,
    };
    for (idx, scene) in dataset.iter().enumerate() {
        let mut tape = Tape::new();
        let inf = infer_scene(model, &model.params, scene, inference, seed.wrapping_add(idx as u64), &mut tape)?;
        let labels = assign_labels(&inf.pred.values, scene);
        let (_, l) = structured_losses(&mut tape, scene, &inf.pred, &inf.table_vars, &inf.beliefs, &labels, &inf.graph)?;
        sum.reg += l.reg;
        sum.unary_ce += l.unary_ce;
        sum.pair_ce += l.pair_ce;
        sum.total += l.total;
    }
    let n = dataset.len().max(1) as f64;
    Ok(LossBreakdown {
        reg: sum.reg / n,
        unary_ce: sum.unary_ce / n,
        pair_ce: sum.pair_ce / n,
        total: sum.total / n,
    })
}
