//! The full model: backbone and pair network parameters, and one-scene inference.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::backbone::{
    build_anchors, init_backbone, predict_candidates, AnchorKinematics, AnchorSet, BackboneDims, Prediction, LOGIT_HEAD,
    TRUNK_LAYERS,
};
use crate::bp::{sum_product, Beliefs};
use crate::error::{Error, Result};
use crate::graph::{build_graph, GraphType, InteractionGraph};
use crate::pairwise::{
    compute_pair_table, heuristic_pair_table, init_pairwise, table_value, PairDims, PairPotentialTable, PairTableVar,
    INNER_LAYERS, OUTER_LAYERS,
};
use crate::scene::Scene;
use crate::tensor::{Matrix, ParamStore, Tape};

/// Source of the pairwise tables.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PotentialMode {
    Learned,
    Heuristic,
    None,
}

impl PotentialMode {
    pub fn as_str(self) -> &'static str {
        match self {
            PotentialMode::Learned => "learned",
            PotentialMode::Heuristic => "heuristic",
            PotentialMode::None => "none",
        }
    }
}

impl fmt::Display for PotentialMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PotentialMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "learned" => Ok(PotentialMode::Learned),
            "heuristic" => Ok(PotentialMode::Heuristic),
            "none" => Ok(PotentialMode::None),
            other => Err(Error::Config(format!("unknown potential mode '{other}' (expected learned, heuristic, none)"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelConfig {
    pub k: usize,
    pub backbone: BackboneDims,
    pub pair: PairDims,
    pub kinematics: AnchorKinematics,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            k: 6,
            backbone: BackboneDims::default(),
            pair: PairDims::default(),
            kinematics: AnchorKinematics::default(),
        }
    }
}

impl ModelConfig {
    /// Recovers layer widths and K from parameter shapes; scales and kinematics stay at defaults.
    pub fn infer_from(params: &ParamStore<f64>) -> Result<Self> {
        let cols = |name: &str| -> Result<usize> { Ok(params.by_name(&format!("{name}.w"))?.cols()) };
        let mut cfg = ModelConfig {
            k: cols(LOGIT_HEAD)?,
            ..ModelConfig::default()
        };
        cfg.backbone.hidden = cols(TRUNK_LAYERS[0])?;
        cfg.pair.inner = [cols(INNER_LAYERS[0])?, cols(INNER_LAYERS[1])?];
        cfg.pair.outer_hidden = cols(OUTER_LAYERS[0])?;
        Ok(cfg)
    }
}

#[derive(Clone, Debug)]
pub struct JfpModel {
    pub config: ModelConfig,
    pub anchors: AnchorSet,
    pub params: ParamStore<f64>,
}

impl JfpModel {
    pub fn new(config: ModelConfig, seed: u64) -> Result<Self> {
        let anchors = build_anchors(config.k, &config.kinematics)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut params = ParamStore::new();
        init_backbone(&mut params, &mut rng, config.k, &config.backbone)?;
        init_pairwise(&mut params, &mut rng, &config.pair)?;
        Ok(Self { config, anchors, params })
    }

    /// Wraps loaded parameters, checking every shape against a fresh model.
    pub fn from_params(params: ParamStore<f64>) -> Result<Self> {
        let config = ModelConfig::infer_from(&params)?;
        let reference = Self::new(config, 0)?;
        if reference.params.len() != params.len() {
            return Err(Error::dim("parameter count", reference.params.len(), params.len()));
        }
        for (_, name, m) in reference.params.iter() {
            let got = params.by_name(name)?;
            if got.shape() != m.shape() {
                return Err(Error::dim(format!("parameter `{name}`"), format!("{:?}", m.shape()), format!("{:?}", got.shape())));
            }
        }
        Ok(Self {
            config,
            anchors: reference.anchors,
            params,
        })
    }

    pub fn forward(&self, scene: &Scene, params: &ParamStore<f64>, tape: &mut Tape<f64>) -> Result<Prediction> {
        predict_candidates(scene, &self.anchors, params, &self.config.backbone, tape)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InferenceConfig {
    pub graph_type: GraphType,
    pub potential: PotentialMode,
    pub bp_iterations: usize,
}

impl Default for InferenceConfig {
    fn default() -> Self {
        Self {
            graph_type: GraphType::Dynamic,
            potential: PotentialMode::Learned,
            bp_iterations: crate::bp::DEFAULT_ITERATIONS,
        }
    }
}

/// Everything computed for one scene up to the beliefs.
#[derive(Clone, Debug)]
pub struct SceneInference {
    pub pred: Prediction,
    pub graph: InteractionGraph,
    pub tables: Vec<PairPotentialTable<f64>>,
    /// Tape handles aligned with `tables`; constants for heuristic tables.
    pub table_vars: Vec<PairTableVar>,
    pub beliefs: Beliefs<f64>,
}

/// Candidates, graph, pair tables and sum-product beliefs for `scene`.
/// With [`PotentialMode::None`] the graph is forced empty.
pub fn infer_scene(
    model: &JfpModel,
    params: &ParamStore<f64>,
    scene: &Scene,
    cfg: &InferenceConfig,
    seed: u64,
    tape: &mut Tape<f64>,
) -> Result<SceneInference> {
    let pred = model.forward(scene, params, tape)?;
    let graph = match cfg.potential {
        PotentialMode::None => InteractionGraph::empty(scene.num_agents()),
        _ => build_graph(cfg.graph_type, scene, Some(&pred.values), seed)?,
    };
    let poses: Vec<_> = scene.agents.iter().map(|a| a.current_pose()).collect();
    let k = model.config.k;
    let mut tables = Vec::with_capacity(graph.edges().len());
    let mut table_vars = Vec::with_capacity(graph.edges().len());
    for &(i, j) in graph.edges() {
        match cfg.potential {
            PotentialMode::Learned => {
                let v = compute_pair_table((i, j), &pred, &poses, params, &model.config.pair, tape)?;
                tables.push(table_value(tape, &v, k)?);
                table_vars.push(v);
            }
            PotentialMode::Heuristic => {
                let t = heuristic_pair_table((i, j), &pred.values, &scene.agents[i].footprint(), &scene.agents[j].footprint())?;
                let var = tape.constant(Matrix::row_vector(t.logits.clone()));
                table_vars.push(PairTableVar { i, j, var });
                tables.push(t);
            }
            PotentialMode::None => unreachable!("graph is empty without potentials"),
        }
    }
    let beliefs = sum_product(&graph, &pred.values.logits, &tables, cfg.bp_iterations)?;
    Ok(SceneInference {
        pred,
        graph,
        tables,
        table_vars,
        beliefs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_roundtrips_through_shapes() {
        let mut cfg = ModelConfig {
            k: 4,
            ..ModelConfig::default()
        };
        cfg.backbone.hidden = 16;
        cfg.pair.inner = [12, 8];
        cfg.pair.outer_hidden = 5;
        let m = JfpModel::new(cfg, 3).unwrap();
        assert_eq!(ModelConfig::infer_from(&m.params).unwrap(), cfg);
        let again = JfpModel::from_params(m.params.clone()).unwrap();
        assert_eq!(again.params, m.params);

        let mut bad = m.params.clone();
        let wrong = ParamStore::<f64>::new();
        assert!(JfpModel::from_params(wrong).is_err());
        *bad.by_name_mut("pair.outer.l1.b").unwrap() = Matrix::zeros(1, 2);
        assert!(JfpModel::from_params(bad).is_err());
    }

    #[test]
    fn mode_parsing() {
        assert_eq!("Heuristic".parse::<PotentialMode>().unwrap(), PotentialMode::Heuristic);
        assert!("soft".parse::<PotentialMode>().is_err());
    }
}
