//! Toy unary backbone: per-agent candidate trajectories as fixed anchors plus
//! learned offsets, and unary logits from a separate head.

use crate::error::{Error, Result};
use crate::geometry::{Point2, Pose2};
use crate::scene::{AgentTrack, AgentType, Path, Scene, SpeedProfile, DT, FUTURE_LEN, HISTORY_LEN};
use crate::tensor::nn::{dense, mlp_forward};
use crate::tensor::{Matrix, ParamStore, Tape, Var};

/// history positions (x, y) + speed + yaw rate + acceleration + type one-hot
pub const FEATURE_LEN: usize = 2 * HISTORY_LEN + 3 + 3;
/// Coordinates per trajectory: 80 waypoints x (x, y).
pub const TRAJ_DIM: usize = 2 * FUTURE_LEN;

const POSITION_SCALE: f64 = 0.1;
const SPEED_SCALE: f64 = 0.1;

/// Agent-centric feature vector of a track.
pub fn extract_features(track: &AgentTrack) -> Vec<f64> {
    let anchor = track.current_pose();
    let mut f = Vec::with_capacity(FEATURE_LEN);
    for h in &track.history {
        let p = anchor.to_local(h.pose.position());
        f.push(p.x * POSITION_SCALE);
        f.push(p.y * POSITION_SCALE);
    }
    let cur = &track.history[HISTORY_LEN - 1];
    let prev = &track.history[HISTORY_LEN - 2];
    let yaw_rate = crate::geometry::normalize_angle(cur.pose.yaw - prev.pose.yaw) / DT;
    f.push(cur.speed * SPEED_SCALE);
    f.push(yaw_rate);
    f.push((cur.speed - prev.speed) / DT * SPEED_SCALE);
    let mut onehot = [0.0; 3];
    onehot[track.agent_type.index()] = 1.0;
    f.extend_from_slice(&onehot);
    f
}

/// Nominal speeds used to shape the anchor templates, m/s.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnchorKinematics {
    pub vehicle_speed: f64,
    pub pedestrian_speed: f64,
    pub cyclist_speed: f64,
}

impl Default for AnchorKinematics {
    fn default() -> Self {
        Self {
            vehicle_speed: 9.0,
            pedestrian_speed: 1.4,
            cyclist_speed: 5.0,
        }
    }
}

/// K agent-frame templates per agent type, each a `1 x TRAJ_DIM` row of a `K x TRAJ_DIM` matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct AnchorSet {
    k: usize,
    per_type: [Matrix<f64>; 3],
}

impl AnchorSet {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn for_type(&self, t: AgentType) -> &Matrix<f64> {
        &self.per_type[t.index()]
    }

    pub fn waypoints(&self, t: AgentType, j: usize) -> Vec<Point2> {
        row_points(self.for_type(t).row(j))
    }
}

pub(crate) fn row_points(row: &[f64]) -> Vec<Point2> {
    row.chunks_exact(2).map(|c| Point2::new(c[0], c[1])).collect()
}

fn template(j: usize, v: f64, turn_radius: f64) -> (Path, SpeedProfile) {
    let origin = Path::line(Pose2::new(0.0, 0.0, 0.0));
    let turn = |sign: f64, r: f64| origin.clone().then_line(v * 1.0).then_arc(r, sign * std::f64::consts::FRAC_PI_2);
    match j {
        0 => (origin, SpeedProfile::Constant { v }),
        1 => (turn(1.0, turn_radius), SpeedProfile::Constant { v }),
        2 => (turn(-1.0, turn_radius), SpeedProfile::Constant { v }),
        3 => (origin, SpeedProfile::StopAt { v0: v, distance: v * v / 8.0 }),
        4 => (origin, SpeedProfile::SlowTo { v0: v, v1: 0.5 * v, duration: 3.0 }),
        5 => (origin, SpeedProfile::Accelerate { v0: v, accel: 1.5, v_max: v + 4.0 }),
        _ => {
            // further variants: speed scalings alternating with wide curves
            let extra = j - 6;
            let factor = [0.25, 1.5, 0.75, 2.0][extra % 4] + 0.1 * (extra / 4) as f64;
            let speed = SpeedProfile::Constant { v: v * factor };
            if extra % 2 == 0 {
                (origin, speed)
            } else {
                let sign = if (extra / 2) % 2 == 0 { 1.0 } else { -1.0 };
                (origin.then_arc(3.0 * turn_radius, sign * 0.6), speed)
            }
        }
    }
}

/// Builds `k` distinct templates per agent type; waypoint `t` is the pose at time `t * DT`.
pub fn build_anchors(k: usize, kin: &AnchorKinematics) -> Result<AnchorSet> {
    if k < 2 {
        return Err(Error::Config(format!("need at least 2 candidates per agent, got {k}")));
    }
    let make = |v: f64, radius: f64| -> Result<Matrix<f64>> {
        let mut data = Vec::with_capacity(k * TRAJ_DIM);
        for j in 0..k {
            let (path, profile) = template(j, v, radius);
            for t in 0..FUTURE_LEN {
                let p = path.pose_at(profile.distance(t as f64 * DT));
                data.push(p.x);
                data.push(p.y);
            }
        }
        Matrix::from_vec(k, TRAJ_DIM, data)
    };
    Ok(AnchorSet {
        k,
        per_type: [
            make(kin.vehicle_speed, 15.0)?,
            make(kin.pedestrian_speed, 3.0)?,
            make(kin.cyclist_speed, 8.0)?,
        ],
    })
}

/// Widths of the backbone network.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BackboneDims {
    pub hidden: usize,
    /// Offsets are produced in units of this many meters.
    pub offset_scale: f64,
}

impl Default for BackboneDims {
    fn default() -> Self {
        Self {
            hidden: 64,
            offset_scale: 20.0,
        }
    }
}

pub const TRUNK_LAYERS: [&str; 2] = ["backbone.trunk.l0", "backbone.trunk.l1"];
pub const OFFSET_HEAD: &str = "backbone.offset";
pub const LOGIT_HEAD: &str = "backbone.logit";

/// Registers backbone parameters. The offset head starts at zero so initial candidates equal the anchors.
pub fn init_backbone<R: rand::Rng>(store: &mut ParamStore<f64>, rng: &mut R, k: usize, dims: &BackboneDims) -> Result<()> {
    store.insert_dense(rng, TRUNK_LAYERS[0], FEATURE_LEN, dims.hidden)?;
    store.insert_dense(rng, TRUNK_LAYERS[1], dims.hidden, dims.hidden)?;
    store.insert_dense_zero(OFFSET_HEAD, dims.hidden, k * TRAJ_DIM)?;
    store.insert_dense(rng, LOGIT_HEAD, dims.hidden, k)?;
    Ok(())
}

/// Per-agent candidates as plain values, world frame.
#[derive(Clone, Debug, PartialEq)]
pub struct CandidateSet {
    pub k: usize,
    /// `[agent][candidate][waypoint]`
    pub trajectories: Vec<Vec<Vec<Point2>>>,
    /// Unary logits per agent; `softmax` gives q(s_i), `-logits` is E_traj.
    pub logits: Vec<Vec<f64>>,
}

impl CandidateSet {
    pub fn num_agents(&self) -> usize {
        self.logits.len()
    }

    pub fn probabilities(&self, agent: usize) -> Vec<f64> {
        crate::scalar::softmax(&self.logits[agent])
    }

    /// Most likely candidate index (lowest index on ties).
    pub fn top(&self, agent: usize) -> usize {
        crate::scalar::argmax(&self.logits[agent])
    }
}

/// Tape handles for the candidates of one forward pass.
#[derive(Clone, Debug)]
pub struct CandidateVars {
    /// `K x TRAJ_DIM` in each agent's own frame.
    pub local: Vec<Var>,
    /// `K x TRAJ_DIM` in the world frame.
    pub world: Vec<Var>,
    /// `1 x K` unary logits.
    pub logits: Vec<Var>,
}

#[derive(Clone, Debug)]
pub struct Prediction {
    pub values: CandidateSet,
    pub vars: CandidateVars,
}

/// Maps rows of flattened `(x, y)` waypoints from `pose`'s frame to the world frame.
pub fn tape_to_world(tape: &mut Tape<f64>, local: Var, pose: &Pose2) -> Result<Var> {
    let (r, c) = tape.shape(local);
    let (s, co) = pose.yaw.sin_cos();
    let pts = tape.reshape(local, r * c / 2, 2)?;
    let rot = tape.constant(Matrix::from_vec(2, 2, vec![co, s, -s, co])?);
    let turned = tape.matmul(pts, rot)?;
    let shift = tape.constant(Matrix::row_vector(vec![pose.x, pose.y]));
    let moved = tape.add_row(turned, shift)?;
    tape.reshape(moved, r, c)
}

/// Maps rows of flattened world waypoints into `pose`'s frame.
pub fn tape_to_frame(tape: &mut Tape<f64>, world: Var, pose: &Pose2) -> Result<Var> {
    let (r, c) = tape.shape(world);
    let (s, co) = pose.yaw.sin_cos();
    let pts = tape.reshape(world, r * c / 2, 2)?;
    let shift = tape.constant(Matrix::row_vector(vec![-pose.x, -pose.y]));
    let moved = tape.add_row(pts, shift)?;
    let rot = tape.constant(Matrix::from_vec(2, 2, vec![co, -s, s, co])?);
    let turned = tape.matmul(moved, rot)?;
    tape.reshape(turned, r, c)
}

/// Runs the backbone on every agent of `scene`, recording on `tape`.
pub fn predict_candidates(
    scene: &Scene,
    anchors: &AnchorSet,
    params: &ParamStore<f64>,
    dims: &BackboneDims,
    tape: &mut Tape<f64>,
) -> Result<Prediction> {
    let k = anchors.k();
    let n = scene.num_agents();
    let offset_w = params.by_name(&format!("{OFFSET_HEAD}.w"))?;
    if offset_w.cols() != k * TRAJ_DIM {
        return Err(Error::dim("offset head output", k * TRAJ_DIM, offset_w.cols()));
    }
    let mut feats = Vec::with_capacity(n * FEATURE_LEN);
    for a in &scene.agents {
        feats.extend(extract_features(a));
    }
    let x = tape.constant(Matrix::from_vec(n, FEATURE_LEN, feats)?);
    let h = mlp_forward(tape, params, &TRUNK_LAYERS, x)?;
    let h = tape.relu(h);
    let offsets = dense(tape, params, OFFSET_HEAD, h)?;
    let logits_all = dense(tape, params, LOGIT_HEAD, h)?;

    // waypoint 0 is the current position and never moves
    let mut mask = vec![dims.offset_scale; TRAJ_DIM];
    mask[0] = 0.0;
    mask[1] = 0.0;
    let mask = tape.constant(Matrix::row_vector(mask.repeat(k)).reshaped(k, TRAJ_DIM)?);

    let mut vars = CandidateVars {
        local: Vec::with_capacity(n),
        world: Vec::with_capacity(n),
        logits: Vec::with_capacity(n),
    };
    let mut values = CandidateSet {
        k,
        trajectories: Vec::with_capacity(n),
        logits: Vec::with_capacity(n),
    };
    for (i, agent) in scene.agents.iter().enumerate() {
        let row = tape.row(offsets, i)?;
        let off = tape.reshape(row, k, TRAJ_DIM)?;
        let off = tape.mul(off, mask)?;
        let anchor = tape.constant(anchors.for_type(agent.agent_type).clone());
        let local = tape.add(anchor, off)?;
        let world = tape_to_world(tape, local, &agent.current_pose())?;
        let logits = tape.row(logits_all, i)?;
        let wv = tape.value(world);
        values.trajectories.push((0..k).map(|j| row_points(wv.row(j))).collect());
        values.logits.push(tape.value(logits).as_slice().to_vec());
        vars.local.push(local);
        vars.world.push(world);
        vars.logits.push(logits);
    }
    Ok(Prediction { values, vars })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::{generate_scene, GeneratorConfig, HistoryState, ScenarioKind};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn model(k: usize) -> (ParamStore<f64>, AnchorSet) {
        let mut store = ParamStore::new();
        init_backbone(&mut store, &mut ChaCha8Rng::seed_from_u64(1), k, &BackboneDims::default()).unwrap();
        (store, build_anchors(k, &AnchorKinematics::default()).unwrap())
    }

    #[test]
    fn stationary_features() {
        let s = generate_scene(ScenarioKind::Intersection, 2, &GeneratorConfig::default()).unwrap();
        let mut t = s.agents[0].clone();
        let still = t.current_pose();
        t.history = vec![HistoryState { pose: still, speed: 0.0 }; HISTORY_LEN];
        let f = extract_features(&t);
        assert_eq!(f.len(), FEATURE_LEN);
        assert!(f[..2 * HISTORY_LEN + 3].iter().all(|&x| x == 0.0));
        assert_eq!(extract_features(&t), extract_features(&t.clone()));
    }

    #[test]
    fn feature_length_constant_over_kinds() {
        let cfg = GeneratorConfig::default();
        for kind in [ScenarioKind::Intersection, ScenarioKind::Merge, ScenarioKind::Queue, ScenarioKind::RandomMix] {
            for seed in 0..10 {
                let s = generate_scene(kind, seed, &cfg).unwrap();
                assert!(s.agents.iter().all(|a| extract_features(a).len() == FEATURE_LEN));
            }
        }
    }

    #[test]
    fn anchors_shape_and_kinematics() {
        assert!(build_anchors(1, &AnchorKinematics::default()).is_err());
        let a = build_anchors(6, &AnchorKinematics::default()).unwrap();
        assert_eq!(a.k(), 6);
        let straight = a.waypoints(AgentType::Vehicle, 0);
        for (t, p) in straight.iter().enumerate() {
            assert!((p.x - 9.0 * t as f64 * 0.1).abs() < 1e-9 && p.y.abs() < 1e-12);
        }
    }

    #[test]
    fn anchors_pairwise_distinct() {
        for k in [2, 4, 6, 10] {
            let a = build_anchors(k, &AnchorKinematics::default()).unwrap();
            for ty in AgentType::ALL {
                for i in 0..k {
                    for j in i + 1..k {
                        let (pi, pj) = (a.waypoints(ty, i), a.waypoints(ty, j));
                        let far = pi.iter().zip(&pj).map(|(x, y)| x.dist(*y)).fold(0.0, f64::max);
                        assert!(far > 0.5, "k={k} {ty:?} anchors {i},{j} differ by only {far}");
                    }
                }
            }
        }
    }

    #[test]
    fn zero_heads_give_anchors_and_uniform_probs() {
        let (mut store, anchors) = model(6);
        store.by_name_mut("backbone.logit.w").unwrap().as_mut_slice().fill(0.0);
        let s = generate_scene(ScenarioKind::Merge, 4, &GeneratorConfig::default()).unwrap();
        let mut tape = Tape::new();
        let pred = predict_candidates(&s, &anchors, &store, &BackboneDims::default(), &mut tape).unwrap();
        for (i, a) in s.agents.iter().enumerate() {
            let local = tape.value(pred.vars.local[i]);
            assert_eq!(local, anchors.for_type(a.agent_type));
            let p = pred.values.probabilities(i);
            assert!(p.iter().all(|&x| (x - 1.0 / 6.0).abs() < 1e-15));
            let cur = a.current_pose().position();
            for c in &pred.values.trajectories[i] {
                assert!(c[0].dist(cur) < 1e-9);
                assert_eq!(c.len(), FUTURE_LEN);
            }
        }
    }

    #[test]
    fn tape_frame_transforms_invert() {
        let pose = Pose2::new(3.0, -7.0, 2.1);
        let data: Vec<f64> = (0..2 * TRAJ_DIM).map(|i| (i as f64 * 0.37).sin() * 20.0).collect();
        let mut tape = Tape::new();
        let x = tape.constant(Matrix::from_vec(2, TRAJ_DIM, data.clone()).unwrap());
        let w = tape_to_world(&mut tape, x, &pose).unwrap();
        let back = tape_to_frame(&mut tape, w, &pose).unwrap();
        for (a, b) in tape.value(back).as_slice().iter().zip(&data) {
            assert!((a - b).abs() < 1e-12);
        }
        let wv = tape.value(w);
        let p = pose.to_world(Point2::new(data[2], data[3]));
        assert!((wv.get(0, 2) - p.x).abs() < 1e-12 && (wv.get(0, 3) - p.y).abs() < 1e-12);
    }

    #[test]
    fn rotating_the_world_rotates_candidates() {
        let (mut store, anchors) = model(4);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for x in store.by_name_mut(&format!("{OFFSET_HEAD}.w")).unwrap().as_mut_slice() {
            *x = rand::Rng::gen_range(&mut rng, -0.1..0.1);
        }
        let s = generate_scene(ScenarioKind::Intersection, 9, &GeneratorConfig::default()).unwrap();
        let by = Pose2::new(12.0, -40.0, 0.8);
        let moved = s.transformed(&by);
        let dims = BackboneDims::default();
        let p0 = predict_candidates(&s, &anchors, &store, &dims, &mut Tape::new()).unwrap().values;
        let p1 = predict_candidates(&moved, &anchors, &store, &dims, &mut Tape::new()).unwrap().values;
        for i in 0..s.num_agents() {
            for (l0, l1) in p0.logits[i].iter().zip(&p1.logits[i]) {
                assert!((l0 - l1).abs() < 1e-9);
            }
            for (c0, c1) in p0.trajectories[i].iter().zip(&p1.trajectories[i]) {
                for (a, b) in c0.iter().zip(c1) {
                    assert!(by.to_world(*a).dist(*b) < 1e-9);
                }
            }
        }
    }
}
