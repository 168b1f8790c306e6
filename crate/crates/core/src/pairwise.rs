//! Pairwise potentials: the learned K x K table from projected trajectory
//! pairs, and the fixed overlap heuristic.

use crate::backbone::{tape_to_frame, CandidateSet, Prediction, TRAJ_DIM};
use crate::error::{Error, Result};
use crate::geometry::{Point2, Pose2};
use crate::metrics::overlap::{trajectories_overlap, Footprint};
use crate::scalar::{Scalar, BLOCKED_LOGIT};
use crate::tensor::nn::{dense, mlp_forward};
use crate::tensor::{ParamStore, Tape, Var};

/// Pair logits for edge `(i, j)`, `i < j`, stored row-major: `logits[a * k + b]`
/// is the logit of `s_i = a, s_j = b`.
#[derive(Clone, Debug, PartialEq)]
pub struct PairPotentialTable<T = f64> {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    pub logits: Vec<T>,
}

impl<T: Scalar> PairPotentialTable<T> {
    pub fn new(i: usize, j: usize, k: usize, logits: Vec<T>) -> Result<Self> {
        if i >= j {
            return Err(Error::Contract(format!("pair table edge ({i}, {j}) must have i < j")));
        }
        if logits.len() != k * k {
            return Err(Error::dim("pair table", k * k, logits.len()));
        }
        Ok(Self { i, j, k, logits })
    }

    pub fn zeros(i: usize, j: usize, k: usize) -> Result<Self> {
        Self::new(i, j, k, vec![T::zero(); k * k])
    }

    #[inline]
    pub fn at(&self, a: usize, b: usize) -> T {
        self.logits[a * self.k + b]
    }

    /// Logit for the given states of agents `x` and `y`, whichever order they come in.
    pub fn between(&self, x: usize, sx: usize, sy: usize) -> T {
        if x == self.i {
            self.at(sx, sy)
        } else {
            self.at(sy, sx)
        }
    }
}

/// Expresses each agent's world-frame candidates in the other agent's frame.
/// Returns `(s_i@j, s_j@i)`.
pub fn project_pair(
    cands_i: &[Vec<Point2>],
    cands_j: &[Vec<Point2>],
    pose_i: &Pose2,
    pose_j: &Pose2,
) -> (Vec<Vec<Point2>>, Vec<Vec<Point2>>) {
    let into = |cands: &[Vec<Point2>], pose: &Pose2| -> Vec<Vec<Point2>> {
        cands.iter().map(|c| crate::geometry::to_agent_frame(c, pose)).collect()
    };
    (into(cands_i, pose_j), into(cands_j, pose_i))
}

/// Widths of the pair network.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairDims {
    pub inner: [usize; 2],
    pub outer_hidden: usize,
    /// Multiplies the coordinates fed to the inner network.
    pub input_scale: f64,
}

impl Default for PairDims {
    fn default() -> Self {
        Self {
            inner: [128, 64],
            outer_hidden: 64,
            input_scale: 0.1,
        }
    }
}

pub const INNER_LAYERS: [&str; 2] = ["pair.inner.l0", "pair.inner.l1"];
pub const OUTER_LAYERS: [&str; 2] = ["pair.outer.l0", "pair.outer.l1"];

pub fn init_pairwise<R: rand::Rng>(store: &mut ParamStore<f64>, rng: &mut R, dims: &PairDims) -> Result<()> {
    store.insert_dense(rng, INNER_LAYERS[0], 2 * TRAJ_DIM, dims.inner[0])?;
    store.insert_dense(rng, INNER_LAYERS[1], dims.inner[0], dims.inner[1])?;
    store.insert_dense(rng, OUTER_LAYERS[0], 2 * dims.inner[1], dims.outer_hidden)?;
    store.insert_dense(rng, OUTER_LAYERS[1], dims.outer_hidden, 1)?;
    Ok(())
}

/// A learned table still attached to the tape; `var` is `1 x K^2`, row-major as in [`PairPotentialTable`].
#[derive(Clone, Copy, Debug)]
pub struct PairTableVar {
    pub i: usize,
    pub j: usize,
    pub var: Var,
}

/// Learned pair logits for edge `(i, j)` evaluated cell by cell with shared inner weights.
pub fn compute_pair_table(
    edge: (usize, usize),
    pred: &Prediction,
    poses: &[Pose2],
    params: &ParamStore<f64>,
    dims: &PairDims,
    tape: &mut Tape<f64>,
) -> Result<PairTableVar> {
    let (i, j) = edge;
    if i >= j || j >= pred.vars.world.len() {
        return Err(Error::Contract(format!(
            "pair edge ({i}, {j}) invalid for {} agents",
            pred.vars.world.len()
        )));
    }
    let k = pred.values.k;
    let (ws, wc) = tape.shape(pred.vars.world[i]);
    if (ws, wc) != (k, TRAJ_DIM) {
        return Err(Error::dim("candidate rows", k * TRAJ_DIM, ws * wc));
    }

    let j_at_i = tape_to_frame(tape, pred.vars.world[j], &poses[i])?;
    let i_at_j = tape_to_frame(tape, pred.vars.world[i], &poses[j])?;
    let a_of: Vec<usize> = (0..k * k).map(|r| r / k).collect();
    let b_of: Vec<usize> = (0..k * k).map(|r| r % k).collect();

    // The first inner layer is linear in [other, own], so it is applied to each
    // trajectory once and the K x K cells are assembled from the products.
    let w0 = tape.param_named(params, &format!("{}.w", INNER_LAYERS[0]))?;
    let b0 = tape.param_named(params, &format!("{}.b", INNER_LAYERS[0]))?;
    if tape.shape(w0).0 != 2 * TRAJ_DIM {
        return Err(Error::dim(INNER_LAYERS[0], 2 * TRAJ_DIM, tape.shape(w0).0));
    }
    let w_other = tape.gather_rows(w0, &(0..TRAJ_DIM).collect::<Vec<_>>())?;
    let w_own = tape.gather_rows(w0, &(TRAJ_DIM..2 * TRAJ_DIM).collect::<Vec<_>>())?;
    let project = |tape: &mut Tape<f64>, x: Var, w: Var| -> Result<Var> {
        let x = tape.scale(x, dims.input_scale);
        tape.matmul(x, w)
    };
    // cell (a, b) seen from agent i: [s_j^b@i, s_i^a]; from agent j: [s_i^a@j, s_j^b]
    let views = [
        (j_at_i, &b_of, pred.vars.local[i], &a_of),
        (i_at_j, &a_of, pred.vars.local[j], &b_of),
    ];
    let mut feats = Vec::with_capacity(2);
    for (other, other_idx, own, own_idx) in views {
        let po = project(tape, other, w_other)?;
        let pw = project(tape, own, w_own)?;
        let co = tape.gather_rows(po, other_idx)?;
        let cw = tape.gather_rows(pw, own_idx)?;
        let pre = tape.add(co, cw)?;
        let pre = tape.add_row(pre, b0)?;
        let h = tape.relu(pre);
        let h = dense(tape, params, INNER_LAYERS[1], h)?;
        feats.push(tape.relu(h));
    }
    let (fi, fj) = (feats[0], feats[1]);
    let both = tape.concat_cols(fi, fj)?;
    let energy = mlp_forward(tape, params, &OUTER_LAYERS, both)?;
    let logits = tape.neg(energy);
    let var = tape.reshape(logits, 1, k * k)?;
    Ok(PairTableVar { i, j, var })
}

/// Reads a tape table into plain values.
pub fn table_value(tape: &Tape<f64>, t: &PairTableVar, k: usize) -> Result<PairPotentialTable<f64>> {
    PairPotentialTable::new(t.i, t.j, k, tape.value(t.var).as_slice().to_vec())
}

/// Blocks every candidate pair whose footprints ever overlap.
pub fn heuristic_pair_table(
    edge: (usize, usize),
    cands: &CandidateSet,
    fp_i: &Footprint,
    fp_j: &Footprint,
) -> Result<PairPotentialTable<f64>> {
    let (i, j) = edge;
    let k = cands.k;
    let mut logits = vec![0.0; k * k];
    for a in 0..k {
        for b in 0..k {
            if trajectories_overlap(&cands.trajectories[i][a], &cands.trajectories[j][b], fp_i, fp_j) {
                logits[a * k + b] = BLOCKED_LOGIT;
            }
        }
    }
    PairPotentialTable::new(i, j, k, logits)
}
