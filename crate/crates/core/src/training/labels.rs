use crate::backbone::CandidateSet;
use crate::geometry::Point2;
use crate::scene::AgentTrack;
use crate::scene::Scene;

/// Ground-truth candidate per agent; `None` for agents with no valid future.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabelAssignment {
    pub labels: Vec<Option<usize>>,
}

impl LabelAssignment {
    pub fn get(&self, agent: usize) -> Option<usize> {
        self.labels.get(agent).copied().flatten()
    }

    pub fn all_labeled(&self) -> bool {
        self.labels.iter().all(Option::is_some)
    }
}

/// `(ADE, FDE)` of `cand` against the agent's ground truth over valid steps;
/// FDE uses the last valid step. `None` when no step is valid.
pub fn displacement_errors(cand: &[Point2], track: &AgentTrack) -> Option<(f64, f64)> {
    let mut sum = 0.0;
    let mut count = 0usize;
    let mut last = None;
    for (t, (p, gt)) in cand.iter().zip(&track.future_gt).enumerate() {
        if !track.valid_mask[t] {
            continue;
        }
        let d = p.dist(gt.position());
        sum += d;
        count += 1;
        last = Some(d);
    }
    last.map(|fde| (sum / count as f64, fde))
}

/// Nearest candidate by mean displacement, lowest index on ties.
pub fn assign_labels(cands: &CandidateSet, scene: &Scene) -> LabelAssignment {
    let labels = scene
        .agents
        .iter()
        .zip(&cands.trajectories)
        .map(|(track, trajs)| {
            let mut best: Option<(usize, f64)> = None;
            for (j, c) in trajs.iter().enumerate() {
                let (ade, _) = displacement_errors(c, track)?;
                if best.is_none_or(|(_, b)| ade < b) {
                    best = Some((j, ade));
                }
            }
            best.map(|(j, _)| j)
        })
        .collect();
    LabelAssignment { labels }
}
