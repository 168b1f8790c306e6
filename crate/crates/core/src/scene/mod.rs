//! Scene representation: agent tracks with 1 s of history and an 8 s
//! ground-truth future sampled at 10 Hz.
//!
//! Time indexing: `history[10]` is the current state at t = 0. Future
//! trajectories (ground truth and predicted candidates alike) are sampled at
//! t = 0, dt, ..., 79 dt, so index 0 coincides with the current position.

mod generator;
mod io;
mod path;

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

pub use generator::{generate_dataset, generate_scene, GeneratorConfig, ScenarioKind};
pub use io::{parse_dataset, parse_scene, read_dataset, serialize_scene, write_dataset};
pub use path::{Path, SpeedProfile};

use crate::error::{Error, Result};
use crate::geometry::{Point2, Pose2};
use crate::metrics::Footprint;

pub const HISTORY_LEN: usize = 11;
pub const FUTURE_LEN: usize = 80;
pub const DT: f64 = 0.1;
pub const MAX_AGENTS: usize = 40;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentType {
    Vehicle,
    Pedestrian,
    Cyclist,
}

impl AgentType {
    pub const ALL: [AgentType; 3] = [AgentType::Vehicle, AgentType::Pedestrian, AgentType::Cyclist];

    pub fn index(self) -> usize {
        match self {
            AgentType::Vehicle => 0,
            AgentType::Pedestrian => 1,
            AgentType::Cyclist => 2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistoryState {
    pub pose: Pose2,
    /// m/s
    pub speed: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgentTrack {
    pub id: u32,
    pub agent_type: AgentType,
    pub length: f64,
    pub width: f64,
    pub is_av: bool,
    pub history: Vec<HistoryState>,
    pub future_gt: Vec<Pose2>,
    pub valid_mask: Vec<bool>,
}

impl AgentTrack {
    pub fn validate(&self) -> Result<()> {
        let ctx = |m: String| Error::Config(format!("agent {}: {m}", self.id));
        if self.history.len() != HISTORY_LEN {
            return Err(ctx(format!("history length {} != {HISTORY_LEN}", self.history.len())));
        }
        if self.future_gt.len() != FUTURE_LEN || self.valid_mask.len() != FUTURE_LEN {
            return Err(ctx(format!(
                "future length {} / mask length {} != {FUTURE_LEN}",
                self.future_gt.len(),
                self.valid_mask.len()
            )));
        }
        if !(self.length > 0.0 && self.width > 0.0) {
            return Err(ctx("box dimensions must be positive".into()));
        }
        if self.agent_type == AgentType::Vehicle && self.length < self.width {
            return Err(ctx("vehicle length shorter than width".into()));
        }
        let finite = self
            .history
            .iter()
            .all(|h| h.pose.x.is_finite() && h.pose.y.is_finite() && h.pose.yaw.is_finite() && h.speed.is_finite())
            && self.future_gt.iter().all(|p| p.x.is_finite() && p.y.is_finite() && p.yaw.is_finite());
        if !finite {
            return Err(ctx("non-finite coordinate".into()));
        }
        let pi = std::f64::consts::PI;
        let yaw_ok = |y: f64| y > -pi && y <= pi;
        if !self.history.iter().all(|h| yaw_ok(h.pose.yaw)) || !self.future_gt.iter().all(|p| yaw_ok(p.yaw)) {
            return Err(ctx("yaw outside (-pi, pi]".into()));
        }
        Ok(())
    }

    /// Pose at t = 0; the anchor of this agent's frame.
    pub fn current_pose(&self) -> Pose2 {
        self.history[HISTORY_LEN - 1].pose
    }

    pub fn current_speed(&self) -> f64 {
        self.history[HISTORY_LEN - 1].speed
    }

    pub fn footprint(&self) -> Footprint {
        Footprint {
            length: self.length,
            width: self.width,
            heading_hint: self.current_pose().yaw,
        }
    }

    pub fn gt_points(&self) -> Vec<Point2> {
        self.future_gt.iter().map(Pose2::position).collect()
    }

    pub fn has_valid_future(&self) -> bool {
        self.valid_mask.iter().any(|&v| v)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub scene_id: String,
    pub agents: Vec<AgentTrack>,
    pub dt: f64,
    pub rng_seed: u64,
}

impl Scene {
    pub fn validate(&self) -> Result<()> {
        if self.agents.is_empty() || self.agents.len() > MAX_AGENTS {
            return Err(Error::Config(format!(
                "scene {}: agent count {} outside 1..={MAX_AGENTS}",
                self.scene_id,
                self.agents.len()
            )));
        }
        let avs = self.agents.iter().filter(|a| a.is_av).count();
        if avs != 1 {
            return Err(Error::Config(format!("scene {}: expected exactly one AV, found {avs}", self.scene_id)));
        }
        let mut ids = HashSet::new();
        for a in &self.agents {
            if !ids.insert(a.id) {
                return Err(Error::Config(format!("scene {}: duplicate agent id {}", self.scene_id, a.id)));
            }
            a.validate()?;
        }
        if (self.dt - DT).abs() > 1e-12 {
            return Err(Error::Config(format!("scene {}: dt {} != {DT}", self.scene_id, self.dt)));
        }
        Ok(())
    }

    pub fn num_agents(&self) -> usize {
        self.agents.len()
    }

    pub fn av_index(&self) -> Option<usize> {
        self.agents.iter().position(|a| a.is_av)
    }

    /// Applies a rigid transform to every pose in the scene.
    pub fn transformed(&self, by: &Pose2) -> Scene {
        let mut out = self.clone();
        for a in &mut out.agents {
            for h in &mut a.history {
                h.pose = by.compose(&h.pose);
            }
            for p in &mut a.future_gt {
                *p = by.compose(p);
            }
        }
        out
    }
}

/// Coordinate frame a trajectory is expressed in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Frame {
    World,
    Agent(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub waypoints: Vec<Point2>,
    pub frame: Frame,
}

impl Trajectory {
    pub fn new(waypoints: Vec<Point2>, frame: Frame) -> Result<Self> {
        if waypoints.len() != FUTURE_LEN {
            return Err(Error::dim("trajectory waypoints", FUTURE_LEN, waypoints.len()));
        }
        Ok(Self { waypoints, frame })
    }
}
