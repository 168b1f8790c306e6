//! Analytic driving paths and longitudinal speed profiles.

use crate::geometry::Pose2;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Piece {
    Line(f64),
    /// Constant-curvature arc; positive `angle` turns left.
    Arc { radius: f64, angle: f64 },
}

/// A start pose followed by line and arc pieces. Arc length outside the
/// path extends straight along the start or end heading.
#[derive(Clone, Debug, PartialEq)]
pub struct Path {
    pub start: Pose2,
    pub pieces: Vec<Piece>,
}

impl Path {
    pub fn line(start: Pose2) -> Self {
        Self { start, pieces: Vec::new() }
    }

    pub fn then_line(mut self, len: f64) -> Self {
        self.pieces.push(Piece::Line(len));
        self
    }

    pub fn then_arc(mut self, radius: f64, angle: f64) -> Self {
        self.pieces.push(Piece::Arc { radius, angle });
        self
    }

    pub fn pose_at(&self, s: f64) -> Pose2 {
        let mut pose = self.start;
        if s <= 0.0 {
            return advance_straight(&pose, s);
        }
        let mut left = s;
        for piece in &self.pieces {
            let len = match *piece {
                Piece::Line(l) => l,
                Piece::Arc { radius, angle } => radius * angle.abs(),
            };
            let step = left.min(len);
            pose = match *piece {
                Piece::Line(_) => advance_straight(&pose, step),
                Piece::Arc { radius, angle } => advance_arc(&pose, radius, angle.signum(), step),
            };
            left -= step;
            if left <= 0.0 {
                return pose;
            }
        }
        advance_straight(&pose, left)
    }
}

fn advance_straight(p: &Pose2, d: f64) -> Pose2 {
    let (s, c) = p.yaw.sin_cos();
    Pose2::new(p.x + c * d, p.y + s * d, p.yaw)
}

fn advance_arc(p: &Pose2, radius: f64, dir: f64, d: f64) -> Pose2 {
    let dtheta = dir * d / radius;
    // chord of length 2 r sin(|dtheta| / 2) along the mean heading
    let chord = 2.0 * radius * (0.5 * dtheta.abs()).sin();
    let mid = p.yaw + 0.5 * dtheta;
    Pose2::new(p.x + chord * mid.cos(), p.y + chord * mid.sin(), p.yaw + dtheta)
}

/// Arc length traveled as a function of time. Every profile moves at its
/// initial speed for t < 0.
#[derive(Clone, Debug, PartialEq)]
pub enum SpeedProfile {
    Constant { v: f64 },
    Accelerate { v0: f64, accel: f64, v_max: f64 },
    /// Linear change from `v0` to `v1` over `duration`, then hold.
    SlowTo { v0: f64, v1: f64, duration: f64 },
    /// Constant deceleration coming to rest after `distance`.
    StopAt { v0: f64, distance: f64 },
    /// Arc length sampled at `t = k * dt`, `k = 0, 1, ...`.
    Tabulated { v0: f64, dt: f64, s: Vec<f64> },
}

impl SpeedProfile {
    pub fn initial_speed(&self) -> f64 {
        match *self {
            SpeedProfile::Constant { v } => v,
            SpeedProfile::Accelerate { v0, .. }
            | SpeedProfile::SlowTo { v0, .. }
            | SpeedProfile::StopAt { v0, .. }
            | SpeedProfile::Tabulated { v0, .. } => v0,
        }
    }

    pub fn distance(&self, t: f64) -> f64 {
        if t <= 0.0 {
            let base = match self {
                SpeedProfile::Tabulated { s, .. } => s.first().copied().unwrap_or(0.0),
                _ => 0.0,
            };
            return base + self.initial_speed() * t;
        }
        match self {
            SpeedProfile::Constant { v } => v * t,
            &SpeedProfile::Accelerate { v0, accel, v_max } => {
                let t1 = ((v_max - v0) / accel).max(0.0);
                if t <= t1 {
                    v0 * t + 0.5 * accel * t * t
                } else {
                    v0 * t1 + 0.5 * accel * t1 * t1 + v_max * (t - t1)
                }
            }
            &SpeedProfile::SlowTo { v0, v1, duration } => {
                let a = (v1 - v0) / duration;
                if t <= duration {
                    v0 * t + 0.5 * a * t * t
                } else {
                    v0 * duration + 0.5 * a * duration * duration + v1 * (t - duration)
                }
            }
            &SpeedProfile::StopAt { v0, distance } => {
                if v0 <= 0.0 || distance <= 0.0 {
                    return 0.0;
                }
                let t_stop = 2.0 * distance / v0;
                let a = v0 / t_stop;
                let tc = t.min(t_stop);
                v0 * tc - 0.5 * a * tc * tc
            }
            SpeedProfile::Tabulated { dt, s, .. } => {
                let k = t / dt;
                let i = k.floor() as usize;
                if i + 1 >= s.len() {
                    let last = s.len() - 1;
                    let v_end = if last > 0 { (s[last] - s[last - 1]) / dt } else { 0.0 };
                    return s[last] + v_end * (t - last as f64 * dt);
                }
                let f = k - i as f64;
                s[i] + f * (s[i + 1] - s[i])
            }
        }
    }

    pub fn speed(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return self.initial_speed();
        }
        match self {
            SpeedProfile::Constant { v } => *v,
            &SpeedProfile::Accelerate { v0, accel, v_max } => (v0 + accel * t).min(v_max),
            &SpeedProfile::SlowTo { v0, v1, duration } => {
                if t >= duration {
                    v1
                } else {
                    v0 + (v1 - v0) * t / duration
                }
            }
            &SpeedProfile::StopAt { v0, distance } => {
                if v0 <= 0.0 || distance <= 0.0 {
                    return 0.0;
                }
                let t_stop = 2.0 * distance / v0;
                (v0 * (1.0 - t / t_stop)).max(0.0)
            }
            SpeedProfile::Tabulated { dt, .. } => {
                let h = 0.5 * dt;
                ((self.distance(t + h) - self.distance((t - h).max(0.0))) / (t + h - (t - h).max(0.0))).max(0.0)
            }
        }
    }
}
