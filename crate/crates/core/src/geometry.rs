//! Planar poses and agent-centric frame transforms.

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

/// A point in the plane, meters.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Point2<T = f64> {
    pub x: T,
    pub y: T,
}

impl<T: Scalar> Point2<T> {
    pub fn new(x: T, y: T) -> Self {
        Self { x, y }
    }

    pub fn dist(self, other: Self) -> T {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn norm(self) -> T {
        self.x.hypot(self.y)
    }
}

/// Wraps an angle into `(-pi, pi]`. Angles already in range are returned bit-identical.
pub fn normalize_angle<T: Scalar>(a: T) -> T {
    let pi = T::PI();
    if a > -pi && a <= pi {
        return a;
    }
    let two_pi = pi + pi;
    let mut r = a % two_pi;
    if r <= -pi {
        r = r + two_pi;
    } else if r > pi {
        r = r - two_pi;
    }
    r
}

/// Position and heading of an agent.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Pose2<T = f64> {
    pub x: T,
    pub y: T,
    pub yaw: T,
}

impl<T: Scalar> Pose2<T> {
    /// Builds a pose with `yaw` normalized into `(-pi, pi]`.
    pub fn new(x: T, y: T, yaw: T) -> Self {
        Self {
            x,
            y,
            yaw: normalize_angle(yaw),
        }
    }

    pub fn position(&self) -> Point2<T> {
        Point2::new(self.x, self.y)
    }

    /// Expresses a world point in this pose's frame.
    pub fn to_local(&self, p: Point2<T>) -> Point2<T> {
        let (s, c) = self.yaw.sin_cos();
        let dx = p.x - self.x;
        let dy = p.y - self.y;
        Point2::new(c * dx + s * dy, -s * dx + c * dy)
    }

    /// Maps a point in this pose's frame back to world coordinates.
    pub fn to_world(&self, p: Point2<T>) -> Point2<T> {
        let (s, c) = self.yaw.sin_cos();
        Point2::new(c * p.x - s * p.y + self.x, s * p.x + c * p.y + self.y)
    }

    /// Composes a rigid transform: `other` given in this frame, result in world frame.
    pub fn compose(&self, other: &Pose2<T>) -> Pose2<T> {
        let p = self.to_world(other.position());
        Pose2::new(p.x, p.y, self.yaw + other.yaw)
    }
}

/// Translates by `-anchor` and rotates by `-anchor.yaw`.
pub fn to_agent_frame<T: Scalar>(points: &[Point2<T>], anchor: &Pose2<T>) -> Vec<Point2<T>> {
    points.iter().map(|&p| anchor.to_local(p)).collect()
}

/// Inverse of [`to_agent_frame`] for the same anchor.
pub fn from_agent_frame<T: Scalar>(points: &[Point2<T>], anchor: &Pose2<T>) -> Vec<Point2<T>> {
    points.iter().map(|&p| anchor.to_world(p)).collect()
}

/// Heading per waypoint from consecutive differences.
///
/// Waypoint `t` takes the heading of segment `t -> t+1`; the final point reuses
/// the last segment. Segments shorter than `min_step` carry the previous heading
/// forward (or the next valid one at the start), and `fallback` is used when
/// the whole trajectory is stationary.
pub fn derive_headings<T: Scalar>(points: &[Point2<T>], fallback: T, min_step: T) -> Vec<T> {
    let n = points.len();
    let mut seg: Vec<Option<T>> = Vec::with_capacity(n.saturating_sub(1));
    for w in points.windows(2) {
        let dx = w[1].x - w[0].x;
        let dy = w[1].y - w[0].y;
        if dx.hypot(dy) > min_step {
            seg.push(Some(dy.atan2(dx)));
        } else {
            seg.push(None);
        }
    }
    let first = seg.iter().flatten().next().copied().unwrap_or(fallback);
    let mut out = Vec::with_capacity(n);
    let mut cur = first;
    for s in &seg {
        if let Some(h) = s {
            cur = *h;
        }
        out.push(cur);
    }
    if n > 0 {
        out.push(cur);
    }
    out
}
