//! Oriented-box intersection and trajectory overlap tests.

use crate::geometry::{derive_headings, Point2};
use crate::scalar::Scalar;

/// Rectangle footprint of an agent at one instant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrientedBox<T = f64> {
    pub center: Point2<T>,
    pub yaw: T,
    pub length: T,
    pub width: T,
}

impl<T: Scalar> OrientedBox<T> {
    pub fn new(center: Point2<T>, yaw: T, length: T, width: T) -> Self {
        debug_assert!(length > T::zero() && width > T::zero());
        Self {
            center,
            yaw,
            length,
            width,
        }
    }

    fn axes(&self) -> [(T, T); 2] {
        let (s, c) = self.yaw.sin_cos();
        [(c, s), (-s, c)]
    }

    /// Half extent of the box projected onto unit axis `n`.
    fn radius_on(&self, n: (T, T)) -> T {
        let [u, v] = self.axes();
        let half = T::lit(0.5);
        half * self.length * (u.0 * n.0 + u.1 * n.1).abs() + half * self.width * (v.0 * n.0 + v.1 * n.1).abs()
    }

    /// Whether `p` lies inside or on the boundary.
    pub fn contains(&self, p: Point2<T>) -> bool {
        let [u, v] = self.axes();
        let dx = p.x - self.center.x;
        let dy = p.y - self.center.y;
        let half = T::lit(0.5);
        (dx * u.0 + dy * u.1).abs() <= half * self.length && (dx * v.0 + dy * v.1).abs() <= half * self.width
    }
}

/// Separating-axis test. Touching boxes count as overlapping.
pub fn boxes_overlap<T: Scalar>(a: &OrientedBox<T>, b: &OrientedBox<T>) -> bool {
    let dx = b.center.x - a.center.x;
    let dy = b.center.y - a.center.y;
    for n in a.axes().into_iter().chain(b.axes()) {
        let gap = (dx * n.0 + dy * n.1).abs();
        if gap > a.radius_on(n) + b.radius_on(n) {
            return false;
        }
    }
    true
}

/// Box dimensions plus the heading used when a trajectory never moves.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Footprint<T = f64> {
    pub length: T,
    pub width: T,
    pub heading_hint: T,
}

/// Displacements at or below this length do not define a heading.
pub const MIN_HEADING_STEP: f64 = 1e-3;

pub fn boxes_along<T: Scalar>(traj: &[Point2<T>], fp: &Footprint<T>) -> Vec<OrientedBox<T>> {
    let headings = derive_headings(traj, fp.heading_hint, T::lit(MIN_HEADING_STEP));
    traj.iter()
        .zip(headings)
        .map(|(&c, h)| OrientedBox::new(c, h, fp.length, fp.width))
        .collect()
}

/// True iff the two agents' boxes intersect at any common timestep.
pub fn trajectories_overlap<T: Scalar>(a: &[Point2<T>], b: &[Point2<T>], fa: &Footprint<T>, fb: &Footprint<T>) -> bool {
    first_overlap_step(a, b, fa, fb).is_some()
}

pub fn first_overlap_step<T: Scalar>(
    a: &[Point2<T>],
    b: &[Point2<T>],
    fa: &Footprint<T>,
    fb: &Footprint<T>,
) -> Option<usize> {
    let n = a.len().min(b.len());
    // cheap center-distance rejection before building boxes
    let reach_a = fa.length.hypot(fa.width);
    let reach_b = fb.length.hypot(fb.width);
    let reach = T::lit(0.5) * (reach_a + reach_b);
    if (0..n).all(|t| a[t].dist(b[t]) > reach) {
        return None;
    }
    let ba = boxes_along(&a[..n], fa);
    let bb = boxes_along(&b[..n], fb);
    (0..n).find(|&t| boxes_overlap(&ba[t], &bb[t]))
}
