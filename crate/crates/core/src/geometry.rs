//! Planar primitives shared by the map model and the Frenet projection.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

/// Minimum separation between consecutive centerline vertices.
pub const MIN_VERTEX_SEPARATION: f64 = 1e-9;

/// Distances at or below this value count as touching.
pub const CONTACT_EPS: f64 = 1e-9;

/// A point or vector in the local metric map frame (meters).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl From<[f64; 2]> for Vec2 {
    fn from(p: [f64; 2]) -> Self {
        Vec2 { x: p[0], y: p[1] }
    }
}

impl From<Vec2> for [f64; 2] {
    fn from(p: Vec2) -> Self {
        [p.x, p.y]
    }
}

#[allow(clippy::should_implement_trait)]
impl Vec2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    pub fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }

    pub fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }

    pub fn scale(self, k: f64) -> Vec2 {
        Vec2::new(self.x * k, self.y * k)
    }

    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the 3D cross product; positive when `o` lies to the left of `self`.
    pub fn cross(self, o: Vec2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, o: Vec2) -> f64 {
        self.sub(o).norm()
    }

    pub fn heading(self) -> f64 {
        self.y.atan2(self.x)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

/// Wraps an angle into (-pi, pi].
pub fn wrap_angle(angle: f64) -> f64 {
    let a = angle.rem_euclid(2.0 * PI);
    if a > PI {
        a - 2.0 * PI
    } else {
        a
    }
}

/// Closest point on segment `a`-`b` to `p`, as (parameter in [0, 1], distance).
pub fn closest_on_segment(p: Vec2, a: Vec2, b: Vec2) -> (f64, f64) {
    let ab = b.sub(a);
    let len_sq = ab.dot(ab);
    let t = if len_sq > 0.0 {
        (p.sub(a).dot(ab) / len_sq).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let q = a.add(ab.scale(t));
    (t, p.distance(q))
}

/// Minimum distance between segments `a`-`b` and `c`-`d`, with the earliest
/// parameter on `a`-`b` attaining it.
///
/// Crossing segments report distance 0 at the crossing; collinear overlaps
/// report the start of the shared stretch.
pub fn segment_distance(a: Vec2, b: Vec2, c: Vec2, d: Vec2) -> (f64, f64) {
    let r = b.sub(a);
    let s = d.sub(c);
    let denom = r.cross(s);
    if denom.abs() > f64::EPSILON * r.norm() * s.norm() {
        let ac = c.sub(a);
        let t = ac.cross(s) / denom;
        let u = ac.cross(r) / denom;
        if (0.0..=1.0).contains(&t) && (0.0..=1.0).contains(&u) {
            return (0.0, t);
        }
    }

    let (tc, dc) = closest_on_segment(c, a, b);
    let (td, dd) = closest_on_segment(d, a, b);
    let (_, da) = closest_on_segment(a, c, d);
    let (_, db) = closest_on_segment(b, c, d);
    let candidates = [(da, 0.0), (db, 1.0), (dc, tc), (dd, td)];
    let best = candidates.iter().map(|c| c.0).fold(f64::INFINITY, f64::min);
    let t = candidates
        .iter()
        .filter(|c| c.0 <= best + CONTACT_EPS)
        .map(|c| c.1)
        .fold(f64::INFINITY, f64::min);
    (best, t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_keeps_half_open_interval() {
        assert_eq!(wrap_angle(PI), PI);
        assert_eq!(wrap_angle(-PI), PI);
        assert!((wrap_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-12);
        assert_eq!(wrap_angle(0.0), 0.0);
    }

    #[test]
    fn crossing_segments_touch() {
        let (d, t) = segment_distance(
            Vec2::new(-5.0, 0.0),
            Vec2::new(5.0, 0.0),
            Vec2::new(0.0, -5.0),
            Vec2::new(0.0, 5.0),
        );
        assert_eq!(d, 0.0);
        assert!((t - 0.5).abs() < 1e-12);
    }

    #[test]
    fn collinear_overlap_reports_start() {
        let (d, t) = segment_distance(
            Vec2::new(0.0, 0.0),
            Vec2::new(10.0, 0.0),
            Vec2::new(4.0, 0.0),
            Vec2::new(20.0, 0.0),
        );
        assert_eq!(d, 0.0);
        assert!((t - 0.4).abs() < 1e-12);
    }

    #[test]
    fn parallel_segments_keep_gap() {
        let (d, _) = segment_distance(
            Vec2::new(0.0, 0.0),
            Vec2::new(10.0, 0.0),
            Vec2::new(0.0, 10.0),
            Vec2::new(10.0, 10.0),
        );
        assert!((d - 10.0).abs() < 1e-12);
    }
}
