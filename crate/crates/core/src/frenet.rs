//! Frenet projection of poses onto lane centerlines and the Gaussian
//! matching probability built on top of it.
//!
//! Lateral offsets are signed positive to the left of the driving
//! direction. Poses beyond either end of a centerline clamp to that end.

use serde::{Deserialize, Serialize};

use crate::geometry::{
    closest_on_segment, segment_distance, wrap_angle, Vec2, CONTACT_EPS, MIN_VERTEX_SEPARATION,
};

/// Ties closer than this go to the match with the smaller arc length.
const TIE_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PolylineError {
    #[error("centerline needs at least 2 points, got {0}")]
    TooFewPoints(usize),
    #[error("centerline point {0} is not finite")]
    NonFinite(usize),
    #[error("centerline points {0} and {1} coincide")]
    RepeatedPoint(usize, usize),
}

/// An ordered centerline with cached cumulative arc lengths.
#[derive(Debug, Clone, PartialEq)]
pub struct Polyline {
    points: Vec<Vec2>,
    cumulative: Vec<f64>,
}

impl Polyline {
    pub fn new(points: Vec<Vec2>) -> Result<Self, PolylineError> {
        if points.len() < 2 {
            return Err(PolylineError::TooFewPoints(points.len()));
        }
        if let Some(i) = points.iter().position(|p| !p.is_finite()) {
            return Err(PolylineError::NonFinite(i));
        }
        let mut cumulative = Vec::with_capacity(points.len());
        cumulative.push(0.0);
        for (i, w) in points.windows(2).enumerate() {
            let chord = w[0].distance(w[1]);
            if chord <= MIN_VERTEX_SEPARATION {
                return Err(PolylineError::RepeatedPoint(i, i + 1));
            }
            cumulative.push(cumulative[i] + chord);
        }
        Ok(Polyline { points, cumulative })
    }

    pub fn points(&self) -> &[Vec2] {
        &self.points
    }

    /// Sum of chord lengths.
    pub fn length(&self) -> f64 {
        *self.cumulative.last().expect("at least two points")
    }

    /// Point at arc length `s`, clamped to the polyline.
    pub fn point_at(&self, s: f64) -> Vec2 {
        let s = s.clamp(0.0, self.length());
        let k = self.subsegment_at(s);
        let (a, b) = (self.points[k], self.points[k + 1]);
        let t = (s - self.cumulative[k]) / (self.cumulative[k + 1] - self.cumulative[k]);
        a.add(b.sub(a).scale(t))
    }

    /// Heading of the subsegment containing arc length `s`.
    pub fn heading_at(&self, s: f64) -> f64 {
        let k = self.subsegment_at(s.clamp(0.0, self.length()));
        self.points[k + 1].sub(self.points[k]).heading()
    }

    fn subsegment_at(&self, s: f64) -> usize {
        let n = self.points.len() - 1;
        match self.cumulative[1..].iter().position(|&c| s <= c) {
            Some(k) => k,
            None => n - 1,
        }
    }

    fn subsegments(&self) -> impl Iterator<Item = (usize, Vec2, Vec2)> + '_ {
        self.points
            .windows(2)
            .enumerate()
            .map(|(k, w)| (k, w[0], w[1]))
    }

    /// Global minimum-distance projection of a pose.
    pub fn project(&self, x: f64, y: f64, psi: f64) -> FrenetProjection {
        let p = Vec2::new(x, y);
        let mut best: Option<(f64, f64, usize, f64)> = None; // (dist, s, subsegment, t)
        for (k, a, b) in self.subsegments() {
            let (t, dist) = closest_on_segment(p, a, b);
            let s = self.cumulative[k] + t * (self.cumulative[k + 1] - self.cumulative[k]);
            // strict improvement only: earlier subsegments win ties
            if best.is_none_or(|(bd, ..)| dist < bd - TIE_EPS) {
                best = Some((dist, s, k, t));
            }
        }
        let (dist, s, k, t) = best.expect("at least one subsegment");
        let (a, b) = (self.points[k], self.points[k + 1]);
        let tangent = b.sub(a);
        let foot = a.add(tangent.scale(t));
        let side = tangent.cross(p.sub(foot));
        let d_t = if side < 0.0 { -dist } else { dist };
        FrenetProjection {
            s: s.clamp(0.0, self.length()),
            d_t,
            phi: wrap_angle(psi - tangent.heading()),
        }
    }

    /// Minimum distance to another polyline.
    pub fn distance_to(&self, other: &Polyline) -> f64 {
        let mut best = f64::INFINITY;
        for (_, a, b) in self.subsegments() {
            for (_, c, d) in other.subsegments() {
                best = best.min(segment_distance(a, b, c, d).0);
            }
        }
        best
    }

    /// Where this centerline meets `other`, as (arc length on `self`, gap).
    ///
    /// Picks the earliest touching point along `self`; when the lines never
    /// touch, the point of minimum separation.
    pub fn meeting_point(&self, other: &Polyline) -> (f64, f64) {
        let mut best_gap = f64::INFINITY;
        let mut best_s = 0.0;
        for (k, a, b) in self.subsegments() {
            let chord = self.cumulative[k + 1] - self.cumulative[k];
            for (_, c, d) in other.subsegments() {
                let (gap, t) = segment_distance(a, b, c, d);
                let s = self.cumulative[k] + t * chord;
                let touching = gap <= CONTACT_EPS && best_gap <= CONTACT_EPS;
                if (touching && s < best_s) || (!touching && gap < best_gap - TIE_EPS) {
                    best_gap = gap;
                    best_s = s;
                }
            }
        }
        (best_s, best_gap)
    }
}

/// A pose expressed relative to one centerline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrenetProjection {
    /// Arc length to the matched point, in [0, L].
    pub s: f64,
    /// Signed lateral offset, positive to the left.
    pub d_t: f64,
    /// Yaw minus centerline heading, in (-pi, pi].
    pub phi: f64,
}

/// Projects the pose `(x, y, psi)` onto `centerline`.
///
/// Panics if the centerline is not a valid polyline; use [`Polyline::project`]
/// with a pre-validated line on hot paths.
pub fn project_point(centerline: &[Vec2], x: f64, y: f64, psi: f64) -> FrenetProjection {
    Polyline::new(centerline.to_vec())
        .expect("valid centerline")
        .project(x, y, psi)
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("standard deviations must be finite and positive (sigma_d={sigma_d}, sigma_p={sigma_p})")]
pub struct InvalidMatchParams {
    pub sigma_d: f64,
    pub sigma_p: f64,
}

/// Widths of the lateral and orientation Gaussians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchParams {
    pub sigma_d: f64,
    pub sigma_p: f64,
}

impl Default for MatchParams {
    fn default() -> Self {
        MatchParams {
            sigma_d: 1.5,
            sigma_p: 0.7,
        }
    }
}

impl MatchParams {
    pub fn new(sigma_d: f64, sigma_p: f64) -> Result<Self, InvalidMatchParams> {
        let p = MatchParams { sigma_d, sigma_p };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), InvalidMatchParams> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if ok(self.sigma_d) && ok(self.sigma_p) {
            Ok(())
        } else {
            Err(InvalidMatchParams {
                sigma_d: self.sigma_d,
                sigma_p: self.sigma_p,
            })
        }
    }
}

/// Lateral factor `exp(-d_t^2 / (2 sigma_d^2))`.
pub fn lateral_factor(d_t: f64, sigma_d: f64) -> f64 {
    (-(d_t * d_t) / (2.0 * sigma_d * sigma_d)).exp()
}

/// Orientation factor `exp(-(cos(phi) - 1)^2 / (2 sigma_p^2))`.
pub fn orientation_factor(phi: f64, sigma_p: f64) -> f64 {
    let c = phi.cos() - 1.0;
    (-(c * c) / (2.0 * sigma_p * sigma_p)).exp()
}

/// Probability that a pose with offset `d_t` and deviation `phi` belongs to the lane.
pub fn matching_probability(d_t: f64, phi: f64, params: &MatchParams) -> f64 {
    lateral_factor(d_t, params.sigma_d) * orientation_factor(phi, params.sigma_p)
}
