//! Discrete planar curves: arclength, turning-angle lift, curvature,
//! resampling and the chord quantities.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{self, Vec2};
use crate::potential::PotentialField;

/// Default witness for the almost-calibrated inequality.
pub const DEFAULT_DELTA: f64 = 0.05;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CurveError {
    #[error("curve has {0} nodes, at least 3 are required")]
    TooFewNodes(usize),
    #[error("nodes {index} and {} coincide", index + 1)]
    DuplicateNode { index: usize },
    #[error("segments {first} and {second} intersect")]
    SelfIntersection { first: usize, second: usize },
    #[error("{0} endpoint does not match its end condition")]
    EndpointMismatch(EndSide),
    #[error("node {node} is within the guard band of singularity {singularity}")]
    NodeTooCloseToSingularity { node: usize, singularity: usize },
    #[error("turning angle at node {index} is at least pi")]
    LiftJump { index: usize },
    #[error("operation needs both ends pinned")]
    NonCompactCurve,
    #[error("target spacing must be positive and finite")]
    InvalidSpacing,
    #[error("{0}")]
    InvalidShape(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EndSide {
    Start,
    End,
}

impl std::fmt::Display for EndSide {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            EndSide::Start => "start",
            EndSide::End => "end",
        })
    }
}

/// How a curve end is held.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EndKind {
    /// Fixed at the singularity with this index.
    Pinned(usize),
    /// Asymptotic to the ray `base + s * direction`, `s >= 0`.
    Ray { base: Vec2, direction: Vec2 },
}

impl EndKind {
    pub fn pinned_index(&self) -> Option<usize> {
        match *self {
            EndKind::Pinned(i) => Some(i),
            EndKind::Ray { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanarCurve {
    pub nodes: Vec<Vec2>,
    pub start: EndKind,
    pub end: EndKind,
    pub target_spacing: f64,
}

/// Oriented straight segment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub start: Vec2,
    pub end: Vec2,
}

impl Segment {
    pub fn new(start: Vec2, end: Vec2) -> Self {
        Segment { start, end }
    }

    pub fn direction(&self) -> Vec2 {
        self.end - self.start
    }

    pub fn length(&self) -> f64 {
        self.direction().norm()
    }

    pub fn angle(&self) -> f64 {
        let a = self.direction().angle();
        if a == -PI {
            PI
        } else {
            a
        }
    }
}

/// Continuous lift of the edge directions, one entry per edge.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleProfile {
    pub theta: Vec<f64>,
}

impl AngleProfile {
    pub fn inf(&self) -> f64 {
        self.theta.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn sup(&self) -> f64 {
        self.theta.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn range(&self) -> f64 {
        self.sup() - self.inf()
    }

    pub fn first(&self) -> f64 {
        self.theta[0]
    }

    pub fn last(&self) -> f64 {
        *self.theta.last().unwrap()
    }
}

/// Signed turning angle from edge `a` to edge `b`.
#[inline]
pub(crate) fn turn(a: Vec2, b: Vec2) -> f64 {
    a.cross(b).atan2(a.dot(b))
}

#[inline]
fn jump(t: f64) -> bool {
    t.abs() >= PI - 1e-12
}

/// Lift of the edge directions of an arbitrary polyline.
pub fn lift_edges(nodes: &[Vec2]) -> Result<Vec<f64>, CurveError> {
    let mut theta = Vec::with_capacity(nodes.len().saturating_sub(1));
    let first = Segment::new(nodes[0], nodes[1]).angle();
    theta.push(first);
    for i in 1..nodes.len() - 1 {
        let t = turn(nodes[i] - nodes[i - 1], nodes[i + 1] - nodes[i]);
        if jump(t) {
            return Err(CurveError::LiftJump { index: i });
        }
        let prev = theta[i - 1];
        theta.push(prev + t);
    }
    Ok(theta)
}

/// Discrete curvature at interior nodes of an arbitrary polyline.
pub fn polyline_curvature(nodes: &[Vec2]) -> Result<Vec<f64>, CurveError> {
    let mut kappa = Vec::with_capacity(nodes.len().saturating_sub(2));
    for i in 1..nodes.len() - 1 {
        let a = nodes[i] - nodes[i - 1];
        let b = nodes[i + 1] - nodes[i];
        let t = turn(a, b);
        if jump(t) {
            return Err(CurveError::LiftJump { index: i });
        }
        kappa.push(2.0 * t / (a.norm() + b.norm()));
    }
    Ok(kappa)
}

/// Unit normal (tangent rotated by +90 degrees) at interior node `i`, from
/// the bisector of the adjacent unit edge tangents.
pub fn node_normal(nodes: &[Vec2], i: usize) -> Vec2 {
    let a = (nodes[i] - nodes[i - 1]).normalized();
    let b = (nodes[i + 1] - nodes[i]).normalized();
    let t = a + b;
    let n = t.norm();
    if n > 1e-300 {
        (t / n).perp()
    } else {
        a.perp()
    }
}

fn lagrange4(s: [f64; 4], p: [Vec2; 4], t: f64) -> Vec2 {
    let mut out = Vec2::ZERO;
    for i in 0..4 {
        let mut w = 1.0;
        for j in 0..4 {
            if i != j {
                w *= (t - s[j]) / (s[i] - s[j]);
            }
        }
        out += p[i] * w;
    }
    out
}

impl PlanarCurve {
    pub fn new(nodes: Vec<Vec2>, start: EndKind, end: EndKind, target_spacing: f64) -> Self {
        PlanarCurve { nodes, start, end, target_spacing }
    }

    /// Curve pinned at singularities `start` and `end`.
    pub fn pinned(nodes: Vec<Vec2>, start: usize, end: usize, target_spacing: f64) -> Self {
        PlanarCurve::new(nodes, EndKind::Pinned(start), EndKind::Pinned(end), target_spacing)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn first(&self) -> Vec2 {
        self.nodes[0]
    }

    pub fn last(&self) -> Vec2 {
        *self.nodes.last().unwrap()
    }

    pub fn is_compact(&self) -> bool {
        matches!((self.start, self.end), (EndKind::Pinned(_), EndKind::Pinned(_)))
    }

    /// Indices of singularities the curve is pinned to.
    pub fn endpoint_singularities(&self) -> Vec<usize> {
        [self.start, self.end].iter().filter_map(|e| e.pinned_index()).collect()
    }

    pub fn edge_lengths(&self) -> Vec<f64> {
        self.nodes.windows(2).map(|w| w[0].dist(w[1])).collect()
    }

    pub fn length(&self) -> f64 {
        self.nodes.windows(2).map(|w| w[0].dist(w[1])).sum()
    }

    /// Checks the structural invariants against `field`.
    pub fn validate(&self, field: &PotentialField) -> Result<(), CurveError> {
        let n = self.nodes.len();
        if n < 3 {
            return Err(CurveError::TooFewNodes(n));
        }
        if !(self.target_spacing.is_finite() && self.target_spacing > 0.0) {
            return Err(CurveError::InvalidSpacing);
        }
        if let Some(i) = self.nodes.iter().position(|p| !p.is_finite()) {
            return Err(CurveError::InvalidShape(format!("node {i} is not finite")));
        }
        if let Some(index) = self.nodes.windows(2).position(|w| w[0] == w[1]) {
            return Err(CurveError::DuplicateNode { index });
        }
        for (side, end, node) in [(EndSide::Start, self.start, self.first()), (EndSide::End, self.end, self.last())] {
            let ok = match end {
                EndKind::Pinned(i) => i < field.len() && field.singularity(i) == node,
                EndKind::Ray { base, direction } => {
                    let off = node - base;
                    (direction.norm() - 1.0).abs() < 1e-12
                        && off.dot(direction) > 0.0
                        && off.cross(direction).abs() <= 1e-9 * off.norm().max(1.0)
                }
            };
            if !ok {
                return Err(CurveError::EndpointMismatch(side));
            }
        }
        let guard = field.guard_band();
        for (node, &x) in self.nodes.iter().enumerate().take(n - 1).skip(1) {
            for (singularity, &p) in field.singularities().iter().enumerate() {
                if x.dist(p) <= guard {
                    return Err(CurveError::NodeTooCloseToSingularity { node, singularity });
                }
            }
        }
        if let Some((first, second)) = geom::find_self_intersection(&self.nodes, false) {
            return Err(CurveError::SelfIntersection { first, second });
        }
        Ok(())
    }

    pub fn curvature(&self) -> Result<Vec<f64>, CurveError> {
        polyline_curvature(&self.nodes)
    }

    pub fn angle_lift(&self) -> Result<AngleProfile, CurveError> {
        Ok(AngleProfile { theta: lift_edges(&self.nodes)? })
    }

    /// `(inf theta, sup theta)` of the lift.
    pub fn angle_range(&self) -> Result<(f64, f64), CurveError> {
        let p = self.angle_lift()?;
        Ok((p.inf(), p.sup()))
    }

    pub fn is_almost_calibrated(&self, delta: f64) -> bool {
        match self.angle_range() {
            Ok((lo, hi)) => hi - lo <= PI - delta,
            Err(_) => false,
        }
    }

    fn convexity_tol(&self) -> f64 {
        1e-9 / self.target_spacing
    }

    pub fn is_convex(&self) -> bool {
        let Ok(k) = self.curvature() else { return false };
        let tol = self.convexity_tol();
        k.iter().all(|&v| v >= -tol) || k.iter().all(|&v| v <= tol)
    }

    pub fn is_strictly_convex(&self) -> bool {
        let Ok(k) = self.curvature() else { return false };
        let tol = self.convexity_tol();
        k.iter().all(|&v| v > tol) || k.iter().all(|&v| v < -tol)
    }

    pub fn chord(&self) -> Result<Segment, CurveError> {
        if !self.is_compact() {
            return Err(CurveError::NonCompactCurve);
        }
        Ok(Segment::new(self.first(), self.last()))
    }

    /// `2 pi (dx + i dy)` for the endpoint displacement.
    pub fn central_charge(&self) -> Result<Complex64, CurveError> {
        let d = self.chord()?.direction();
        Ok(Complex64::new(2.0 * PI * d.x, 2.0 * PI * d.y))
    }

    pub fn phase(&self) -> Result<f64, CurveError> {
        Ok(self.chord()?.angle())
    }

    /// Redistributes nodes at near-uniform arclength spacing `target_spacing`.
    pub fn resample(&self) -> PlanarCurve {
        let spacing = vec![self.target_spacing; self.nodes.len() - 1];
        self.resample_with_spacing(&spacing)
    }

    /// Redistributes nodes so that the local spacing along old edge `i` is
    /// about `spacing[i]`. Interior nodes are placed on a piecewise cubic
    /// through the old nodes; the nodes next to each end, and any result that
    /// would widen the angle range, fall back to linear interpolation so the
    /// range never grows.
    pub fn resample_with_spacing(&self, spacing: &[f64]) -> PlanarCurve {
        let old = &self.nodes;
        let n = old.len();
        let mut s = Vec::with_capacity(n);
        let mut count = Vec::with_capacity(n);
        s.push(0.0);
        count.push(0.0);
        for i in 0..n - 1 {
            let e = old[i].dist(old[i + 1]);
            s.push(s[i] + e);
            count.push(count[i] + e / spacing[i]);
        }
        let total = count[n - 1];
        let m = (total.round() as usize).max(2);

        let place = |cubic: bool| -> Vec<Vec2> {
            let mut out = Vec::with_capacity(m + 1);
            out.push(old[0]);
            let mut k = 0;
            for j in 1..m {
                let c = total * j as f64 / m as f64;
                while k + 2 < n && count[k + 1] <= c {
                    k += 1;
                }
                let frac = ((c - count[k]) / (count[k + 1] - count[k])).clamp(0.0, 1.0);
                let linear = !cubic || j == 1 || j == m - 1 || k == 0 || k + 2 >= n;
                let x = if linear {
                    old[k].lerp(old[k + 1], frac)
                } else {
                    let t = s[k] + frac * (s[k + 1] - s[k]);
                    lagrange4(
                        [s[k - 1], s[k], s[k + 1], s[k + 2]],
                        [old[k - 1], old[k], old[k + 1], old[k + 2]],
                        t,
                    )
                };
                out.push(x);
            }
            out.push(old[n - 1]);
            out
        };

        let mut nodes = place(true);
        let acceptable = |cand: &[Vec2]| -> bool {
            if cand.windows(2).any(|w| w[0] == w[1]) {
                return false;
            }
            match (lift_edges(old), lift_edges(cand)) {
                (Ok(a), Ok(b)) => {
                    let lo = a.iter().copied().fold(f64::INFINITY, f64::min);
                    let hi = a.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                    b.iter().all(|&t| t >= lo && t <= hi)
                }
                (Err(_), Ok(_)) => true,
                _ => false,
            }
        };
        if !acceptable(&nodes) {
            nodes = place(false);
        }
        PlanarCurve { nodes, ..self.clone() }
    }
}

/// Nodes of a circular arc from `a` to `b` whose apex sits `sagitta` to the
/// left of the chord (negative values bulge right). The arc must turn by less
/// than pi, i.e. `|sagitta| < |b - a| / 2`.
pub fn circular_arc(a: Vec2, b: Vec2, sagitta: f64, nodes: usize) -> Result<Vec<Vec2>, CurveError> {
    let chord = b - a;
    let c = 0.5 * chord.norm();
    if nodes < 3 || c == 0.0 {
        return Err(CurveError::InvalidShape("arc needs at least 3 nodes and distinct endpoints".into()));
    }
    if !(sagitta.abs() < c) {
        return Err(CurveError::InvalidShape(format!(
            "sagitta {sagitta} is not below half the chord length {c}; the arc would turn by pi or more"
        )));
    }
    if sagitta == 0.0 {
        return Ok((0..nodes).map(|k| a.lerp(b, k as f64 / (nodes - 1) as f64)).collect());
    }
    let h = sagitta.abs();
    let sign = sagitta.signum();
    let r = (c * c + h * h) / (2.0 * h);
    let left = chord.normalized().perp();
    let centre = a + chord * 0.5 - left * (sign * (r - h));
    let half = c.atan2(r - h);
    let u0 = a - centre;
    let mut pts: Vec<Vec2> = (0..nodes)
        .map(|k| centre + u0.rotate(-sign * 2.0 * half * k as f64 / (nodes - 1) as f64))
        .collect();
    pts[0] = a;
    pts[nodes - 1] = b;
    Ok(pts)
}

/// Cap of an ellipse whose centre sits `offset` beyond the chord `a -> b`,
/// reaching `height` above the chord (positive is left). Unlike a circular
/// arc it can rise higher than half the chord while turning by less than pi.
pub fn elliptic_cap(a: Vec2, b: Vec2, height: f64, offset: f64, nodes: usize) -> Result<Vec<Vec2>, CurveError> {
    let chord = b - a;
    let c = 0.5 * chord.norm();
    if nodes < 3 || c == 0.0 || height == 0.0 || !(offset > 0.0) {
        return Err(CurveError::InvalidShape("elliptic cap needs 3 nodes, distinct endpoints, nonzero height and positive offset".into()));
    }
    let semi_y = height.abs() + offset;
    let semi_x = c / (1.0 - (offset / semi_y).powi(2)).sqrt();
    let u_dir = chord / (2.0 * c);
    let v_dir = u_dir.perp() * height.signum();
    let centre = a + chord * 0.5 - v_dir * offset;
    let u0 = (offset / semi_y).asin();
    let mut pts: Vec<Vec2> = (0..nodes)
        .map(|k| {
            let u = u0 + (std::f64::consts::PI - 2.0 * u0) * k as f64 / (nodes - 1) as f64;
            centre - u_dir * (semi_x * u.cos()) + v_dir * (semi_y * u.sin())
        })
        .collect();
    pts[0] = a;
    pts[nodes - 1] = b;
    Ok(pts)
}

/// Densely samples a centripetal Catmull-Rom spline through `waypoints`, then
/// returns nodes spaced about `spacing` apart. The first and last waypoints
/// are reproduced exactly.
pub fn spline_through(waypoints: &[Vec2], spacing: f64) -> Result<Vec<Vec2>, CurveError> {
    if waypoints.len() < 2 || !(spacing > 0.0) {
        return Err(CurveError::InvalidShape("spline needs two waypoints and positive spacing".into()));
    }
    let n = waypoints.len();
    let get = |i: isize| -> Vec2 {
        if i < 0 {
            waypoints[0] * 2.0 - waypoints[1]
        } else if i as usize >= n {
            waypoints[n - 1] * 2.0 - waypoints[n - 2]
        } else {
            waypoints[i as usize]
        }
    };
    let mut dense = vec![waypoints[0]];
    let per = 400;
    for i in 0..n - 1 {
        let (p0, p1, p2, p3) = (get(i as isize - 1), get(i as isize), get(i as isize + 1), get(i as isize + 2));
        let knot = |a: Vec2, b: Vec2| a.dist(b).sqrt().max(1e-12);
        let t0 = 0.0;
        let t1 = t0 + knot(p0, p1);
        let t2 = t1 + knot(p1, p2);
        let t3 = t2 + knot(p2, p3);
        for k in 1..=per {
            let t = t1 + (t2 - t1) * k as f64 / per as f64;
            let a1 = p0 * ((t1 - t) / (t1 - t0)) + p1 * ((t - t0) / (t1 - t0));
            let a2 = p1 * ((t2 - t) / (t2 - t1)) + p2 * ((t - t1) / (t2 - t1));
            let a3 = p2 * ((t3 - t) / (t3 - t2)) + p3 * ((t - t2) / (t3 - t2));
            let b1 = a1 * ((t2 - t) / (t2 - t0)) + a2 * ((t - t0) / (t2 - t0));
            let b2 = a2 * ((t3 - t) / (t3 - t1)) + a3 * ((t - t1) / (t3 - t1));
            dense.push(b1 * ((t2 - t) / (t2 - t1)) + b2 * ((t - t1) / (t2 - t1)));
        }
    }
    *dense.last_mut().unwrap() = waypoints[n - 1];
    Ok(uniform_polyline(&dense, spacing))
}

/// Linear arclength resampling of a dense polyline.
pub(crate) fn uniform_polyline(dense: &[Vec2], spacing: f64) -> Vec<Vec2> {
    let mut s = vec![0.0];
    for w in dense.windows(2) {
        s.push(s.last().unwrap() + w[0].dist(w[1]));
    }
    let total = *s.last().unwrap();
    let m = ((total / spacing).round() as usize).max(2);
    let mut out = vec![dense[0]];
    let mut k = 0;
    for j in 1..m {
        let t = total * j as f64 / m as f64;
        while k + 2 < dense.len() && s[k + 1] <= t {
            k += 1;
        }
        let frac = ((t - s[k]) / (s[k + 1] - s[k])).clamp(0.0, 1.0);
        out.push(dense[k].lerp(dense[k + 1], frac));
    }
    out.push(*dense.last().unwrap());
    out
}

/// Curve asymptotic to two rays leaving `apex` along unit directions
/// `incoming` (traversed inward) and `outgoing`. Near the apex the curve is
/// pushed `offset` away from it, towards the reflex side, over a length scale
/// `width`. Ends are placed on the rays at distance `extent`.
pub fn ray_bridge(
    apex: Vec2,
    incoming: Vec2,
    outgoing: Vec2,
    offset: f64,
    width: f64,
    extent: f64,
    spacing: f64,
) -> Result<Vec<Vec2>, CurveError> {
    if !(width > 0.0 && extent > 0.0 && spacing > 0.0 && offset > 0.0) {
        return Err(CurveError::InvalidShape("ray bridge needs positive offset, width, extent and spacing".into()));
    }
    let (dm, dp) = (incoming.normalized(), outgoing.normalized());
    let sum = dm + dp;
    if sum.norm() < 1e-9 || dm.cross(dp).abs() < 1e-9 {
        return Err(CurveError::InvalidShape("rays must span a proper wedge".into()));
    }
    let bis = -(sum.normalized());
    let g = |u: f64| u * (1.0 + (u / width).tanh()) / 2.0;
    let samples = ((2.0 * extent / spacing) as usize * 8).max(2000);
    let mut dense: Vec<Vec2> = (0..=samples)
        .map(|k| {
            let u = -extent + 2.0 * extent * k as f64 / samples as f64;
            let sech = 1.0 / (u / width).cosh();
            apex + dm * g(-u) + dp * g(u) + bis * (offset * sech * sech)
        })
        .collect();
    dense[0] = apex + dm * extent;
    dense[samples] = apex + dp * extent;
    Ok(uniform_polyline(&dense, spacing))
}
