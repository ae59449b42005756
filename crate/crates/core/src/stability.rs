//! Stability of graded curves, the convex-hull limit rule, chain structure
//! and destabilization orderings.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curve::{CurveError, PlanarCurve, Segment, DEFAULT_DELTA};
use crate::geom::{self, Vec2};
use crate::potential::PotentialField;

/// Phases closer than this are treated as equal.
pub const PHASE_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StabilityError {
    #[error("curve is not almost calibrated")]
    NotAlmostCalibrated,
    #[error("curve is not strictly convex")]
    NotStrictlyConvex,
    #[error("singularity {index} lies on the curve or its chord")]
    SingularityOnCurve { index: usize },
    #[error("component {component} is {distance:e} from its chord")]
    ComponentNotStationary { component: usize, distance: f64 },
    #[error(transparent)]
    Curve(#[from] CurveError),
}

/// Split of the curve at a singularity in the closed region bounded by the
/// curve and its chord. Angles are measured against the chord, reflected if
/// necessary so the singularity sits on the left.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    pub singularity: usize,
    pub theta_bar_1: f64,
    pub theta_bar_2: f64,
    pub len_1: f64,
    pub len_2: f64,
    pub on_chord: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Classification {
    Stable,
    SemiStable,
    StrictlyUnstable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FlowClassification {
    FlowStable,
    FlowSemiStable,
    StrictlyFlowUnstable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityVerdict {
    pub classification: Classification,
    pub flow_classification: FlowClassification,
    pub witnesses: Vec<Decomposition>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainReport {
    pub segments: Vec<Segment>,
    /// Singularity at each chain vertex (`None` for a free ray end).
    pub vertices: Vec<Option<usize>>,
    pub phases: Vec<f64>,
    pub a_k_valid: bool,
    pub phase_monotone: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DestabilizationOrder {
    /// One-based chain indices in destabilization order.
    pub order: Vec<usize>,
    pub bracketing: String,
}

/// Chord-aligned frame: `x` along the chord from its start, `y` to the left.
#[derive(Debug, Clone, Copy)]
struct ChordFrame {
    origin: Vec2,
    u: Vec2,
    len: f64,
    angle: f64,
}

impl ChordFrame {
    fn new(chord: Segment) -> Self {
        let d = chord.direction();
        ChordFrame { origin: chord.start, u: d / d.norm(), len: d.norm(), angle: chord.angle() }
    }

    fn local(&self, p: Vec2) -> Vec2 {
        let r = p - self.origin;
        Vec2::new(r.dot(self.u), self.u.cross(r))
    }

    fn global(&self, l: Vec2) -> Vec2 {
        self.origin + self.u * l.x + self.u.perp() * l.y
    }
}

fn compact_chord(curve: &PlanarCurve) -> Result<Segment, StabilityError> {
    Ok(curve.chord()?)
}

fn non_endpoint(curve: &PlanarCurve, q: usize) -> bool {
    !curve.endpoint_singularities().contains(&q)
}

/// Non-endpoint singularities strictly inside the region bounded by the curve
/// and its reversed chord, plus those on the chord itself.
fn region_singularities(field: &PotentialField, curve: &PlanarCurve) -> Result<(Vec<usize>, Vec<usize>), StabilityError> {
    let chord = compact_chord(curve)?;
    let guard = field.guard_band();
    let (mut inside, mut on_chord) = (Vec::new(), Vec::new());
    for (q, &p) in field.singularities().iter().enumerate() {
        if !non_endpoint(curve, q) {
            continue;
        }
        if geom::point_polyline(p, &curve.nodes).0 <= guard {
            return Err(StabilityError::SingularityOnCurve { index: q });
        }
        if geom::point_segment(p, chord.start, chord.end).0 <= guard {
            on_chord.push(q);
        } else if geom::point_in_polygon(p, &curve.nodes) {
            inside.push(q);
        }
    }
    Ok((inside, on_chord))
}

/// Non-endpoint singularities strictly inside the region bounded by the curve
/// and its reversed chord (even-odd rule).
pub fn enclosed_singularities(field: &PotentialField, curve: &PlanarCurve) -> Result<Vec<usize>, StabilityError> {
    let (inside, on_chord) = region_singularities(field, curve)?;
    match on_chord.first() {
        Some(&index) => Err(StabilityError::SingularityOnCurve { index }),
        None => Ok(inside),
    }
}

/// Lift of the curve's edge angles relative to the chord, shifted by a
/// multiple of 2 pi so that its range contains 0.
fn relative_range(curve: &PlanarCurve, frame: &ChordFrame) -> Result<(f64, f64), StabilityError> {
    let lift = curve.angle_lift()?;
    let (lo, hi) = (lift.inf() - frame.angle, lift.sup() - frame.angle);
    let k = ((lo + hi) / 2.0 / TAU).round();
    Ok((lo - k * TAU, hi - k * TAU))
}

pub fn classify(field: &PotentialField, curve: &PlanarCurve) -> Result<StabilityVerdict, StabilityError> {
    let chord = compact_chord(curve)?;
    if !curve.is_almost_calibrated(DEFAULT_DELTA) {
        return Err(StabilityError::NotAlmostCalibrated);
    }
    let frame = ChordFrame::new(chord);
    let guard = field.guard_band();
    let (inf, sup) = relative_range(curve, &frame)?;
    let length = curve.length();

    let mut witnesses = Vec::new();
    let mut flow_strict = false;
    let mut flow_semi = false;
    for (q, &p) in field.singularities().iter().enumerate() {
        if !non_endpoint(curve, q) {
            continue;
        }
        let on_chord = geom::point_segment(p, chord.start, chord.end).0 <= guard;
        if !on_chord && !geom::point_in_polygon(p, &curve.nodes) {
            continue;
        }
        let l = frame.local(p);
        let side = if l.y < 0.0 { -1.0 } else { 1.0 };
        let y = if on_chord { 0.0 } else { l.y.abs() };
        let d = Decomposition {
            singularity: q,
            theta_bar_1: y.atan2(l.x),
            theta_bar_2: (-y).atan2(frame.len - l.x),
            len_1: p.dist(chord.start),
            len_2: p.dist(chord.end),
            on_chord,
        };
        // The curve's angles seen in the frame where q is on the left.
        let (a, b) = if side > 0.0 { (inf, sup) } else { (-sup, -inf) };
        let (tmin, tmax) = (d.theta_bar_1.min(d.theta_bar_2), d.theta_bar_1.max(d.theta_bar_2));
        let cond_a = !(tmin > a && tmax < b);
        let cond_b = length < d.len_1 + d.len_2;
        if !cond_a && !cond_b {
            if d.theta_bar_1 > d.theta_bar_2 {
                flow_strict = true;
            } else {
                flow_semi = true;
            }
        }
        if d.theta_bar_1 >= d.theta_bar_2 {
            witnesses.push(d);
        }
    }
    let classification = if witnesses.iter().any(|d| d.theta_bar_1 > d.theta_bar_2) {
        Classification::StrictlyUnstable
    } else if witnesses.is_empty() {
        Classification::Stable
    } else {
        Classification::SemiStable
    };
    let flow_classification = if flow_strict {
        FlowClassification::StrictlyFlowUnstable
    } else if flow_semi {
        FlowClassification::FlowSemiStable
    } else {
        FlowClassification::FlowStable
    };
    Ok(StabilityVerdict { classification, flow_classification, witnesses })
}

/// Splits the polyline through `vertices` at every singularity lying on one
/// of its segments.
fn subdivide(field: &PotentialField, vertices: &[(Vec2, Option<usize>)], tol: f64) -> Vec<(Vec2, Option<usize>)> {
    let mut out = vec![vertices[0]];
    for w in vertices.windows(2) {
        let (a, b) = (w[0].0, w[1].0);
        let mut inner: Vec<(f64, Vec2, usize)> = field
            .singularities()
            .iter()
            .enumerate()
            .filter(|&(q, _)| Some(q) != w[0].1 && Some(q) != w[1].1)
            .filter_map(|(q, &p)| {
                let (d, _, t) = geom::point_segment(p, a, b);
                (d <= tol && t > 0.0 && t < 1.0).then_some((t, p, q))
            })
            .collect();
        inner.sort_by(|x, y| x.0.total_cmp(&y.0));
        out.extend(inner.into_iter().map(|(_, p, q)| (p, Some(q))));
        out.push(w[1]);
    }
    out
}

impl ChainReport {
    /// Builds the report for the polyline through `vertices`.
    pub fn from_vertices(vertices: &[(Vec2, Option<usize>)]) -> ChainReport {
        let segments: Vec<Segment> = vertices.windows(2).map(|w| Segment::new(w[0].0, w[1].0)).collect();
        let reference = Segment::new(vertices[0].0, vertices[vertices.len() - 1].0).angle();
        let phases: Vec<f64> = segments.iter().map(|s| reference + geom::wrap_angle(s.angle() - reference)).collect();
        let k = segments.len();
        let mut a_k_valid = true;
        for i in 0..k {
            for j in i + 1..k {
                let (s, t) = (segments[i], segments[j]);
                if j == i + 1 {
                    // Share exactly the junction: not folding back onto each other.
                    let folds = s.direction().cross(t.direction()) == 0.0 && s.direction().dot(t.direction()) < 0.0;
                    if s.end != t.start || folds || s.length() == 0.0 || t.length() == 0.0 {
                        a_k_valid = false;
                    }
                } else if geom::segments_intersect(s.start, s.end, t.start, t.end) {
                    a_k_valid = false;
                }
            }
        }
        let phase_monotone = phases.windows(2).all(|w| w[0] >= w[1] - PHASE_TOL);
        ChainReport {
            segments,
            vertices: vertices.iter().map(|v| v.1).collect(),
            phases,
            a_k_valid,
            phase_monotone,
        }
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    /// Vertex coordinates along the chain.
    pub fn points(&self) -> Vec<Vec2> {
        let mut pts: Vec<Vec2> = self.segments.iter().map(|s| s.start).collect();
        if let Some(s) = self.segments.last() {
            pts.push(s.end);
        }
        pts
    }
}

/// Predicted limit chain: boundary of the convex hull of the endpoints and
/// the enclosed singularities, minus the chord.
pub fn limit_oracle(field: &PotentialField, curve: &PlanarCurve) -> Result<ChainReport, StabilityError> {
    let chord = compact_chord(curve)?;
    if !curve.is_strictly_convex() {
        return Err(StabilityError::NotStrictlyConvex);
    }
    if !curve.is_almost_calibrated(DEFAULT_DELTA) {
        return Err(StabilityError::NotAlmostCalibrated);
    }
    let (enclosed, _) = region_singularities(field, curve)?;
    let frame = ChordFrame::new(chord);
    // Work in the frame where the curve lies above the chord.
    let side = if geom::signed_area(&curve.nodes) < 0.0 { 1.0 } else { -1.0 };
    let to_local = |p: Vec2| {
        let l = frame.local(p);
        Vec2::new(l.x, side * l.y)
    };
    let (start, end) = (curve.start.pinned_index(), curve.end.pinned_index());
    let mut pts: Vec<(Vec2, Option<usize>)> = vec![(to_local(chord.start), start), (to_local(chord.end), end)];
    pts.extend(enclosed.iter().map(|&q| (to_local(field.singularity(q)), Some(q))));
    pts.sort_by(|a, b| a.0.x.total_cmp(&b.0.x).then(a.0.y.total_cmp(&b.0.y)));

    // Upper hull, left to right, dropping collinear points.
    let mut hull: Vec<(Vec2, Option<usize>)> = Vec::new();
    for p in pts {
        while hull.len() >= 2 {
            let (o, a) = (hull[hull.len() - 2].0, hull[hull.len() - 1].0);
            if (a - o).cross(p.0 - o) >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    let global: Vec<(Vec2, Option<usize>)> = hull
        .into_iter()
        .map(|(l, q)| match q {
            Some(q) => (field.singularity(q), Some(q)),
            None => (frame.global(Vec2::new(l.x, side * l.y)), None),
        })
        .collect();
    Ok(ChainReport::from_vertices(&subdivide(field, &global, field.guard_band())))
}

/// Chain of the final components of a flow: each must lie within `tolerance`
/// (Hausdorff) of its chord.
pub fn chain_report(field: &PotentialField, components: &[PlanarCurve], tolerance: f64) -> Result<ChainReport, StabilityError> {
    let mut vertices: Vec<(Vec2, Option<usize>)> = Vec::new();
    for (component, c) in components.iter().enumerate() {
        let chord = [c.first(), c.last()];
        let distance = geom::hausdorff(&c.nodes, &chord, 4);
        if distance > tolerance {
            return Err(StabilityError::ComponentNotStationary { component, distance });
        }
        if vertices.is_empty() {
            vertices.push((c.first(), c.start.pinned_index()));
        }
        vertices.push((c.last(), c.end.pinned_index()));
    }
    Ok(ChainReport::from_vertices(&subdivide(field, &vertices, field.guard_band())))
}

/// Segments sorted by non-increasing phase (stable among ties), with the
/// nested connect-sum bracketing.
pub fn destabilization_order(chain: &ChainReport) -> DestabilizationOrder {
    let mut order: Vec<usize> = Vec::with_capacity(chain.len());
    for i in 0..chain.len() {
        let pos = order
            .iter()
            .position(|&j| chain.phases[i] > chain.phases[j] + PHASE_TOL)
            .unwrap_or(order.len());
        order.insert(pos, i);
    }
    let names: Vec<String> = order.iter().map(|i| format!("L{}", i + 1)).collect();
    let mut bracketing = names.last().cloned().unwrap_or_default();
    for (k, name) in names.iter().enumerate().rev().skip(1) {
        bracketing = if k + 2 == names.len() {
            format!("{name} # {bracketing}")
        } else {
            format!("{name} # ({bracketing})")
        };
    }
    DestabilizationOrder { order: order.into_iter().map(|i| i + 1).collect(), bracketing }
}

/// Phases in degrees, for reporting.
pub fn phases_degrees(chain: &ChainReport) -> Vec<f64> {
    chain.phases.iter().map(|p| p * 180.0 / PI).collect()
}
