//! Triads and pacman disks: the weighted area swept between the evolving
//! curve and a fixed chain of straight segments through the triad vertices.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curve::{CurveError, PlanarCurve};
use crate::flow::{FlowSnapshot, ResidualStats};
use crate::geom::{self, Vec2};
use crate::potential::PotentialField;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PacmanError {
    #[error("triad apex is not strictly inside the region bounded by the curve and its chord")]
    VertexNotEnclosed,
    #[error("curve crosses the triad barrier")]
    DisconnectedInterior,
    #[error("triad vertices are collinear")]
    DegenerateCollinear,
    #[error("curve endpoints do not match the triad vertices")]
    EndpointMismatch,
    #[error("singularity index {0} out of range")]
    InvalidIndex(usize),
    #[error("bound needs theta_plus < theta_minus (got {theta_plus} >= {theta_minus})")]
    NotStrictlyDecreasing { theta_minus: f64, theta_plus: f64 },
    #[error("triad broken at snapshot {index}: {reason}")]
    TriadBrokenDuringWindow { index: usize, reason: String },
    #[error("need at least two snapshots")]
    TooFewSnapshots,
    #[error(transparent)]
    Curve(#[from] CurveError),
}

/// An outer triad vertex: a singularity, or a point at infinity reached
/// along a ray from the apex in `direction`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TriadVertex {
    Singularity(usize),
    AtInfinity { direction: Vec2 },
}

/// Barrier `gamma_- = minus -> via_minus -> apex`,
/// `gamma_+ = apex -> via_plus -> plus`, all straight segments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Triad {
    pub minus: TriadVertex,
    pub plus: TriadVertex,
    pub apex: usize,
    #[serde(default)]
    pub via_minus: Vec<usize>,
    #[serde(default)]
    pub via_plus: Vec<usize>,
}

/// Angles of the two legs against the chord, in the frame where the curve
/// lies to the left of the barrier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TriadAngles {
    pub theta_minus: f64,
    pub theta_plus: f64,
    /// +1 when the curve runs to the left of the barrier, -1 otherwise.
    pub orientation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AreaDerivativeReport {
    pub residual: ResidualStats,
    /// Measured `(A(t + dt) - A(t)) / dt` per consecutive pair.
    pub rates: Vec<f64>,
    /// Oriented endpoint angle difference, averaged over each pair.
    pub predicted: Vec<f64>,
}

impl Triad {
    pub fn compact(minus: usize, plus: usize, apex: usize) -> Self {
        Triad {
            minus: TriadVertex::Singularity(minus),
            plus: TriadVertex::Singularity(plus),
            apex,
            via_minus: Vec::new(),
            via_plus: Vec::new(),
        }
    }

    fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        let outer = [self.minus, self.plus].into_iter().filter_map(|v| match v {
            TriadVertex::Singularity(i) => Some(i),
            TriadVertex::AtInfinity { .. } => None,
        });
        outer.chain(std::iter::once(self.apex)).chain(self.via_minus.iter().copied()).chain(self.via_plus.iter().copied())
    }

    pub fn check_indices(&self, field: &PotentialField) -> Result<(), PacmanError> {
        match self.indices().find(|&i| i >= field.len()) {
            Some(i) => Err(PacmanError::InvalidIndex(i)),
            None => Ok(()),
        }
    }

    /// Closed loop: the curve followed by the barrier traversed backwards.
    /// Points at infinity are represented by the curve's own end nodes.
    pub fn region(&self, field: &PotentialField, curve: &PlanarCurve) -> Vec<Vec2> {
        let mut poly = curve.nodes.clone();
        poly.extend(self.via_plus.iter().rev().map(|&i| field.singularity(i)));
        poly.push(field.singularity(self.apex));
        poly.extend(self.via_minus.iter().rev().map(|&i| field.singularity(i)));
        poly
    }

    /// Directions of the legs `p_- -> p` and `p -> p_+`.
    fn legs(&self, field: &PotentialField) -> (Vec2, Vec2) {
        let p = field.singularity(self.apex);
        let dm = match self.minus {
            TriadVertex::Singularity(i) => p - field.singularity(i),
            TriadVertex::AtInfinity { direction } => -direction,
        };
        let dp = match self.plus {
            TriadVertex::Singularity(i) => field.singularity(i) - p,
            TriadVertex::AtInfinity { direction } => direction,
        };
        (dm, dp)
    }

    pub fn angles(&self, field: &PotentialField, curve: &PlanarCurve) -> TriadAngles {
        let (dm, dp) = self.legs(field);
        let orientation = if geom::signed_area(&self.region(field, curve)) <= 0.0 { 1.0 } else { -1.0 };
        let reference = match (self.minus, self.plus) {
            (TriadVertex::Singularity(a), TriadVertex::Singularity(b)) => (field.singularity(b) - field.singularity(a)).angle(),
            _ => dm.angle(),
        };
        TriadAngles {
            theta_minus: orientation * geom::wrap_angle(dm.angle() - reference),
            theta_plus: orientation * geom::wrap_angle(dp.angle() - reference),
            orientation,
        }
    }
}

fn on_ray(x: Vec2, base: Vec2, direction: Vec2) -> bool {
    let r = x - base;
    let d = direction.normalized();
    r.dot(d) > 0.0 && r.cross(d).abs() <= 1e-9 * r.norm().max(1.0)
}

pub fn validate_triad(field: &PotentialField, triad: &Triad, curve: &PlanarCurve) -> Result<(), PacmanError> {
    triad.check_indices(field)?;
    let guard = field.guard_band();
    let p = field.singularity(triad.apex);
    let (dm, dp) = triad.legs(field);
    if dm.cross(dp).abs() <= guard * dm.norm().max(dp.norm()) {
        return Err(PacmanError::DegenerateCollinear);
    }
    let end_ok = |v: TriadVertex, x: Vec2| match v {
        TriadVertex::Singularity(i) => x.dist(field.singularity(i)) <= guard,
        TriadVertex::AtInfinity { direction } => on_ray(x, p, direction),
    };
    if curve.len() < 2 || !end_ok(triad.minus, curve.first()) || !end_ok(triad.plus, curve.last()) {
        return Err(PacmanError::EndpointMismatch);
    }
    let nodes = &curve.nodes;
    if geom::point_polygon_boundary(p, nodes) <= guard || !geom::point_in_polygon(p, nodes) {
        return Err(PacmanError::VertexNotEnclosed);
    }
    if geom::find_self_intersection(&triad.region(field, curve), true).is_some() {
        return Err(PacmanError::DisconnectedInterior);
    }
    Ok(())
}

/// Weighted area of the pacman region. A region that has collapsed onto the
/// barrier has area 0.
pub fn area(field: &PotentialField, triad: &Triad, curve: &PlanarCurve) -> Result<f64, PacmanError> {
    triad.check_indices(field)?;
    Ok(field.weighted_area_unchecked(&triad.region(field, curve)))
}

/// Oriented rate predicted from the endpoint angles of the curve's lift.
pub fn predicted_rate(curve: &PlanarCurve, orientation: f64) -> Result<f64, PacmanError> {
    let lift = curve.angle_lift()?;
    Ok(orientation * (lift.last() - lift.first()))
}

/// Compares finite-difference area rates between consecutive snapshots with
/// the endpoint angle difference (averaged over the pair).
pub fn area_derivative_check(
    field: &PotentialField,
    triad: &Triad,
    snapshots: &[FlowSnapshot],
) -> Result<AreaDerivativeReport, PacmanError> {
    if snapshots.len() < 2 {
        return Err(PacmanError::TooFewSnapshots);
    }
    let mut areas = Vec::with_capacity(snapshots.len());
    let mut thetas = Vec::with_capacity(snapshots.len());
    for (index, s) in snapshots.iter().enumerate() {
        validate_triad(field, triad, &s.curve)
            .map_err(|e| PacmanError::TriadBrokenDuringWindow { index, reason: e.to_string() })?;
        let o = triad.angles(field, &s.curve).orientation;
        areas.push(area(field, triad, &s.curve)?);
        thetas.push(predicted_rate(&s.curve, o)?);
    }
    let mut rates = Vec::new();
    let mut predicted = Vec::new();
    let mut residuals = Vec::new();
    for k in 0..snapshots.len() - 1 {
        let dt = snapshots[k + 1].time - snapshots[k].time;
        if dt <= 0.0 {
            continue;
        }
        let rate = (areas[k + 1] - areas[k]) / dt;
        let pred = 0.5 * (thetas[k] + thetas[k + 1]);
        rates.push(rate);
        predicted.push(pred);
        residuals.push((rate - pred).abs());
    }
    Ok(AreaDerivativeReport { residual: ResidualStats::from_values(&residuals), rates, predicted })
}

/// `A / (theta_minus - theta_plus)`.
pub fn time_bound(area: f64, angles: TriadAngles) -> Result<f64, PacmanError> {
    if !(angles.theta_plus < angles.theta_minus) {
        return Err(PacmanError::NotStrictlyDecreasing { theta_minus: angles.theta_minus, theta_plus: angles.theta_plus });
    }
    Ok(area / (angles.theta_minus - angles.theta_plus))
}

/// Upper bound on the time at which the curve reaches the apex.
pub fn singular_time_bound(field: &PotentialField, triad: &Triad, curve: &PlanarCurve) -> Result<f64, PacmanError> {
    validate_triad(field, triad, curve)?;
    time_bound(area(field, triad, curve)?, triad.angles(field, curve))
}
