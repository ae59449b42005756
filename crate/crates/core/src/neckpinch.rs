//! Blow-up analysis near a pinch: rescale the curve around the singularity
//! by the running maximum of the inverse distance and compare with a line at
//! distance 1.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curve::{self, PlanarCurve};
use crate::flow::FlowSnapshot;
use crate::geom::{self, Vec2};
use crate::potential::PotentialField;

/// Radius of the rescaled disc used for line fits.
pub const DEFAULT_CORE_RADIUS: f64 = 2.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NeckError {
    #[error("curve does not meet the window around the singularity at snapshot {snapshot}")]
    WindowEmpty { snapshot: usize },
    #[error("window has fewer than 2 points")]
    DegenerateWindow,
    #[error("no snapshots to track")]
    EmptyTrack,
    #[error("snapshot index {0} out of range")]
    OutOfRange(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackEntry {
    pub time: f64,
    pub lambda: f64,
    /// Closest point of the curve to the singularity.
    pub closest: Vec2,
    /// Node of the full curve nearest the singularity.
    pub closest_node: usize,
    /// `lambda * (x - p)` over the window nodes.
    pub window: Vec<Vec2>,
    pub sup_kappa_hat: f64,
    pub rescaled_distance: f64,
    /// Curve at this snapshot, for the monitors.
    #[serde(skip)]
    curve: Option<PlanarCurve>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RescalingTrack {
    pub singularity: usize,
    pub point: Vec2,
    pub window_radius: f64,
    pub entries: Vec<TrackEntry>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub direction: Vec2,
    /// Distance of the fitted line from the origin.
    pub offset: f64,
    pub max_deviation: f64,
    pub points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Monitor {
    pub time: f64,
    pub distance: f64,
    pub phi_inv_kappa: f64,
    pub normal_log_phi: f64,
}

/// `min(0.4 * distance to the nearest other singularity, 0.2 * diameter)`.
pub fn default_window_radius(field: &PotentialField, q: usize, curve: &PlanarCurve) -> f64 {
    let p = field.singularity(q);
    let other = field.nearest_singularity(p, &[q]).map(|(_, d)| d).unwrap_or(f64::INFINITY);
    let diameter = curve
        .nodes
        .iter()
        .flat_map(|a| curve.nodes.iter().map(move |b| a.dist(*b)))
        .fold(0.0, f64::max);
    (0.4 * other).min(0.2 * diameter)
}

fn closest_node(nodes: &[Vec2], p: Vec2) -> usize {
    let mut best = (0, f64::INFINITY);
    for (i, x) in nodes.iter().enumerate() {
        let d = x.dist(p);
        if d < best.1 {
            best = (i, d);
        }
    }
    best.0
}

/// Rescales each snapshot around singularity `q` using the window radius `c`.
pub fn track(field: &PotentialField, snapshots: &[FlowSnapshot], q: usize, c: f64) -> Result<RescalingTrack, NeckError> {
    let p = field.singularity(q);
    if snapshots.is_empty() {
        return Err(NeckError::EmptyTrack);
    }
    let mut lambda: f64 = 0.0;
    let mut entries = Vec::with_capacity(snapshots.len());
    for (k, s) in snapshots.iter().enumerate() {
        let nodes = &s.curve.nodes;
        let (dist, closest, _) = geom::point_polyline(p, nodes);
        lambda = lambda.max(1.0 / dist);
        let j = closest_node(nodes, p);
        if nodes[j].dist(p) > c {
            return Err(NeckError::WindowEmpty { snapshot: k });
        }
        let mut lo = j;
        while lo > 0 && nodes[lo - 1].dist(p) <= c {
            lo -= 1;
        }
        let mut hi = j;
        while hi + 1 < nodes.len() && nodes[hi + 1].dist(p) <= c {
            hi += 1;
        }
        let window: Vec<Vec2> = nodes[lo..=hi].iter().map(|&x| (x - p) * lambda).collect();
        let sup_kappa_hat = if window.len() >= 3 {
            curve::polyline_curvature(&nodes[lo..=hi])
                .map(|k| k.iter().fold(0.0, |m: f64, v| m.max(v.abs())) / lambda)
                .unwrap_or(f64::INFINITY)
        } else {
            0.0
        };
        entries.push(TrackEntry {
            time: s.time,
            lambda,
            closest,
            closest_node: j,
            window,
            sup_kappa_hat,
            rescaled_distance: lambda * dist,
            curve: Some(s.curve.clone()),
        });
    }
    Ok(RescalingTrack { singularity: q, point: p, window_radius: c, entries })
}

/// Total-least-squares line through the rescaled window points within the
/// default core radius of the origin.
pub fn line_fit(track: &RescalingTrack, index: usize) -> Result<LineFit, NeckError> {
    line_fit_within(track, index, DEFAULT_CORE_RADIUS)
}

pub fn line_fit_within(track: &RescalingTrack, index: usize, radius: f64) -> Result<LineFit, NeckError> {
    let entry = track.entries.get(index).ok_or(NeckError::OutOfRange(index))?;
    let pts: Vec<Vec2> = entry.window.iter().copied().filter(|x| x.norm() <= radius).collect();
    fit_points(&pts)
}

pub fn fit_points(pts: &[Vec2]) -> Result<LineFit, NeckError> {
    if pts.len() < 2 {
        return Err(NeckError::DegenerateWindow);
    }
    let n = pts.len() as f64;
    let c = pts.iter().fold(Vec2::ZERO, |a, &b| a + b) / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for &x in pts {
        let d = x - c;
        sxx += d.x * d.x;
        sxy += d.x * d.y;
        syy += d.y * d.y;
    }
    let angle = 0.5 * (2.0 * sxy).atan2(sxx - syy);
    let direction = Vec2::from_angle(angle);
    let normal = direction.perp();
    let max_deviation = pts.iter().map(|&x| (x - c).dot(normal).abs()).fold(0.0, f64::max);
    Ok(LineFit { direction, offset: c.dot(normal).abs(), max_deviation, points: pts.len() })
}

/// `phi^{-1}|kappa|` and the normal derivative of `log phi` at the closest
/// node of each tracked snapshot.
pub fn blowup_monitors(field: &PotentialField, track: &RescalingTrack) -> Vec<Monitor> {
    track
        .entries
        .iter()
        .filter_map(|e| {
            let c = e.curve.as_ref()?;
            let nodes = &c.nodes;
            let i = e.closest_node.clamp(1, nodes.len().saturating_sub(2));
            let kappa = curve::polyline_curvature(&nodes[i - 1..=i + 1]).ok()?[0];
            let x = nodes[i];
            let phi = field.phi_unchecked(x);
            let nlp = field.normal_log_phi(x, curve::node_normal(nodes, i)).ok()?;
            Some(Monitor { time: e.time, distance: x.dist(track.point), phi_inv_kappa: kappa.abs() / phi, normal_log_phi: nlp })
        })
        .collect()
}

/// Change of the monitors between the latest sample at least ten times
/// farther from the singularity than the final one, and the final sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecadeChange {
    pub from: Monitor,
    pub to: Monitor,
    /// `phi_inv_kappa` at `from` over its value at `to`.
    pub kappa_drop: f64,
    /// `normal_log_phi` at `to` over its value at `from`.
    pub log_phi_gain: f64,
}

pub fn final_decade(monitors: &[Monitor]) -> Option<DecadeChange> {
    let to = *monitors.last()?;
    let from = *monitors.iter().rev().find(|m| m.distance >= 10.0 * to.distance)?;
    Some(DecadeChange {
        from,
        to,
        kappa_drop: from.phi_inv_kappa / to.phi_inv_kappa,
        log_phi_gain: to.normal_log_phi / from.normal_log_phi,
    })
}
