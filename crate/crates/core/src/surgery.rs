//! Flow through singularities: detect neck pinches, split the curve at the
//! singularity, restart each piece and keep the event log.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curve::{self, EndKind, PlanarCurve};
use crate::flow::{FlowError, FlowParams, FlowSnapshot, Integrator, PinchSite, Recorder, Recording};
use crate::geom::Vec2;
use crate::potential::PotentialField;
use crate::stability::{self, ChainReport};

/// Hausdorff tolerance for matching a final component to its chord.
pub const CHAIN_TOLERANCE: f64 = 1e-2;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SurgeryError {
    #[error("splitting component {component} at singularity {singularity} leaves fewer than 3 nodes")]
    SplitTooCoarse { component: u32, singularity: usize },
    #[error("singularity {singularity} is already a junction")]
    JunctionReuse { singularity: usize },
    #[error(transparent)]
    Flow(#[from] FlowError),
}

/// Union of the current components, ordered from the first endpoint to the
/// last. Consecutive components share a junction singularity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowState {
    pub time: f64,
    pub components: Vec<PlanarCurve>,
    /// Stable component ids; a split retires one id and issues two.
    pub ids: Vec<u32>,
    pub stationary: Vec<bool>,
}

impl FlowState {
    pub fn initial(curve: PlanarCurve) -> Self {
        FlowState { time: 0.0, components: vec![curve], ids: vec![0], stationary: vec![false] }
    }

    /// Singularities where consecutive components meet.
    pub fn junctions(&self) -> Vec<usize> {
        self.components.iter().skip(1).filter_map(|c| c.start.pinned_index()).collect()
    }

    /// All nodes of the union, junctions listed once.
    pub fn union_nodes(&self) -> Vec<Vec2> {
        let mut out: Vec<Vec2> = Vec::new();
        for (k, c) in self.components.iter().enumerate() {
            let skip = usize::from(k > 0);
            out.extend_from_slice(&c.nodes[skip..]);
        }
        out
    }

    pub fn total_length(&self) -> f64 {
        self.components.iter().map(PlanarCurve::length).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurgeryEvent {
    pub singular_time: f64,
    /// Time spent with the closest node between one and two surgery radii.
    pub time_uncertainty: f64,
    pub singularity: usize,
    /// Retired component id followed by the ids of the two new pieces.
    pub component_split: (u32, u32, u32),
    /// Turning angle at the junction node right after the split.
    pub junction_angle_gap: f64,
    /// Closest distance when the trigger fired.
    pub trigger_distance: f64,
    /// The component as it was when the trigger fired.
    #[serde(skip)]
    pub before: Option<PlanarCurve>,
    /// The two pieces replacing it.
    #[serde(skip)]
    pub pieces: Vec<PlanarCurve>,
    /// Snapshots at geometrically shrinking distance to the singularity.
    #[serde(skip)]
    pub approach: Vec<FlowSnapshot>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SurgeryTermination {
    AllStationary,
    MaxTimeExceeded,
}

#[derive(Debug, Clone)]
pub struct SurgeryOutcome {
    /// States at every snapshot horizon, starting at time 0.
    pub trajectory: Vec<FlowState>,
    pub events: Vec<SurgeryEvent>,
    pub termination: SurgeryTermination,
    pub chain: Option<ChainReport>,
    pub chain_error: Option<String>,
    /// Consecutive-step windows tagged with the component id.
    pub windows: Vec<(u32, Vec<FlowSnapshot>)>,
    pub captures: Vec<(u32, FlowSnapshot)>,
}

impl SurgeryOutcome {
    pub fn final_state(&self) -> &FlowState {
        self.trajectory.last().expect("trajectory holds the initial state")
    }
}

/// Pinch sites of a snapshot, in increasing singularity order.
pub fn detect_pinch(field: &PotentialField, snapshot: &FlowSnapshot, params: &FlowParams) -> Result<Vec<PinchSite>, FlowError> {
    let mut it = Integrator::new(field, snapshot.curve.clone(), params, snapshot.time)?;
    it.evaluate(field)?;
    Ok(it.pinch_sites())
}

/// Blending radius for the snap: large against the trigger distance, small
/// against the distance to other singularities.
fn blend_radius(field: &PotentialField, q: usize, distance: f64) -> f64 {
    let p = field.singularity(q);
    let other = field.nearest_singularity(p, &[q]).map(|(_, d)| d).unwrap_or(1.0);
    let outer = 0.25 * other;
    (distance * outer).sqrt().min(outer)
}

/// Cuts `curve` at node `site.node`, moving that node onto the singularity.
/// Nearby nodes follow with a weight that falls smoothly to zero over the
/// blending radius (in arclength), so each piece stays close to its
/// pre-snap shape. Returns the two pieces and the turning angle at the
/// junction.
pub fn split_curve(
    field: &PotentialField,
    curve: &PlanarCurve,
    site: PinchSite,
) -> Option<(PlanarCurve, PlanarCurve, f64)> {
    let j = site.node;
    let n = curve.len();
    if j < 2 || j + 2 >= n {
        return None;
    }
    let p = field.singularity(site.singularity);
    let shift = p - curve.nodes[j];
    let radius = blend_radius(field, site.singularity, shift.norm());
    let mut nodes = curve.nodes.clone();
    let weight = |s: f64| if s < radius { (1.0 - (s / radius).powi(2)).powi(2) } else { 0.0 };
    let mut s = 0.0;
    for i in (1..j).rev() {
        s += curve.nodes[i].dist(curve.nodes[i + 1]);
        let w = weight(s);
        if w == 0.0 {
            break;
        }
        nodes[i] += shift * w;
    }
    s = 0.0;
    for i in j + 1..n - 1 {
        s += curve.nodes[i].dist(curve.nodes[i - 1]);
        let w = weight(s);
        if w == 0.0 {
            break;
        }
        nodes[i] += shift * w;
    }
    nodes[j] = p;
    let gap = curve::turn(nodes[j] - nodes[j - 1], nodes[j + 1] - nodes[j]).abs();
    let h = curve.target_spacing;
    let q = EndKind::Pinned(site.singularity);
    let first = PlanarCurve::new(nodes[..=j].to_vec(), curve.start, q, h);
    let second = PlanarCurve::new(nodes[j..].to_vec(), q, curve.end, h);
    Some((first, second, gap))
}

struct Component {
    id: u32,
    it: Integrator,
    stationary: bool,
}

fn state_of(time: f64, comps: &[Component]) -> FlowState {
    FlowState {
        time,
        components: comps.iter().map(|c| c.it.curve.clone()).collect(),
        ids: comps.iter().map(|c| c.id).collect(),
        stationary: comps.iter().map(|c| c.stationary).collect(),
    }
}

enum Advance {
    Reached,
    Pinch(Vec<PinchSite>),
}

fn advance_to(
    field: &PotentialField,
    comp: &mut Component,
    horizon: f64,
    rec: &mut Recorder,
) -> Result<Advance, FlowError> {
    loop {
        let dt = comp.it.evaluate(field)?;
        rec.observe(field, &comp.it, comp.id)?;
        let sites = comp.it.pinch_sites();
        if !sites.is_empty() {
            rec.observe_pinch(field, &comp.it, &sites)?;
            return Ok(Advance::Pinch(sites));
        }
        if comp.it.is_stationary() {
            comp.stationary = true;
            return Ok(Advance::Reached);
        }
        let left = horizon - comp.it.time;
        if left <= 1e-12 * dt {
            return Ok(Advance::Reached);
        }
        comp.it.advance(field, dt.min(left))?;
    }
}

pub fn run_through_singularities(
    field: &PotentialField,
    curve: &PlanarCurve,
    params: &FlowParams,
) -> Result<SurgeryOutcome, SurgeryError> {
    run_through_recorded(field, curve, params, Recording::default())
}

pub fn run_through_recorded(
    field: &PotentialField,
    curve: &PlanarCurve,
    params: &FlowParams,
    recording: Recording,
) -> Result<SurgeryOutcome, SurgeryError> {
    let mut rec = Recorder::new(recording, field.len());
    let mut comps = vec![Component { id: 0, it: Integrator::new(field, curve.clone(), params, 0.0)?, stationary: false }];
    let mut next_id = 1;
    let mut junctions: Vec<usize> = Vec::new();
    let mut events: Vec<SurgeryEvent> = Vec::new();
    let mut trajectory = vec![state_of(0.0, &comps)];
    let mut time = 0.0;
    let termination = loop {
        if comps.iter().all(|c| c.stationary) {
            break SurgeryTermination::AllStationary;
        }
        if time >= params.max_time {
            break SurgeryTermination::MaxTimeExceeded;
        }
        let horizon = (time + params.snapshot_interval).min(params.max_time);
        let mut k = 0;
        while k < comps.len() {
            if comps[k].stationary {
                k += 1;
                continue;
            }
            match advance_to(field, &mut comps[k], horizon, &mut rec)? {
                Advance::Reached => k += 1,
                Advance::Pinch(sites) => {
                    // Further sites are picked up by re-evaluating the pieces.
                    let site = sites[0];
                    let q = site.singularity;
                    if junctions.contains(&q) {
                        return Err(SurgeryError::JunctionReuse { singularity: q });
                    }
                    let old = &comps[k];
                    let (a, b, gap) = split_curve(field, &old.it.curve, site)
                        .ok_or(SurgeryError::SplitTooCoarse { component: old.id, singularity: q })?;
                    if a.len() < 3 || b.len() < 3 {
                        return Err(SurgeryError::SplitTooCoarse { component: old.id, singularity: q });
                    }
                    let t = old.it.time;
                    let ia = Integrator::new(field, a.clone(), params, t)?;
                    let ib = Integrator::new(field, b.clone(), params, t)?;
                    events.push(SurgeryEvent {
                        singular_time: t,
                        time_uncertainty: rec.entered[q].map_or(0.0, |e| t - e),
                        singularity: q,
                        component_split: (old.id, next_id, next_id + 1),
                        junction_angle_gap: gap,
                        trigger_distance: site.distance,
                        before: Some(old.it.curve.clone()),
                        pieces: vec![a, b],
                        approach: std::mem::take(&mut rec.approach[q]),
                    });
                    junctions.push(q);
                    let pieces = [
                        Component { id: next_id, it: ia, stationary: false },
                        Component { id: next_id + 1, it: ib, stationary: false },
                    ];
                    next_id += 2;
                    comps.splice(k..=k, pieces);
                }
            }
        }
        time = horizon;
        trajectory.push(state_of(time, &comps));
    };
    events.sort_by(|a, b| a.singular_time.total_cmp(&b.singular_time));
    let last = trajectory.last().expect("initial state");
    let (chain, chain_error) = match stability::chain_report(field, &last.components, CHAIN_TOLERANCE) {
        Ok(c) => (Some(c), None),
        Err(e) => (None, Some(e.to_string())),
    };
    Ok(SurgeryOutcome { trajectory, events, termination, chain, chain_error, windows: rec.windows, captures: rec.captures })
}
