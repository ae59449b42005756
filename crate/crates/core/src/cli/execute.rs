//! Runs a scenario through its singularities and attaches the analyses.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::output;
use super::scenario::{Scenario, ScenarioError};
use crate::curve::{EndKind, PlanarCurve, DEFAULT_DELTA};
use crate::flow::Recording;
use crate::geom::{self, Vec2};
use crate::neckpinch::{self, DecadeChange, LineFit};
use crate::pacman::{self, TriadAngles};
use crate::potential::PotentialField;
use crate::stability::{self, ChainReport, DestabilizationOrder, StabilityVerdict};
use crate::surgery::{self, FlowState, SurgeryEvent, SurgeryOutcome, SurgeryTermination};

/// Pinch time may exceed the triad bound by this factor.
pub const BOUND_SLACK: f64 = 1.05;
pub const LINE_FIT_TOL: f64 = 0.05;
pub const OFFSET_TOL: f64 = 0.1;
pub const KAPPA_DROP_MIN: f64 = 10.0;
pub const LOG_PHI_GAIN_MIN: f64 = 3.0;
pub const RAY_TAIL_TOL: f64 = 1e-3;

#[derive(Debug, Error)]
pub enum ExecError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Surgery(#[from] surgery::SurgeryError),
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

/// A finished run before any files are written.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub scenario: Scenario,
    pub field: PotentialField,
    pub initial: PlanarCurve,
    pub outcome: SurgeryOutcome,
    pub elapsed_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeckSummary {
    pub singularity: usize,
    pub singular_time: f64,
    pub window_radius: f64,
    pub snapshots: usize,
    pub rescaled_distance: Option<f64>,
    pub line_fit: Option<LineFit>,
    pub decade: Option<DecadeChange>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriadSummary {
    pub apex: usize,
    pub initial_area: Option<f64>,
    pub angles: TriadAngles,
    pub time_bound: Option<f64>,
    /// Time of the first surgery at the apex.
    pub apex_time: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcceptanceFlag {
    pub name: String,
    pub pass: bool,
    /// `None` when the quantity could not be measured or is not finite.
    pub measured: Option<f64>,
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub scenario: String,
    pub termination: SurgeryTermination,
    pub final_time: f64,
    pub elapsed_seconds: f64,
    pub events: Vec<SurgeryEvent>,
    pub chain: Option<ChainReport>,
    pub chain_phases_degrees: Vec<f64>,
    pub chain_error: Option<String>,
    pub destabilization: Option<DestabilizationOrder>,
    pub initial_verdict: Option<StabilityVerdict>,
    pub verdict_error: Option<String>,
    pub necks: Vec<NeckSummary>,
    pub triads: Vec<TriadSummary>,
    pub flags: Vec<AcceptanceFlag>,
    /// Output files that could not be written.
    pub partial_outputs: Vec<String>,
}

impl RunReport {
    pub fn all_pass(&self) -> bool {
        self.flags.iter().all(|f| f.pass)
    }

    pub fn flag(&self, name: &str) -> Option<&AcceptanceFlag> {
        self.flags.iter().find(|f| f.name == name)
    }
}

pub fn simulate(scenario: &Scenario) -> Result<Simulation, ExecError> {
    let (field, initial) = scenario.validate()?;
    let start = Instant::now();
    let outcome = surgery::run_through_recorded(
        &field,
        &initial,
        &scenario.params,
        Recording { approach: true, ..Default::default() },
    )?;
    Ok(Simulation {
        scenario: scenario.clone(),
        field,
        initial,
        outcome,
        elapsed_seconds: start.elapsed().as_secs_f64(),
    })
}

pub fn neck_summary(field: &PotentialField, event: &SurgeryEvent) -> NeckSummary {
    let q = event.singularity;
    let c = event.before.as_ref().map(|b| neckpinch::default_window_radius(field, q, b)).unwrap_or(f64::NAN);
    let mut s = NeckSummary {
        singularity: q,
        singular_time: event.singular_time,
        window_radius: c,
        snapshots: event.approach.len(),
        rescaled_distance: None,
        line_fit: None,
        decade: None,
        error: None,
    };
    match neckpinch::track(field, &event.approach, q, c) {
        Ok(t) => {
            let last = t.entries.len() - 1;
            s.rescaled_distance = Some(t.entries[last].rescaled_distance);
            match neckpinch::line_fit(&t, last) {
                Ok(f) => s.line_fit = Some(f),
                Err(e) => s.error = Some(e.to_string()),
            }
            s.decade = neckpinch::final_decade(&neckpinch::blowup_monitors(field, &t));
        }
        Err(e) => s.error = Some(e.to_string()),
    }
    s
}

/// Curve obtained by concatenating the components of a state.
pub fn union_curve(state: &FlowState) -> PlanarCurve {
    let first = &state.components[0];
    let last = &state.components[state.components.len() - 1];
    PlanarCurve::new(state.union_nodes(), first.start, last.end, first.target_spacing)
}

/// Largest distance from a node beyond `radius` (measured from the centroid
/// of the singular set) to the nearer asymptotic ray, over the trajectory.
pub fn ray_tail_deviation(field: &PotentialField, initial: &PlanarCurve, trajectory: &[FlowState], radius: f64) -> f64 {
    let rays: Vec<(Vec2, Vec2)> = [initial.start, initial.end]
        .iter()
        .filter_map(|e| match *e {
            EndKind::Ray { base, direction } => Some((base, direction.normalized())),
            EndKind::Pinned(_) => None,
        })
        .collect();
    if rays.is_empty() {
        return 0.0;
    }
    let centre = field.centroid();
    let mut worst: f64 = 0.0;
    for state in trajectory {
        for x in state.components.iter().flat_map(|c| c.nodes.iter()) {
            if x.dist(centre) <= radius {
                continue;
            }
            let d = rays
                .iter()
                .map(|&(b, d)| geom::point_segment(*x, b, b + d * (2.0 * (x.dist(b) + 1.0))).0)
                .fold(f64::INFINITY, f64::min);
            worst = worst.max(d);
        }
    }
    worst
}

pub fn max_angle_range(trajectory: &[FlowState]) -> f64 {
    trajectory
        .iter()
        .flat_map(|s| s.components.iter())
        .map(|c| c.angle_range().map(|(a, b)| b - a).unwrap_or(f64::INFINITY))
        .fold(0.0, f64::max)
}

fn flag(name: impl Into<String>, pass: bool, measured: f64, threshold: f64) -> AcceptanceFlag {
    AcceptanceFlag { name: name.into(), pass, measured: measured.is_finite().then_some(measured), threshold }
}

/// Builds the report of a finished run, including its acceptance flags.
pub fn analyse(sim: &Simulation) -> RunReport {
    let field = &sim.field;
    let out = &sim.outcome;
    let (initial_verdict, verdict_error) = match stability::classify(field, &sim.initial) {
        Ok(v) => (Some(v), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let necks: Vec<NeckSummary> = out.events.iter().map(|e| neck_summary(field, e)).collect();
    let triads: Vec<TriadSummary> = sim
        .scenario
        .triads
        .iter()
        .map(|t| {
            let angles = t.angles(field, &sim.initial);
            let area = pacman::area(field, t, &sim.initial);
            let bound = pacman::singular_time_bound(field, t, &sim.initial);
            let error = area.as_ref().err().or(bound.as_ref().err()).map(|e| e.to_string());
            TriadSummary {
                apex: t.apex,
                initial_area: area.ok(),
                angles,
                time_bound: bound.ok(),
                apex_time: out.events.iter().find(|e| e.singularity == t.apex).map(|e| e.singular_time),
                error,
            }
        })
        .collect();

    let mut flags = Vec::new();
    flags.push(flag(
        "terminated_stationary",
        out.termination == SurgeryTermination::AllStationary,
        out.final_state().time,
        sim.scenario.params.max_time,
    ));
    let range = max_angle_range(&out.trajectory);
    flags.push(flag("almost_calibrated", range <= PI - DEFAULT_DELTA, range, PI - DEFAULT_DELTA));
    let interior = field.len() - sim.initial.endpoint_singularities().len();
    flags.push(flag("event_count", out.events.len() <= interior, out.events.len() as f64, interior as f64));
    if let Some(c) = &out.chain {
        flags.push(flag("chain_a_k", c.a_k_valid, c.a_k_valid as u8 as f64, 1.0));
    }
    for (k, n) in necks.iter().enumerate() {
        let dev = n.line_fit.map(|f| f.max_deviation).unwrap_or(f64::INFINITY);
        flags.push(flag(format!("neck_{k}_line_fit"), dev < LINE_FIT_TOL, dev, LINE_FIT_TOL));
        let off = n.line_fit.map(|f| (f.offset - 1.0).abs()).unwrap_or(f64::INFINITY);
        flags.push(flag(format!("neck_{k}_offset"), off <= OFFSET_TOL, off, OFFSET_TOL));
        let drop = n.decade.map(|d| d.kappa_drop).unwrap_or(f64::NAN);
        flags.push(flag(format!("neck_{k}_kappa_drop"), drop >= KAPPA_DROP_MIN, drop, KAPPA_DROP_MIN));
        let gain = n.decade.map(|d| d.log_phi_gain).unwrap_or(f64::NAN);
        flags.push(flag(format!("neck_{k}_log_phi_gain"), gain >= LOG_PHI_GAIN_MIN, gain, LOG_PHI_GAIN_MIN));
    }
    for (j, t) in triads.iter().enumerate() {
        let ratio = match (t.apex_time, t.time_bound) {
            (Some(a), Some(b)) => a / b,
            _ => f64::INFINITY,
        };
        flags.push(flag(format!("triad_{j}_time_bound"), ratio <= BOUND_SLACK, ratio, BOUND_SLACK));
    }
    if let Some(r) = sim.scenario.params.truncation_radius {
        if !sim.initial.is_compact() {
            let dev = ray_tail_deviation(field, &sim.initial, &out.trajectory, r);
            flags.push(flag("ray_tails", dev <= RAY_TAIL_TOL, dev, RAY_TAIL_TOL));
        }
    }
    if let Some(b) = sim.scenario.budget_seconds {
        flags.push(flag("runtime", sim.elapsed_seconds <= b, sim.elapsed_seconds, b));
    }

    RunReport {
        scenario: sim.scenario.name.clone(),
        termination: out.termination,
        final_time: out.final_state().time,
        elapsed_seconds: sim.elapsed_seconds,
        events: out.events.clone(),
        chain_phases_degrees: out.chain.as_ref().map(stability::phases_degrees).unwrap_or_default(),
        destabilization: out.chain.as_ref().map(stability::destabilization_order),
        chain: out.chain.clone(),
        chain_error: out.chain_error.clone(),
        initial_verdict,
        verdict_error,
        necks,
        triads,
        flags,
        partial_outputs: Vec::new(),
    }
}

/// Directory for a run of `scenario` under `root`.
pub fn run_directory(scenario: &Scenario, root: &Path) -> PathBuf {
    root.join(scenario.outputs.directory.as_deref().unwrap_or(&scenario.name))
}

/// Simulates, analyses and writes the CSV series, SVG frames, trajectory
/// and report into the run directory.
pub fn execute(scenario: &Scenario, root: &Path) -> Result<(RunReport, PathBuf), ExecError> {
    let sim = simulate(scenario)?;
    let mut report = analyse(&sim);
    let dir = run_directory(scenario, root);
    std::fs::create_dir_all(&dir).map_err(|source| ExecError::Io { path: dir.clone(), source })?;
    let mut files: Vec<(String, String)> = vec![
        ("scenario.json".into(), super::scenario::emit_scenario(scenario)),
        ("series.csv".into(), output::csv_series(&sim)),
        ("trajectory.json".into(), serde_json::to_string(&sim.outcome.trajectory).expect("trajectory serializes")),
    ];
    files.extend(output::svg_frames(&sim));
    for (name, body) in files {
        if output::write_atomic(&dir.join(&name), body.as_bytes()).is_err() {
            report.partial_outputs.push(name);
        }
    }
    let path = dir.join("report.json");
    let body = serde_json::to_string_pretty(&report).expect("report serializes");
    output::write_atomic(&path, body.as_bytes()).map_err(|source| ExecError::Io { path, source })?;
    Ok((report, dir))
}
