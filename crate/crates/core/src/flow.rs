//! Explicit integrator for `d/dt gamma = phi^{-1} kappa N` on one component.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curve::{self, CurveError, EndKind, PlanarCurve};
use crate::geom::{self, Vec2};
use crate::potential::PotentialField;

/// Snapshots approaching a singularity are recorded each time the distance
/// drops by this factor.
pub const APPROACH_RATIO: f64 = 0.749_894_209_332_455_8; // 10^(-1/8)

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FlowError {
    #[error("stable time step {dt:e} underflows")]
    TimeStepUnderflow { dt: f64 },
    #[error("flow produced a self-intersection between segments {first} and {second} at t = {time}")]
    SelfIntersection { first: usize, second: usize, time: f64 },
    #[error("node {node} entered the guard band of singularity {singularity}")]
    NodeHitSingularity { node: usize, singularity: usize },
    #[error("residual window needs at least 3 snapshots")]
    WindowTooShort,
    #[error("residual window is not a run of consecutive steps without resampling")]
    TrackingBroken,
    #[error("invalid flow parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Curve(#[from] CurveError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FlowParams {
    pub cfl: f64,
    pub target_spacing: f64,
    pub resample_every: u64,
    /// Defaults to three times the target spacing.
    pub surgery_radius: Option<f64>,
    pub max_time: f64,
    pub stationary_tol: f64,
    /// Tails of ray-asymptotic curves beyond this distance from the centroid
    /// of the singular set are held on their rays.
    pub truncation_radius: Option<f64>,
    /// When set to `alpha`, resampling refines the spacing near non-endpoint
    /// singularities to `alpha` times the distance to them.
    pub refinement: Option<f64>,
    /// Time between regular snapshots.
    pub snapshot_interval: f64,
}

impl Default for FlowParams {
    fn default() -> Self {
        FlowParams {
            cfl: 0.25,
            target_spacing: 0.01,
            resample_every: 10,
            surgery_radius: None,
            max_time: 10.0,
            stationary_tol: 1e-6,
            truncation_radius: None,
            refinement: None,
            snapshot_interval: 0.05,
        }
    }
}

impl FlowParams {
    pub fn with_spacing(target_spacing: f64) -> Self {
        FlowParams { target_spacing, ..Default::default() }
    }

    pub fn surgery_radius(&self) -> f64 {
        self.surgery_radius.unwrap_or(3.0 * self.target_spacing)
    }

    pub fn validate(&self) -> Result<(), FlowError> {
        let bad = |m: String| Err(FlowError::InvalidParams(m));
        if !(self.cfl > 0.0 && self.cfl <= 0.5) {
            return bad(format!("cfl {} outside (0, 0.5]", self.cfl));
        }
        if !(self.target_spacing > 0.0 && self.target_spacing.is_finite()) {
            return bad("target_spacing must be positive".into());
        }
        if self.resample_every == 0 {
            return bad("resample_every must be positive".into());
        }
        if !(self.max_time >= 0.0 && self.max_time.is_finite()) {
            return bad("max_time must be non-negative and finite".into());
        }
        if !(self.stationary_tol > 0.0) {
            return bad("stationary_tol must be positive".into());
        }
        if !(self.snapshot_interval > 0.0) {
            return bad("snapshot_interval must be positive".into());
        }
        let r = self.surgery_radius();
        if !(r > 0.0) {
            return bad("surgery_radius must be positive".into());
        }
        match self.refinement {
            Some(alpha) => {
                if !(alpha > 0.0 && alpha <= 0.5) {
                    return bad(format!("refinement {alpha} outside (0, 0.5]"));
                }
            }
            None => {
                if r < 2.0 * self.target_spacing {
                    return bad(format!("surgery_radius {r} is below twice the target spacing"));
                }
            }
        }
        if let Some(t) = self.truncation_radius {
            if !(t > 0.0) {
                return bad("truncation_radius must be positive".into());
            }
        }
        Ok(())
    }
}

/// Monitored quantities of one curve.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub length: f64,
    pub angle_inf: f64,
    pub angle_sup: f64,
    pub max_abs_kappa: f64,
    pub max_phi_inv_kappa: f64,
    pub max_normal_log_phi: f64,
    /// Distance from the curve to each singularity; `None` for the curve's
    /// own endpoints.
    pub min_dist: Vec<Option<f64>>,
}

impl Diagnostics {
    pub fn compute(field: &PotentialField, curve: &PlanarCurve) -> Result<Self, FlowError> {
        let nodes = &curve.nodes;
        let lift = curve.angle_lift()?;
        let kappa = curve.curvature()?;
        let mut max_abs_kappa: f64 = 0.0;
        let mut max_pik: f64 = 0.0;
        let mut max_nlp: f64 = 0.0;
        for (j, &k) in kappa.iter().enumerate() {
            let i = j + 1;
            let x = nodes[i];
            let phi = field.phi_unchecked(x);
            max_abs_kappa = max_abs_kappa.max(k.abs());
            max_pik = max_pik.max(k.abs() / phi);
            let n = curve::node_normal(nodes, i);
            if let Ok(v) = field.normal_log_phi(x, n) {
                max_nlp = max_nlp.max(v);
            }
        }
        let ends = curve.endpoint_singularities();
        let min_dist = field
            .singularities()
            .iter()
            .enumerate()
            .map(|(q, &p)| (!ends.contains(&q)).then(|| geom::point_polyline(p, nodes).0))
            .collect();
        Ok(Diagnostics {
            length: curve.length(),
            angle_inf: lift.inf(),
            angle_sup: lift.sup(),
            max_abs_kappa,
            max_phi_inv_kappa: max_pik,
            max_normal_log_phi: max_nlp,
            min_dist,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowSnapshot {
    pub time: f64,
    /// Steps taken since the component started.
    pub step: u64,
    /// Number of resamplings so far; nodes track material points only within
    /// one epoch.
    pub epoch: u64,
    pub curve: PlanarCurve,
    pub diagnostics: Diagnostics,
}

impl FlowSnapshot {
    pub fn new(field: &PotentialField, curve: PlanarCurve, time: f64) -> Result<Self, FlowError> {
        let diagnostics = Diagnostics::compute(field, &curve)?;
        Ok(FlowSnapshot { time, step: 0, epoch: 0, curve, diagnostics })
    }
}

/// Interior node within the surgery radius of a non-endpoint singularity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PinchSite {
    pub singularity: usize,
    pub node: usize,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Termination {
    Stationary,
    PinchDetected(Vec<PinchSite>),
    MaxTime,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StopCondition {
    pub stationary: bool,
    pub pinch: bool,
}

impl Default for StopCondition {
    fn default() -> Self {
        StopCondition { stationary: true, pinch: true }
    }
}

/// Which extra snapshots a run keeps besides the regular cadence.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Recording {
    /// Every this many steps, keep a run of `window_len` consecutive
    /// snapshots (dropped if a resampling falls inside it).
    pub window_every: Option<u64>,
    pub window_len: usize,
    /// Keep snapshots at a geometric cadence in distance to every
    /// non-endpoint singularity.
    pub approach: bool,
    /// Keep the first state at or after each of these times.
    pub capture_times: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub snapshots: Vec<FlowSnapshot>,
    pub termination: Termination,
    pub windows: Vec<Vec<FlowSnapshot>>,
    /// Per singularity, snapshots at a geometric cadence of distance.
    pub approach: Vec<Vec<FlowSnapshot>>,
    pub captures: Vec<FlowSnapshot>,
}

/// Stepping engine for one component. Call [`evaluate`](Self::evaluate) to
/// compute velocities and monitors of the current state, then
/// [`advance`](Self::advance) to move.
#[derive(Debug, Clone)]
pub struct Integrator {
    pub curve: PlanarCurve,
    pub time: f64,
    pub step: u64,
    pub epoch: u64,
    params: FlowParams,
    excluded: Vec<bool>,
    vel: Vec<Vec2>,
    /// Per singularity: closest interior node distance and index.
    pub min_dist: Vec<f64>,
    pub min_node: Vec<usize>,
    pub max_speed: f64,
    pub dt_stable: f64,
    truncation: Option<(Vec2, f64)>,
}

impl Integrator {
    pub fn new(field: &PotentialField, curve: PlanarCurve, params: &FlowParams, time: f64) -> Result<Self, FlowError> {
        params.validate()?;
        curve.validate(field)?;
        let mut excluded = vec![false; field.len()];
        for q in curve.endpoint_singularities() {
            excluded[q] = true;
        }
        let truncation = params.truncation_radius.map(|r| (field.centroid(), r));
        Ok(Integrator {
            time,
            step: 0,
            epoch: 0,
            params: params.clone(),
            excluded,
            vel: vec![Vec2::ZERO; curve.len()],
            min_dist: vec![f64::INFINITY; field.len()],
            min_node: vec![0; field.len()],
            max_speed: 0.0,
            dt_stable: 0.0,
            truncation,
            curve,
        })
    }

    pub fn params(&self) -> &FlowParams {
        &self.params
    }

    pub fn is_excluded(&self, q: usize) -> bool {
        self.excluded[q]
    }

    /// Computes velocities, the stable step and the monitors for the current
    /// state. Returns the stable step.
    pub fn evaluate(&mut self, field: &PotentialField) -> Result<f64, FlowError> {
        let nodes = &self.curve.nodes;
        let n = nodes.len();
        self.vel.clear();
        self.vel.resize(n, Vec2::ZERO);
        self.min_dist.iter_mut().for_each(|d| *d = f64::INFINITY);
        let sing = field.singularities();
        let mass = field.mass();
        let mut dt_min = f64::INFINITY;
        let mut max_speed: f64 = 0.0;
        for i in 1..n - 1 {
            let x = nodes[i];
            let a = x - nodes[i - 1];
            let b = nodes[i + 1] - x;
            let la = a.norm();
            let lb = b.norm();
            let t = curve::turn(a, b);
            if t.abs() >= std::f64::consts::PI - 1e-12 {
                return Err(CurveError::LiftJump { index: i }.into());
            }
            let kappa = 2.0 * t / (la + lb);
            let mut phi = mass;
            for (q, &p) in sing.iter().enumerate() {
                let d = x.dist(p);
                phi += 0.5 / d;
                if !self.excluded[q] && d < self.min_dist[q] {
                    self.min_dist[q] = d;
                    self.min_node[q] = i;
                }
            }
            let tangent = a / la + b / lb;
            let tn = tangent.norm();
            let normal = if tn > 0.0 { (tangent / tn).perp() } else { (a / la).perp() };
            let speed = kappa / phi;
            self.vel[i] = normal * speed;
            max_speed = max_speed.max(speed.abs());
            let ds = la.min(lb);
            dt_min = dt_min.min(phi * ds * ds);
        }
        let guard = field.guard_band();
        for (q, &d) in self.min_dist.iter().enumerate() {
            if d <= guard {
                return Err(FlowError::NodeHitSingularity { node: self.min_node[q], singularity: q });
            }
        }
        let dt = self.params.cfl * dt_min;
        if !(dt >= 1e-15 * self.params.max_time) || !dt.is_finite() {
            return Err(FlowError::TimeStepUnderflow { dt });
        }
        self.max_speed = max_speed;
        self.dt_stable = dt;
        Ok(dt)
    }

    /// Interior nodes within the surgery radius of non-endpoint singularities,
    /// ordered by singularity index. Uses the last evaluation.
    pub fn pinch_sites(&self) -> Vec<PinchSite> {
        let r = self.params.surgery_radius();
        (0..self.min_dist.len())
            .filter(|&q| !self.excluded[q] && self.min_dist[q] < r)
            .map(|q| PinchSite { singularity: q, node: self.min_node[q], distance: self.min_dist[q] })
            .collect()
    }

    pub fn is_stationary(&self) -> bool {
        self.max_speed < self.params.stationary_tol
    }

    /// Moves by `dt` (at most the stable step) using the last evaluation,
    /// clamps ray tails and resamples on schedule. Returns whether a
    /// resampling happened.
    pub fn advance(&mut self, field: &PotentialField, dt: f64) -> Result<bool, FlowError> {
        let n = self.curve.len();
        for i in 1..n - 1 {
            let v = self.vel[i];
            self.curve.nodes[i] += v * dt;
        }
        self.clamp_tails();
        self.time += dt;
        self.step += 1;
        if self.step % self.params.resample_every == 0 {
            self.resample(field);
            self.epoch += 1;
            if let Some((first, second)) = geom::find_self_intersection(&self.curve.nodes, false) {
                return Err(FlowError::SelfIntersection { first, second, time: self.time });
            }
            return Ok(true);
        }
        Ok(false)
    }

    fn clamp_tails(&mut self) {
        let Some((centre, radius)) = self.truncation else { return };
        let n = self.curve.len();
        let project = |x: Vec2, base: Vec2, dir: Vec2| base + dir * (x - base).dot(dir).max(0.0);
        if let EndKind::Ray { base, direction } = self.curve.start {
            let mut i = 1;
            while i < n - 1 && self.curve.nodes[i].dist(centre) > radius {
                self.curve.nodes[i] = project(self.curve.nodes[i], base, direction);
                i += 1;
            }
        }
        if let EndKind::Ray { base, direction } = self.curve.end {
            let mut i = n - 2;
            while i > 0 && self.curve.nodes[i].dist(centre) > radius {
                self.curve.nodes[i] = project(self.curve.nodes[i], base, direction);
                i -= 1;
            }
        }
    }

    fn resample(&mut self, field: &PotentialField) {
        self.curve = resample_for_flow(field, &self.curve, &self.params, &self.excluded);
        self.vel.resize(self.curve.len(), Vec2::ZERO);
    }

    pub fn snapshot(&self, field: &PotentialField) -> Result<FlowSnapshot, FlowError> {
        Ok(FlowSnapshot {
            time: self.time,
            step: self.step,
            epoch: self.epoch,
            curve: self.curve.clone(),
            diagnostics: Diagnostics::compute(field, &self.curve)?,
        })
    }
}

/// Uniform resampling, or graded towards non-endpoint singularities when
/// refinement is enabled.
pub fn resample_for_flow(field: &PotentialField, curve: &PlanarCurve, params: &FlowParams, excluded: &[bool]) -> PlanarCurve {
    let h = params.target_spacing;
    match params.refinement {
        None => curve.resample(),
        Some(alpha) => {
            let floor = alpha * params.surgery_radius();
            let spacing: Vec<f64> = curve
                .nodes
                .windows(2)
                .map(|w| {
                    let mut g = h;
                    for (q, &p) in field.singularities().iter().enumerate() {
                        if !excluded[q] {
                            let d = geom::point_segment(p, w[0], w[1]).0;
                            g = g.min((alpha * d).max(floor));
                        }
                    }
                    g
                })
                .collect();
            curve.resample_with_spacing(&spacing)
        }
    }
}

pub fn stable_dt(field: &PotentialField, curve: &PlanarCurve, params: &FlowParams) -> Result<f64, FlowError> {
    let n = curve.len();
    let mut m = f64::INFINITY;
    for i in 1..n.saturating_sub(1) {
        let x = curve.nodes[i];
        let ds = x.dist(curve.nodes[i - 1]).min(x.dist(curve.nodes[i + 1]));
        m = m.min(field.phi_unchecked(x) * ds * ds);
    }
    let dt = params.cfl * m;
    if !(dt.is_finite() && dt >= 1e-15 * params.max_time) {
        return Err(FlowError::TimeStepUnderflow { dt });
    }
    Ok(dt)
}

/// One explicit step from `snapshot`; resamples when the step count reaches a
/// multiple of `resample_every`.
pub fn step(field: &PotentialField, snapshot: &FlowSnapshot, params: &FlowParams) -> Result<FlowSnapshot, FlowError> {
    let mut it = Integrator::new(field, snapshot.curve.clone(), params, snapshot.time)?;
    it.step = snapshot.step;
    it.epoch = snapshot.epoch;
    let dt = it.evaluate(field)?;
    it.advance(field, dt)?;
    if let Some((first, second)) = geom::find_self_intersection(&it.curve.nodes, false) {
        return Err(FlowError::SelfIntersection { first, second, time: it.time });
    }
    it.snapshot(field)
}

/// Bookkeeping shared by single-component runs and the surgery controller.
#[derive(Debug, Clone)]
pub(crate) struct Recorder {
    pub recording: Recording,
    /// Windows and captures are tagged with the component they came from.
    pub windows: Vec<(u32, Vec<FlowSnapshot>)>,
    pending: HashMap<u32, Vec<FlowSnapshot>>,
    pub approach: Vec<Vec<FlowSnapshot>>,
    approach_base: Vec<Option<f64>>,
    approach_level: Vec<i32>,
    pub captures: Vec<(u32, FlowSnapshot)>,
    next_capture: HashMap<u32, usize>,
    /// First time each singularity came within twice the surgery radius.
    pub entered: Vec<Option<f64>>,
}

impl Recorder {
    pub fn new(recording: Recording, singularities: usize) -> Self {
        let mut recording = recording;
        recording.capture_times.sort_by(f64::total_cmp);
        Recorder {
            recording,
            windows: Vec::new(),
            pending: HashMap::new(),
            approach: vec![Vec::new(); singularities],
            approach_base: vec![None; singularities],
            approach_level: vec![1; singularities],
            captures: Vec::new(),
            next_capture: HashMap::new(),
            entered: vec![None; singularities],
        }
    }

    /// Observes an evaluated state before it is advanced.
    pub fn observe(&mut self, field: &PotentialField, it: &Integrator, tag: u32) -> Result<(), FlowError> {
        let r = it.params().surgery_radius();
        for q in 0..field.len() {
            if it.is_excluded(q) {
                continue;
            }
            let d = it.min_dist[q];
            if d < 2.0 * r && self.entered[q].is_none() {
                self.entered[q] = Some(it.time);
            }
            if !self.recording.approach {
                continue;
            }
            let base = *self.approach_base[q].get_or_insert(d);
            let mut crossed = false;
            while d < base * APPROACH_RATIO.powi(self.approach_level[q]) {
                self.approach_level[q] += 1;
                crossed = true;
            }
            if crossed {
                self.approach[q].push(it.snapshot(field)?);
            }
        }
        let times = &self.recording.capture_times;
        let next = self.next_capture.entry(tag).or_insert_with(|| times.partition_point(|&t| t < it.time));
        while *next < times.len() && it.time >= times[*next] {
            self.captures.push((tag, it.snapshot(field)?));
            *next += 1;
        }
        if let Some(every) = self.recording.window_every {
            let len = self.recording.window_len.max(1);
            if let Some(mut w) = self.pending.remove(&tag) {
                let s = it.snapshot(field)?;
                if s.epoch == w[0].epoch {
                    w.push(s);
                    if w.len() >= len {
                        self.windows.push((tag, w));
                    } else {
                        self.pending.insert(tag, w);
                    }
                }
            } else if it.step % every == 0 {
                let s = it.snapshot(field)?;
                if len == 1 {
                    self.windows.push((tag, vec![s]));
                } else {
                    self.pending.insert(tag, vec![s]);
                }
            }
        }
        Ok(())
    }

    /// Records the final state approaching each pinch site.
    pub fn observe_pinch(&mut self, field: &PotentialField, it: &Integrator, sites: &[PinchSite]) -> Result<(), FlowError> {
        if self.recording.approach {
            for s in sites {
                let last = self.approach[s.singularity].last().map(|x| (x.time, x.step));
                if last != Some((it.time, it.step)) {
                    self.approach[s.singularity].push(it.snapshot(field)?);
                }
            }
        }
        Ok(())
    }
}

/// Runs one component until the stop condition fires or `max_time`.
pub fn run(field: &PotentialField, curve: &PlanarCurve, params: &FlowParams, stop: StopCondition) -> Result<RunOutput, FlowError> {
    run_recorded(field, curve, params, stop, Recording::default())
}

pub fn run_recorded(
    field: &PotentialField,
    curve: &PlanarCurve,
    params: &FlowParams,
    stop: StopCondition,
    recording: Recording,
) -> Result<RunOutput, FlowError> {
    let mut it = Integrator::new(field, curve.clone(), params, 0.0)?;
    let mut rec = Recorder::new(recording, field.len());
    let mut snapshots = vec![it.snapshot(field)?];
    let mut next_snap = params.snapshot_interval;
    let termination = loop {
        if it.time >= params.max_time {
            break Termination::MaxTime;
        }
        let dt = it.evaluate(field)?;
        rec.observe(field, &it, 0)?;
        if stop.pinch {
            let sites = it.pinch_sites();
            if !sites.is_empty() {
                rec.observe_pinch(field, &it, &sites)?;
                break Termination::PinchDetected(sites);
            }
        }
        if stop.stationary && it.is_stationary() {
            break Termination::Stationary;
        }
        let dt = dt.min(params.max_time - it.time);
        it.advance(field, dt)?;
        if it.time >= next_snap {
            snapshots.push(it.snapshot(field)?);
            next_snap += params.snapshot_interval;
        }
    };
    if snapshots.last().map(|s| s.step) != Some(it.step) {
        snapshots.push(it.snapshot(field)?);
    }
    Ok(RunOutput {
        snapshots,
        termination,
        windows: rec.windows.into_iter().map(|(_, w)| w).collect(),
        approach: rec.approach,
        captures: rec.captures.into_iter().map(|(_, s)| s).collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualStats {
    pub max: f64,
    pub mean: f64,
    pub samples: usize,
}

impl ResidualStats {
    pub fn from_values(values: &[f64]) -> Self {
        let samples = values.len();
        let max = values.iter().copied().fold(0.0, f64::max);
        let mean = if samples > 0 { values.iter().sum::<f64>() / samples as f64 } else { 0.0 };
        ResidualStats { max, mean, samples }
    }
}

/// Finite-difference residual of `d/dt kappa = d_s^2 (phi^{-1} kappa) +
/// phi^{-1} kappa^3` over a window of consecutive snapshots, at interior
/// nodes whose arclength fraction lies in `[margin, 1 - margin]`.
pub fn curvature_pde_residual(field: &PotentialField, window: &[FlowSnapshot], margin: f64) -> Result<ResidualStats, FlowError> {
    if window.len() < 3 {
        return Err(FlowError::WindowTooShort);
    }
    let n = window[0].curve.len();
    for w in window.windows(2) {
        if w[1].step != w[0].step + 1 || w[1].epoch != w[0].epoch || w[1].curve.len() != n {
            return Err(FlowError::TrackingBroken);
        }
    }
    if n < 5 {
        return Err(FlowError::WindowTooShort);
    }
    let kappas: Vec<Vec<f64>> = window.iter().map(|s| s.curve.curvature()).collect::<Result<_, _>>()?;
    let mut values = Vec::new();
    for j in 1..window.len() - 1 {
        let nodes = &window[j].curve.nodes;
        let dt = window[j + 1].time - window[j - 1].time;
        let k = &kappas[j];
        let f: Vec<f64> = (1..n - 1).map(|i| k[i - 1] / field.phi_unchecked(nodes[i])).collect();
        let mut s = vec![0.0; n];
        for i in 1..n {
            s[i] = s[i - 1] + nodes[i].dist(nodes[i - 1]);
        }
        let total = s[n - 1];
        for i in 2..n - 2 {
            let frac = s[i] / total;
            if frac < margin || frac > 1.0 - margin {
                continue;
            }
            let (lm, lp) = (s[i] - s[i - 1], s[i + 1] - s[i]);
            let (fm, f0, fp) = (f[i - 2], f[i - 1], f[i]);
            let fss = 2.0 * ((fp - f0) / lp - (f0 - fm) / lm) / (lp + lm);
            let kt = (kappas[j + 1][i - 1] - kappas[j - 1][i - 1]) / dt;
            let kk = k[i - 1];
            values.push((kt - fss - f0 * kk * kk).abs());
        }
    }
    Ok(ResidualStats::from_values(&values))
}
