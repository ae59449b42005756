//! Scenario documents: a JSON object with the field, an initial-curve
//! generator, flow parameters, tracked triads and output settings.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curve::{self, EndKind, PlanarCurve, DEFAULT_DELTA};
use crate::flow::FlowParams;
use crate::geom::Vec2;
use crate::pacman::{self, Triad};
use crate::potential::PotentialField;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScenarioError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("invalid scenario ({invariant}): {detail}")]
    Validation { invariant: String, detail: String },
    #[error("unknown bundled scenario {0:?}")]
    Unknown(String),
}

fn invalid(invariant: &str, detail: impl ToString) -> ScenarioError {
    ScenarioError::Validation { invariant: invariant.into(), detail: detail.to_string() }
}

/// Initial curve generators. Endpoint fields are singularity indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CurveSpec {
    Explicit {
        nodes: Vec<Vec2>,
        start: EndKind,
        end: EndKind,
    },
    /// Circular arc whose apex sits `apex_height` to the left of the chord.
    ConvexArc {
        start: usize,
        end: usize,
        apex_height: f64,
        nodes: usize,
    },
    /// Curve asymptotic to the rays from singularity `apex` at the two
    /// angles, pushed `bridge_offset` off the apex.
    RayAsymptotic {
        apex: usize,
        incoming_angle: f64,
        outgoing_angle: f64,
        bridge_offset: f64,
        width: f64,
        extent: f64,
    },
    /// Catmull-Rom spline from `start` through `waypoints` to `end`.
    Spline {
        start: usize,
        end: usize,
        waypoints: Vec<Vec2>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    /// Run directory name under the output root; defaults to the scenario name.
    pub directory: Option<String>,
    /// Write every this many trajectory states to the CSV.
    pub csv_every: usize,
    /// Write an SVG frame every this many trajectory states; 0 writes only
    /// the first and last.
    pub frame_every: usize,
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec { directory: None, csv_every: 1, frame_every: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub mass: f64,
    pub singularities: Vec<Vec2>,
    pub initial_curve: CurveSpec,
    #[serde(default)]
    pub params: FlowParams,
    #[serde(default)]
    pub triads: Vec<Triad>,
    #[serde(default)]
    pub outputs: OutputSpec,
    #[serde(default)]
    pub seed: u64,
    /// Wall-clock budget checked by the runtime acceptance flag.
    #[serde(default)]
    pub budget_seconds: Option<f64>,
}

impl Scenario {
    pub fn field(&self) -> Result<PotentialField, ScenarioError> {
        PotentialField::new(self.mass, self.singularities.clone()).map_err(|e| invalid("field", e))
    }

    /// Generates the initial curve without validating it.
    pub fn build_curve(&self) -> Result<PlanarCurve, ScenarioError> {
        let h = self.params.target_spacing;
        let n = self.singularities.len();
        let point = |i: usize| {
            self.singularities.get(i).copied().ok_or_else(|| invalid("index", format!("singularity {i} out of range ({n} given)")))
        };
        let shape = |e: curve::CurveError| invalid("generator", e);
        Ok(match &self.initial_curve {
            CurveSpec::Explicit { nodes, start, end } => {
                for e in [start, end] {
                    if let Some(i) = e.pinned_index() {
                        point(i)?;
                    }
                }
                PlanarCurve::new(nodes.clone(), *start, *end, h)
            }
            CurveSpec::ConvexArc { start, end, apex_height, nodes } => {
                let pts = curve::circular_arc(point(*start)?, point(*end)?, *apex_height, *nodes).map_err(shape)?;
                PlanarCurve::pinned(pts, *start, *end, h)
            }
            CurveSpec::RayAsymptotic { apex, incoming_angle, outgoing_angle, bridge_offset, width, extent } => {
                let base = point(*apex)?;
                let (dm, dp) = (Vec2::from_angle(*incoming_angle), Vec2::from_angle(*outgoing_angle));
                let pts = curve::ray_bridge(base, dm, dp, *bridge_offset, *width, *extent, h).map_err(shape)?;
                PlanarCurve::new(pts, EndKind::Ray { base, direction: dm }, EndKind::Ray { base, direction: dp }, h)
            }
            CurveSpec::Spline { start, end, waypoints } => {
                let mut all = vec![point(*start)?];
                all.extend_from_slice(waypoints);
                all.push(point(*end)?);
                let pts = curve::spline_through(&all, h).map_err(shape)?;
                PlanarCurve::pinned(pts, *start, *end, h)
            }
        })
    }

    /// Checks every invariant and returns the field and initial curve.
    pub fn validate(&self) -> Result<(PotentialField, PlanarCurve), ScenarioError> {
        if self.name.trim().is_empty() {
            return Err(invalid("name", "scenario name is empty"));
        }
        let field = self.field()?;
        self.params.validate().map_err(|e| invalid("params", e))?;
        let curve = self.build_curve()?;
        curve.validate(&field).map_err(|e| invalid("curve", e))?;
        if !curve.is_almost_calibrated(DEFAULT_DELTA) {
            let range = curve.angle_range().map(|(a, b)| b - a).unwrap_or(f64::NAN);
            return Err(invalid("NotAlmostCalibrated", format!("angle range {range} exceeds pi - {DEFAULT_DELTA}")));
        }
        for (j, t) in self.triads.iter().enumerate() {
            pacman::validate_triad(&field, t, &curve).map_err(|e| invalid("triad", format!("triad {j}: {e}")))?;
        }
        if self.outputs.csv_every == 0 {
            return Err(invalid("outputs", "csv_every must be positive"));
        }
        Ok((field, curve))
    }
}

/// Parses and fully validates a scenario document.
pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let s: Scenario = serde_json::from_str(text)
        .map_err(|e| ScenarioError::Parse { line: e.line(), column: e.column(), message: e.to_string() })?;
    s.validate()?;
    Ok(s)
}

pub fn emit_scenario(s: &Scenario) -> String {
    serde_json::to_string_pretty(s).expect("scenario serializes")
}

const BUNDLED: [(&str, &str); 6] = [
    ("eguchi_hanson_stable", include_str!("../../scenarios/eguchi_hanson_stable.json")),
    ("three_point_pinch", include_str!("../../scenarios/three_point_pinch.json")),
    ("fig51_multipinch", include_str!("../../scenarios/fig51_multipinch.json")),
    ("section6_fourpoint", include_str!("../../scenarios/section6_fourpoint.json")),
    ("noncompact_ray", include_str!("../../scenarios/noncompact_ray.json")),
    ("semistable_collinear", include_str!("../../scenarios/semistable_collinear.json")),
];

/// Names and one-line descriptions of the bundled scenarios.
pub fn list_scenarios() -> Vec<(String, String)> {
    BUNDLED
        .iter()
        .map(|(name, text)| {
            let s: Scenario = serde_json::from_str(text).expect("bundled scenario parses");
            (name.to_string(), s.description)
        })
        .collect()
}

pub fn bundled_text(name: &str) -> Option<&'static str> {
    let name = if name == "noncompact_taubnut" { "noncompact_ray" } else { name };
    BUNDLED.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

pub fn bundled(name: &str) -> Result<Scenario, ScenarioError> {
    parse_scenario(bundled_text(name).ok_or_else(|| ScenarioError::Unknown(name.into()))?)
}
