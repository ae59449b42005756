//! The harmonic potential `phi = m + sum 1/(2|x - p_i|)` restricted to the
//! working plane, and the quantities derived from it.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{self, Vec2};

/// Relative width of the guard band around singularities.
pub const GUARD_FACTOR: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PotentialError {
    #[error("potential evaluated at singularity {index}")]
    EvalAtSingularity { index: usize },
    #[error("singularity {index} lies on the region boundary")]
    SingularityOnBoundary { index: usize },
    #[error("region polygon is not simple (segments {0} and {1} meet)")]
    NonSimplePolygon(usize, usize),
    #[error("every singularity was excluded")]
    EmptyCandidateSet,
    #[error("normal vector is not of unit length (|n| = {0})")]
    NotUnitNormal(f64),
    #[error("invalid field: {0}")]
    InvalidField(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FieldSpec", into = "FieldSpec")]
pub struct PotentialField {
    mass: f64,
    singularities: Vec<Vec2>,
    min_separation: f64,
}

#[derive(Serialize, Deserialize)]
struct FieldSpec {
    mass: f64,
    singularities: Vec<Vec2>,
}

impl TryFrom<FieldSpec> for PotentialField {
    type Error = PotentialError;
    fn try_from(s: FieldSpec) -> Result<Self, Self::Error> {
        PotentialField::new(s.mass, s.singularities)
    }
}

impl From<PotentialField> for FieldSpec {
    fn from(f: PotentialField) -> Self {
        FieldSpec { mass: f.mass, singularities: f.singularities }
    }
}

impl PotentialField {
    pub fn new(mass: f64, singularities: Vec<Vec2>) -> Result<Self, PotentialError> {
        if !(mass.is_finite() && mass >= 0.0) {
            return Err(PotentialError::InvalidField(format!("mass must be finite and non-negative, got {mass}")));
        }
        if singularities.is_empty() {
            return Err(PotentialError::InvalidField("at least one singularity is required".into()));
        }
        if let Some(i) = singularities.iter().position(|p| !p.is_finite()) {
            return Err(PotentialError::InvalidField(format!("singularity {i} is not finite")));
        }
        let mut min_sep = f64::INFINITY;
        for i in 0..singularities.len() {
            for j in i + 1..singularities.len() {
                let d = singularities[i].dist(singularities[j]);
                if d == 0.0 {
                    return Err(PotentialError::InvalidField(format!("singularities {i} and {j} coincide")));
                }
                min_sep = min_sep.min(d);
            }
        }
        // A lone centre has no intrinsic scale; use unit length.
        if !min_sep.is_finite() {
            min_sep = 1.0;
        }
        Ok(PotentialField { mass, singularities, min_separation: min_sep })
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn singularities(&self) -> &[Vec2] {
        &self.singularities
    }

    pub fn singularity(&self, i: usize) -> Vec2 {
        self.singularities[i]
    }

    pub fn len(&self) -> usize {
        self.singularities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.singularities.is_empty()
    }

    pub fn min_separation(&self) -> f64 {
        self.min_separation
    }

    /// Distance below which a point counts as lying on a singularity.
    pub fn guard_band(&self) -> f64 {
        GUARD_FACTOR * self.min_separation
    }

    /// Diameter of the singular set.
    pub fn diameter(&self) -> f64 {
        let s = &self.singularities;
        let mut d: f64 = 0.0;
        for i in 0..s.len() {
            for j in i + 1..s.len() {
                d = d.max(s[i].dist(s[j]));
            }
        }
        d
    }

    pub fn centroid(&self) -> Vec2 {
        let mut c = Vec2::ZERO;
        for &p in &self.singularities {
            c += p;
        }
        c / self.singularities.len() as f64
    }

    /// Evaluates phi without checking for singularities (returns infinity there).
    #[inline]
    pub fn phi_unchecked(&self, x: Vec2) -> f64 {
        let mut phi = self.mass;
        for &p in &self.singularities {
            phi += 0.5 / x.dist(p);
        }
        phi
    }

    fn check_off(&self, x: Vec2) -> Result<(), PotentialError> {
        match self.singularities.iter().position(|&p| p == x) {
            Some(index) => Err(PotentialError::EvalAtSingularity { index }),
            None => Ok(()),
        }
    }

    pub fn eval_phi(&self, x: Vec2) -> Result<f64, PotentialError> {
        self.check_off(x)?;
        Ok(self.phi_unchecked(x))
    }

    pub fn grad_phi(&self, x: Vec2) -> Result<Vec2, PotentialError> {
        self.check_off(x)?;
        let mut g = Vec2::ZERO;
        for &p in &self.singularities {
            let d = x - p;
            let r = d.norm();
            g -= d * (0.5 / (r * r * r));
        }
        Ok(g)
    }

    /// The blow-up monitor `phi^{-1/2} |<grad phi / phi, n>|`.
    pub fn normal_log_phi(&self, x: Vec2, unit_normal: Vec2) -> Result<f64, PotentialError> {
        let len = unit_normal.norm();
        if (len - 1.0).abs() > 1e-12 {
            return Err(PotentialError::NotUnitNormal(len));
        }
        let phi = self.eval_phi(x)?;
        let g = self.grad_phi(x)?;
        Ok(phi.powf(-0.5) * (g.dot(unit_normal) / phi).abs())
    }

    /// Index and distance of the closest singularity not in `exclude`; ties go
    /// to the lowest index.
    pub fn nearest_singularity(&self, x: Vec2, exclude: &[usize]) -> Result<(usize, f64), PotentialError> {
        let mut best: Option<(usize, f64)> = None;
        for (i, &p) in self.singularities.iter().enumerate() {
            if exclude.contains(&i) {
                continue;
            }
            let d = x.dist(p);
            if best.map_or(true, |(_, bd)| d < bd) {
                best = Some((i, d));
            }
        }
        best.ok_or(PotentialError::EmptyCandidateSet)
    }

    /// `int_R phi dA` over a simple closed polygon with no singularity on its
    /// boundary.
    pub fn weighted_area(&self, polygon: &[Vec2]) -> Result<f64, PotentialError> {
        self.check_polygon(polygon, false)?;
        Ok(self.weighted_area_unchecked(polygon))
    }

    /// Like [`weighted_area`](Self::weighted_area) but allows singularities at
    /// polygon vertices, where the integrand stays integrable.
    pub fn weighted_area_vertex_tolerant(&self, polygon: &[Vec2]) -> Result<f64, PotentialError> {
        self.check_polygon(polygon, true)?;
        Ok(self.weighted_area_unchecked(polygon))
    }

    fn check_polygon(&self, polygon: &[Vec2], allow_vertices: bool) -> Result<(), PotentialError> {
        if polygon.len() < 3 {
            return Err(PotentialError::NonSimplePolygon(0, 0));
        }
        if let Some((i, j)) = geom::find_self_intersection(polygon, true) {
            return Err(PotentialError::NonSimplePolygon(i, j));
        }
        let guard = self.guard_band();
        let n = polygon.len();
        for (index, &p) in self.singularities.iter().enumerate() {
            let at_vertex = polygon.iter().any(|&v| v.dist(p) <= guard);
            if at_vertex {
                if allow_vertices {
                    continue;
                }
                return Err(PotentialError::SingularityOnBoundary { index });
            }
            for i in 0..n {
                if geom::point_segment(p, polygon[i], polygon[(i + 1) % n]).0 <= guard {
                    return Err(PotentialError::SingularityOnBoundary { index });
                }
            }
        }
        Ok(())
    }

    /// Boundary-integral evaluation without validity checks. Returns the
    /// absolute value, so orientation does not matter; a polygon that retraces
    /// itself yields zero.
    pub fn weighted_area_unchecked(&self, polygon: &[Vec2]) -> f64 {
        let n = polygon.len();
        let mut flux = 0.0;
        for &p in &self.singularities {
            for i in 0..n {
                flux += edge_flux(polygon[i], polygon[(i + 1) % n], p);
            }
        }
        (self.mass * geom::signed_area(polygon) + 0.5 * flux).abs()
    }
}

/// `int_a^b <(x - p)/|x - p|, n> ds` with `n` the right-hand unit normal of
/// the edge (outward for counterclockwise polygons), in closed form.
fn edge_flux(a: Vec2, b: Vec2, p: Vec2) -> f64 {
    let e = b - a;
    let len = e.norm();
    if len == 0.0 {
        return 0.0;
    }
    let t = e / len;
    let n = Vec2::new(t.y, -t.x);
    let r = a - p;
    let d = r.dot(n);
    if d == 0.0 {
        return 0.0;
    }
    let ua = r.dot(t);
    let ub = ua + len;
    let ad = d.abs();
    d * ((ub / ad).asinh() - (ua / ad).asinh())
}
