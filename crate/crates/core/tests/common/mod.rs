//! Shared scenario generators and independent numerical oracles.
#![allow(dead_code)]

use std::f64::consts::PI;

use ghflow::cli::scenario::{CurveSpec, OutputSpec, Scenario};
use ghflow::curve::{self, PlanarCurve};
use ghflow::flow::FlowParams;
use ghflow::geom::Vec2;
use ghflow::potential::PotentialField;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn v(x: f64, y: f64) -> Vec2 {
    Vec2::new(x, y)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn pinch_params(h: f64) -> FlowParams {
    FlowParams {
        target_spacing: h,
        surgery_radius: Some(2e-4),
        refinement: Some(0.25),
        stationary_tol: 1e-3,
        max_time: 40.0,
        ..Default::default()
    }
}

fn scenario(name: String, seed: u64, mass: f64, singularities: Vec<Vec2>, initial_curve: CurveSpec, params: FlowParams) -> Scenario {
    Scenario {
        name,
        description: String::new(),
        mass,
        singularities,
        initial_curve,
        params,
        triads: Vec::new(),
        outputs: OutputSpec::default(),
        seed,
        budget_seconds: None,
    }
}

/// Endpoints `(0,0)`, `(L,0)` and interior singularities at the vertices of
/// a strictly concave chain with decreasing phases, under a circular arc
/// tall enough to enclose it.
pub fn random_convex_scenario(seed: u64) -> Scenario {
    let mut r = rng(seed);
    loop {
        let interior = r.gen_range(1..=4usize);
        let segments = interior + 1;
        let span = 30f64.to_radians() * segments as f64;
        let top = r.gen_range((0.5 * span).min(60f64.to_radians())..span.min(70f64.to_radians()));
        let gap_min = 12f64.to_radians();
        let mut phases = Vec::with_capacity(segments);
        let mut phase = top;
        for k in 0..segments {
            phases.push(phase);
            if k + 1 < segments {
                phase -= r.gen_range(gap_min..2.0 * gap_min);
            }
        }
        let mut pts = vec![Vec2::ZERO];
        for &p in &phases {
            let l = r.gen_range(0.8..1.6);
            pts.push(*pts.last().unwrap() + Vec2::from_angle(p) * l);
        }
        let end = *pts.last().unwrap();
        let rot = -end.angle();
        let pts: Vec<Vec2> = pts.iter().map(|p| p.rotate(rot)).collect();
        let first = (pts[1] - pts[0]).angle();
        let last = (pts[segments] - pts[segments - 1]).angle();
        if !(first > 0.0 && last < 0.0 && first - last < 150f64.to_radians()) {
            continue;
        }
        let chord = pts[segments].x;
        let half = first.max(-last) + r.gen_range(15f64..25.0).to_radians();
        if half > 85f64.to_radians() {
            continue;
        }
        let sagitta = 0.5 * chord * (half / 2.0).tan();
        let mut singularities = vec![pts[0], pts[segments]];
        singularities.extend_from_slice(&pts[1..segments]);
        let h = 0.02;
        let nodes = (1.3 * chord / h) as usize;
        let s = scenario(
            format!("convex_{seed}"),
            seed,
            0.0,
            singularities,
            CurveSpec::ConvexArc { start: 0, end: 1, apex_height: sagitta, nodes },
            pinch_params(h),
        );
        let Ok((field, curve)) = s.validate() else { continue };
        let enclosed = (2..field.len()).all(|i| {
            let p = field.singularity(i);
            point_in_polygon(p, &curve.nodes) && ghflow::geom::point_polyline(p, &curve.nodes).0 > 0.1
        });
        if enclosed && curve.is_strictly_convex() {
            return s;
        }
    }
}

/// A random valid scenario: 2 to 6 singularities, two of them joined by a
/// convex arc that avoids the rest.
pub fn random_valid_scenario(seed: u64) -> Scenario {
    let mut r = rng(seed);
    loop {
        let n = r.gen_range(2..=6usize);
        let mass = if r.gen_bool(0.5) { 0.0 } else { r.gen_range(0.0..2.0) };
        let mut pts = vec![Vec2::ZERO, v(r.gen_range(1.5..3.0), 0.0)];
        for _ in 2..n {
            pts.push(v(r.gen_range(-0.5..3.5), r.gen_range(-1.5..1.5)));
        }
        let chord = pts[1].x;
        let sagitta = r.gen_range(-0.45..0.45) * chord;
        if sagitta.abs() < 0.05 {
            continue;
        }
        let h = r.gen_range(0.02..0.04);
        let nodes = (1.6 * chord / h) as usize;
        let s = scenario(
            format!("random_{seed}"),
            seed,
            mass,
            pts,
            CurveSpec::ConvexArc { start: 0, end: 1, apex_height: sagitta, nodes },
            FlowParams { target_spacing: h, stationary_tol: 1e-3, max_time: 5.0, ..Default::default() },
        );
        let Ok((field, curve)) = s.validate() else { continue };
        let clear = (2..field.len()).all(|i| ghflow::geom::point_polyline(field.singularity(i), &curve.nodes).0 > 0.15);
        if clear && field.min_separation() > 0.2 {
            return s;
        }
    }
}

/// Crossing-number point in polygon, independent of the crate's predicate.
pub fn point_in_polygon(p: Vec2, poly: &[Vec2]) -> bool {
    let mut inside = false;
    let n = poly.len();
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        if (a.y > p.y) != (b.y > p.y) {
            let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if x > p.x {
                inside = !inside;
            }
        }
    }
    inside
}

pub fn polygon_area(poly: &[Vec2]) -> f64 {
    let n = poly.len();
    0.5 * (0..n).map(|i| poly[i].x * poly[(i + 1) % n].y - poly[(i + 1) % n].x * poly[i].y).sum::<f64>()
}

/// Length of `{t > 0 : p + t u in poly}` from all ray/edge crossings.
pub fn ray_length_inside(p: Vec2, u: Vec2, poly: &[Vec2]) -> f64 {
    let n = poly.len();
    let mut ts = Vec::new();
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        let e = b - a;
        let den = u.x * e.y - u.y * e.x;
        if den.abs() < 1e-300 {
            continue;
        }
        let w = a - p;
        let t = (w.x * e.y - w.y * e.x) / den;
        let s = (w.x * u.y - w.y * u.x) / den;
        if t > 1e-12 && (0.0..1.0).contains(&s) {
            ts.push(t);
        }
    }
    ts.sort_by(f64::total_cmp);
    let mut inside = point_in_polygon(p + u * 1e-9, poly);
    let (mut total, mut prev) = (0.0, 0.0);
    for t in ts {
        if inside {
            total += t - prev;
        }
        inside = !inside;
        prev = t;
    }
    total
}

/// Polar quadrature of `m + sum 1/(2|x - p|)` over a polygon: the singular
/// terms become `1/2 * integral of the ray length inside` over angles.
pub fn weighted_area_quadrature(field: &PotentialField, poly: &[Vec2], angles: usize) -> f64 {
    let mut total = field.mass() * polygon_area(poly).abs();
    for &p in field.singularities() {
        let dth = 2.0 * PI / angles as f64;
        let sum: f64 = (0..angles).map(|k| ray_length_inside(p, Vec2::from_angle((k as f64 + 0.5) * dth), poly)).sum();
        total += 0.5 * sum * dth;
    }
    total
}

/// Stratified Monte Carlo estimate of the same integral: the mass term by
/// uniform samples in the bounding box, each singular term by samples
/// uniform in polar coordinates around its centre, over the sector of
/// directions and the band of radii that meet the region. The sector is exact for convex regions.
pub fn weighted_area_monte_carlo(field: &PotentialField, poly: &[Vec2], strata: usize, rng: &mut ChaCha8Rng) -> f64 {
    let (mut lo, mut hi) = (v(f64::INFINITY, f64::INFINITY), v(f64::NEG_INFINITY, f64::NEG_INFINITY));
    for p in poly {
        lo = v(lo.x.min(p.x), lo.y.min(p.y));
        hi = v(hi.x.max(p.x), hi.y.max(p.y));
    }
    let cell = |i: usize, j: usize, rng: &mut ChaCha8Rng| {
        ((i as f64 + rng.gen::<f64>()) / strata as f64, (j as f64 + rng.gen::<f64>()) / strata as f64)
    };
    let samples = (strata * strata) as f64;
    let mut total = 0.0;
    if field.mass() != 0.0 {
        let size = hi - lo;
        let mut hits = 0usize;
        for i in 0..strata {
            for j in 0..strata {
                let (a, b) = cell(i, j, rng);
                hits += point_in_polygon(v(lo.x + a * size.x, lo.y + b * size.y), poly) as usize;
            }
        }
        total += field.mass() * size.x * size.y * hits as f64 / samples;
    }
    let centre = poly.iter().fold(Vec2::ZERO, |a, &b| a + b) / poly.len() as f64;
    for &p in field.singularities() {
        let reach = poly.iter().map(|x| x.dist(p)).fold(0.0, f64::max);
        // Sector of directions that can meet the (convex) region.
        let mut closed = poly.to_vec();
        closed.push(poly[0]);
        let edge = ghflow::geom::point_polyline(p, &closed).0;
        let inside = edge > 0.0 && point_in_polygon(p, poly);
        let (lo_a, hi_a) = if inside {
            (-PI, PI)
        } else {
            let r = (centre - p).angle();
            poly.iter()
                .filter(|x| x.dist(p) > 0.0)
                .map(|x| ghflow::geom::wrap_angle((*x - p).angle() - r))
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), t| (a.min(t), b.max(t)))
        };
        let base = (centre - p).angle();
        let sector = hi_a - lo_a;
        let near = if inside { 0.0 } else { edge };
        let mut hits = 0usize;
        for i in 0..strata {
            for j in 0..strata {
                let (a, b) = cell(i, j, rng);
                let x = p + Vec2::from_angle(base + lo_a + sector * a) * (near + (reach - near) * b);
                hits += point_in_polygon(x, poly) as usize;
            }
        }
        total += 0.5 * sector * (reach - near) * hits as f64 / samples;
    }
    total
}

/// Test function vanishing to second order at every singularity, so that
/// the weighted integral stays finite on curves through them.
pub fn test_function(field: &PotentialField, x: Vec2) -> f64 {
    let c = field.centroid();
    field.singularities().iter().map(|q| x.dist(*q).powi(2)).product::<f64>() * (-(x - c).norm_sq()).exp()
}

/// `integral of f * phi ds` over the given curves by the edge midpoint rule.
pub fn weighted_test_integral(field: &PotentialField, curves: &[PlanarCurve]) -> f64 {
    curves
        .iter()
        .flat_map(|c| c.nodes.windows(2))
        .map(|e| {
            let m = e[0].lerp(e[1], 0.5);
            test_function(field, m) * field.phi_unchecked(m) * e[0].dist(e[1])
        })
        .sum()
}

/// Three-point scenario with its arc sampled at `nodes` points.
pub fn three_point_with_nodes(nodes: usize) -> Scenario {
    let mut s = ghflow::cli::bundled("three_point_pinch").unwrap();
    let CurveSpec::ConvexArc { apex_height, .. } = s.initial_curve else { unreachable!() };
    let len = PlanarCurve::pinned(curve::circular_arc(v(0.0, 0.0), v(2.0, 0.0), apex_height, nodes).unwrap(), 0, 1, 1.0).length();
    s.initial_curve = CurveSpec::ConvexArc { start: 0, end: 1, apex_height, nodes };
    s.params.target_spacing = len / (nodes - 1) as f64;
    s
}
