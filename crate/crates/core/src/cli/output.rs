//! CSV time series, SVG frames and atomic file writes.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use super::execute::{union_curve, Simulation};
use crate::flow::Diagnostics;
use crate::geom::Vec2;
use crate::pacman;
use crate::stability;
use crate::surgery::FlowState;

/// Writes to a sibling temporary file, then renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = std::path::PathBuf::from(tmp);
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)
}

/// Decimal with 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn csv_header(singularities: usize, triads: usize) -> Vec<String> {
    let mut h: Vec<String> = [
        "time",
        "component_count",
        "total_length",
        "angle_inf",
        "angle_sup",
        "max_abs_kappa",
        "max_phi_inv_kappa",
        "max_normal_log_phi",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    h.extend((0..singularities).map(|i| format!("min_dist_sing_{i}")));
    h.extend((0..triads).map(|j| format!("area_triad_{j}")));
    h
}

/// One row of monitors for a flow state.
pub fn csv_row(sim: &Simulation, state: &FlowState) -> Vec<f64> {
    let field = &sim.field;
    let diags: Vec<Diagnostics> =
        state.components.iter().map(|c| Diagnostics::compute(field, c).unwrap_or_default()).collect();
    let fold = |f: &dyn Fn(&Diagnostics) -> f64, init: f64, op: fn(f64, f64) -> f64| diags.iter().map(f).fold(init, op);
    let mut row = vec![
        state.time,
        state.components.len() as f64,
        fold(&|d| d.length, 0.0, |a, b| a + b),
        fold(&|d| d.angle_inf, f64::INFINITY, f64::min),
        fold(&|d| d.angle_sup, f64::NEG_INFINITY, f64::max),
        fold(&|d| d.max_abs_kappa, 0.0, f64::max),
        fold(&|d| d.max_phi_inv_kappa, 0.0, f64::max),
        fold(&|d| d.max_normal_log_phi, 0.0, f64::max),
    ];
    for i in 0..field.len() {
        let d = diags.iter().filter_map(|d| d.min_dist.get(i).copied().flatten()).fold(f64::INFINITY, f64::min);
        row.push(if d.is_finite() { d } else { 0.0 });
    }
    if !sim.scenario.triads.is_empty() {
        let union = union_curve(state);
        for t in &sim.scenario.triads {
            row.push(pacman::area(field, t, &union).unwrap_or(f64::NAN));
        }
    }
    row
}

pub fn csv_series(sim: &Simulation) -> String {
    let mut out = csv_header(sim.field.len(), sim.scenario.triads.len()).join(",");
    out.push('\n');
    let every = sim.scenario.outputs.csv_every.max(1);
    let traj = &sim.outcome.trajectory;
    for (k, state) in traj.iter().enumerate() {
        if k % every != 0 && k + 1 != traj.len() {
            continue;
        }
        let row: Vec<String> = csv_row(sim, state).into_iter().map(num).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// World-space box `(min, max)` of the singularities and the initial curve,
/// padded by 20% on each side.
pub fn viewport(sim: &Simulation) -> (Vec2, Vec2) {
    let pts = sim.field.singularities().iter().chain(sim.initial.nodes.iter());
    let (mut lo, mut hi) = (Vec2::new(f64::INFINITY, f64::INFINITY), Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY));
    for p in pts {
        lo = Vec2::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Vec2::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    let size = hi - lo;
    let pad = Vec2::new(0.2 * size.x.max(1e-3), 0.2 * size.y.max(1e-3));
    (lo - pad, hi + pad)
}

fn polyline(pts: &[Vec2], style: &str) -> String {
    let coords: Vec<String> = pts.iter().map(|p| format!("{:.6},{:.6}", p.x, p.y)).collect();
    format!("<polyline points=\"{}\" fill=\"none\" stroke-linejoin=\"round\" {style}/>\n", coords.join(" "))
}

pub fn svg_frame(sim: &Simulation, state: &FlowState, oracle: Option<&[Vec2]>) -> String {
    let (lo, hi) = viewport(sim);
    let size = hi - lo;
    let width = 800.0;
    let height = width * size.y / size.x;
    let mark = 0.01 * size.x.max(size.y);
    // One pixel in world units.
    let px = size.x / width;
    let mut s = String::new();
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width:.0}\" height=\"{height:.0}\" viewBox=\"{:.6} {:.6} {:.6} {:.6}\">",
        lo.x, -hi.y, size.x, size.y
    );
    let _ = writeln!(s, "<title>{} t={:.6}</title>", sim.scenario.name, state.time);
    s.push_str("<g transform=\"scale(1,-1)\">\n");
    if let Some(chain) = oracle {
        let style = format!("stroke=\"#888\" stroke-width=\"{:.6}\" stroke-dasharray=\"{:.6} {:.6}\"", px, 6.0 * px, 4.0 * px);
        s.push_str(&polyline(chain, &style));
    }
    for c in &state.components {
        s.push_str(&polyline(&c.nodes, &format!("stroke=\"#1f5fbf\" stroke-width=\"{:.6}\"", 2.0 * px)));
    }
    for p in sim.field.singularities() {
        let _ = writeln!(
            s,
            "<path d=\"M{:.6},{:.6}L{:.6},{:.6}M{:.6},{:.6}L{:.6},{:.6}\" stroke=\"#c0392b\" stroke-width=\"{:.6}\"/>",
            p.x - mark, p.y - mark, p.x + mark, p.y + mark, p.x - mark, p.y + mark, p.x + mark, p.y - mark, 1.5 * px
        );
    }
    let mut pinned: Vec<usize> = state.components.iter().flat_map(|c| c.endpoint_singularities()).collect();
    pinned.sort_unstable();
    pinned.dedup();
    for i in pinned {
        let p = sim.field.singularity(i);
        let _ = writeln!(s, "<circle cx=\"{:.6}\" cy=\"{:.6}\" r=\"{:.6}\" fill=\"#222\"/>", p.x, p.y, 0.6 * mark);
    }
    s.push_str("</g>\n</svg>\n");
    s
}

/// Named SVG frames at the scenario's cadence, always including the first
/// and last state.
pub fn svg_frames(sim: &Simulation) -> Vec<(String, String)> {
    let oracle = stability::limit_oracle(&sim.field, &sim.initial).ok().map(|c| c.points());
    let traj = &sim.outcome.trajectory;
    let every = sim.scenario.outputs.frame_every;
    traj.iter()
        .enumerate()
        .filter(|(k, _)| *k == 0 || *k + 1 == traj.len() || (every > 0 && k % every == 0))
        .map(|(k, st)| (format!("frame_{k:05}.svg"), svg_frame(sim, st, oracle.as_deref())))
        .collect()
}
