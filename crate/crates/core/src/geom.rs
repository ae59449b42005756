//! Planar vectors, segment predicates and polygon helpers.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    pub fn from_angle(theta: f64) -> Self {
        Vec2::new(theta.cos(), theta.sin())
    }

    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the 3-D cross product.
    pub fn cross(self, o: Vec2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn norm_sq(self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    /// Rotation by +90 degrees.
    pub fn perp(self) -> Vec2 {
        Vec2::new(-self.y, self.x)
    }

    pub fn normalized(self) -> Vec2 {
        self / self.norm()
    }

    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }

    pub fn dist(self, o: Vec2) -> f64 {
        (self - o).norm()
    }

    pub fn rotate(self, theta: f64) -> Vec2 {
        let (s, c) = theta.sin_cos();
        Vec2::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    pub fn lerp(self, o: Vec2, t: f64) -> Vec2 {
        self + (o - self) * t
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl fmt::Debug for Vec2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:?}, {:?})", self.x, self.y)
    }
}

impl From<[f64; 2]> for Vec2 {
    fn from(a: [f64; 2]) -> Self {
        Vec2::new(a[0], a[1])
    }
}

impl From<Vec2> for [f64; 2] {
    fn from(v: Vec2) -> Self {
        [v.x, v.y]
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

impl Mul<Vec2> for f64 {
    type Output = Vec2;
    fn mul(self, v: Vec2) -> Vec2 {
        v * self
    }
}

impl Div<f64> for Vec2 {
    type Output = Vec2;
    fn div(self, s: f64) -> Vec2 {
        Vec2::new(self.x / s, self.y / s)
    }
}

impl AddAssign for Vec2 {
    fn add_assign(&mut self, o: Vec2) {
        self.x += o.x;
        self.y += o.y;
    }
}

impl SubAssign for Vec2 {
    fn sub_assign(&mut self, o: Vec2) {
        self.x -= o.x;
        self.y -= o.y;
    }
}

/// Wraps an angle into (-pi, pi].
pub fn wrap_angle(a: f64) -> f64 {
    let two_pi = std::f64::consts::TAU;
    let mut w = a.rem_euclid(two_pi);
    if w > std::f64::consts::PI {
        w -= two_pi;
    }
    w
}

/// Closest point on segment `ab` to `p`: (distance, point, parameter in [0, 1]).
pub fn point_segment(p: Vec2, a: Vec2, b: Vec2) -> (f64, Vec2, f64) {
    let e = b - a;
    let len2 = e.norm_sq();
    let t = if len2 > 0.0 {
        ((p - a).dot(e) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let q = a + e * t;
    (p.dist(q), q, t)
}

/// Distance from `p` to an open polyline, with the closest point and the index
/// of the segment it lies on.
pub fn point_polyline(p: Vec2, pts: &[Vec2]) -> (f64, Vec2, usize) {
    let mut best = (f64::INFINITY, pts[0], 0);
    for i in 0..pts.len().saturating_sub(1) {
        let (d, q, _) = point_segment(p, pts[i], pts[i + 1]);
        if d < best.0 {
            best = (d, q, i);
        }
    }
    if pts.len() == 1 {
        best = (p.dist(pts[0]), pts[0], 0);
    }
    best
}

fn orient(a: Vec2, b: Vec2, c: Vec2) -> f64 {
    (b - a).cross(c - a)
}

fn on_segment(a: Vec2, b: Vec2, p: Vec2) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

/// Closed-segment intersection test (touching counts).
pub fn segments_intersect(a: Vec2, b: Vec2, c: Vec2, d: Vec2) -> bool {
    let o1 = orient(a, b, c);
    let o2 = orient(a, b, d);
    let o3 = orient(c, d, a);
    let o4 = orient(c, d, b);
    if ((o1 > 0.0 && o2 < 0.0) || (o1 < 0.0 && o2 > 0.0))
        && ((o3 > 0.0 && o4 < 0.0) || (o3 < 0.0 && o4 > 0.0))
    {
        return true;
    }
    (o1 == 0.0 && on_segment(a, b, c))
        || (o2 == 0.0 && on_segment(a, b, d))
        || (o3 == 0.0 && on_segment(c, d, a))
        || (o4 == 0.0 && on_segment(c, d, b))
}

/// Finds a pair of non-adjacent intersecting segments, or a pair of adjacent
/// segments that fold back onto each other. Segment `i` joins `pts[i]` and
/// `pts[i + 1]`; for a closed polygon the wrap-around segment is included.
/// Uses a uniform grid so typical curves cost O(n).
pub fn find_self_intersection(pts: &[Vec2], closed: bool) -> Option<(usize, usize)> {
    let n = pts.len();
    if n < 3 {
        return None;
    }
    let nseg = if closed { n } else { n - 1 };
    let seg = |i: usize| (pts[i], pts[(i + 1) % n]);
    let adjacent = |i: usize, j: usize| {
        let (i, j) = (i.min(j), i.max(j));
        j == i + 1 || (closed && i == 0 && j == nseg - 1)
    };

    let mut total = 0.0;
    let (mut lo, mut hi) = (pts[0], pts[0]);
    for i in 0..nseg {
        let (a, b) = seg(i);
        total += a.dist(b);
        lo = Vec2::new(lo.x.min(b.x), lo.y.min(b.y));
        hi = Vec2::new(hi.x.max(b.x), hi.y.max(b.y));
    }
    let extent = (hi.x - lo.x).max(hi.y - lo.y);
    let cell = (2.0 * total / nseg as f64).max(extent / 4096.0).max(f64::MIN_POSITIVE);

    let key = |p: Vec2| (((p.x - lo.x) / cell).floor() as i64, ((p.y - lo.y) / cell).floor() as i64);
    let mut cells: Vec<((i64, i64), usize)> = Vec::with_capacity(2 * nseg);
    for i in 0..nseg {
        let (a, b) = seg(i);
        let (k0, k1) = (key(Vec2::new(a.x.min(b.x), a.y.min(b.y))), key(Vec2::new(a.x.max(b.x), a.y.max(b.y))));
        for gx in k0.0..=k1.0 {
            for gy in k0.1..=k1.1 {
                cells.push(((gx, gy), i));
            }
        }
    }
    cells.sort_unstable();

    let mut hits: Vec<(usize, usize)> = Vec::new();
    for bucket in cells.chunk_by(|x, y| x.0 == y.0) {
        for (u, &(_, i)) in bucket.iter().enumerate() {
            for &(_, j) in &bucket[u + 1..] {
                let (a, b) = seg(i);
                let (c, d) = seg(j);
                if adjacent(i, j) {
                    // A shared vertex is fine unless the second edge folds back.
                    let (first, second) = if (i + 1) % nseg == j { (b - a, d - c) } else { (d - c, b - a) };
                    if first.cross(second) == 0.0 && first.dot(second) < 0.0 {
                        hits.push((i.min(j), i.max(j)));
                    }
                    continue;
                }
                if segments_intersect(a, b, c, d) {
                    hits.push((i.min(j), i.max(j)));
                }
            }
        }
    }
    hits.into_iter().min()
}

/// Signed area, positive for counterclockwise polygons.
pub fn signed_area(pts: &[Vec2]) -> f64 {
    let n = pts.len();
    let mut s = 0.0;
    for i in 0..n {
        s += pts[i].cross(pts[(i + 1) % n]);
    }
    0.5 * s
}

/// Even-odd point-in-polygon test.
pub fn point_in_polygon(p: Vec2, poly: &[Vec2]) -> bool {
    let n = poly.len();
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (poly[i], poly[j]);
        if (a.y > p.y) != (b.y > p.y) {
            let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if p.x < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

/// Distance from `p` to the boundary of a closed polygon.
pub fn point_polygon_boundary(p: Vec2, poly: &[Vec2]) -> f64 {
    let n = poly.len();
    (0..n)
        .map(|i| point_segment(p, poly[i], poly[(i + 1) % n]).0)
        .fold(f64::INFINITY, f64::min)
}

fn directed_hausdorff(a: &[Vec2], b: &[Vec2], sub: usize) -> f64 {
    let mut worst: f64 = 0.0;
    let mut visit = |p: Vec2| {
        let d = point_polyline(p, b).0;
        worst = worst.max(d);
    };
    for i in 0..a.len() {
        visit(a[i]);
        if i + 1 < a.len() {
            for k in 1..sub {
                visit(a[i].lerp(a[i + 1], k as f64 / sub as f64));
            }
        }
    }
    worst
}

/// Symmetric Hausdorff distance between two open polylines, sampling each
/// segment at `sub` points.
pub fn hausdorff(a: &[Vec2], b: &[Vec2], sub: usize) -> f64 {
    directed_hausdorff(a, b, sub.max(1)).max(directed_hausdorff(b, a, sub.max(1)))
}
