//! Planar geometry primitives: points, closed polylines, admissibility checks.

use crate::{Error, Result};

/// A point (or vector) in the plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    pub fn dot(self, other: Point2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, other: Point2) -> f64 {
        (self - other).norm()
    }

    pub fn scale(self, s: f64) -> Point2 {
        Point2::new(self.x * s, self.y * s)
    }
}

impl std::ops::Add for Point2 {
    type Output = Point2;
    fn add(self, rhs: Point2) -> Point2 {
        Point2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl std::ops::Sub for Point2 {
    type Output = Point2;
    fn sub(self, rhs: Point2) -> Point2 {
        Point2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

/// 2D cross product (z-component of the 3D cross product).
pub fn cross(a: Point2, b: Point2) -> f64 {
    a.x * b.y - a.y * b.x
}

/// Distance from `p` to the segment `[a, b]`.
pub fn point_segment_distance(p: Point2, a: Point2, b: Point2) -> f64 {
    let ab = b - a;
    let len2 = ab.dot(ab);
    if len2 == 0.0 {
        return p.dist(a);
    }
    let t = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    p.dist(a + ab.scale(t))
}

fn segments_intersect(a: Point2, b: Point2, c: Point2, d: Point2) -> bool {
    let d1 = cross(b - a, c - a);
    let d2 = cross(b - a, d - a);
    let d3 = cross(d - c, a - c);
    let d4 = cross(d - c, b - c);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    let on = |p: Point2, q: Point2, r: Point2| {
        cross(q - p, r - p).abs() < 1e-14
            && r.x >= p.x.min(q.x) - 1e-14
            && r.x <= p.x.max(q.x) + 1e-14
            && r.y >= p.y.min(q.y) - 1e-14
            && r.y <= p.y.max(q.y) + 1e-14
    };
    on(a, b, c) || on(a, b, d) || on(c, d, a) || on(c, d, b)
}

/// Winding orientation of a closed polyline.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Orientation {
    CounterClockwise,
    Clockwise,
}

/// A simple closed polyline. Closure is implied: the segment from the last
/// point back to the first is part of the curve.
#[derive(Clone, Debug)]
pub struct BoundaryPolyline {
    points: Vec<Point2>,
    orientation: Orientation,
}

impl BoundaryPolyline {
    /// Builds a polyline from its vertices, validating simplicity and
    /// nondegeneracy. The orientation is recorded from the signed area.
    pub fn new(points: Vec<Point2>) -> Result<Self> {
        if points.len() < 8 {
            return Err(Error::Geometry(format!(
                "polyline needs at least 8 points, got {}",
                points.len()
            )));
        }
        let n = points.len();
        for i in 0..n {
            let j = (i + 1) % n;
            if points[i].dist(points[j]) == 0.0 {
                return Err(Error::Geometry(format!(
                    "consecutive duplicate point at index {i}"
                )));
            }
        }
        // Simplicity: no two non-adjacent segments may intersect.
        for i in 0..n {
            let (a, b) = (points[i], points[(i + 1) % n]);
            for j in i + 1..n {
                if j == i || (j + 1) % n == i || (i + 1) % n == j {
                    continue;
                }
                let (c, d) = (points[j], points[(j + 1) % n]);
                if segments_intersect(a, b, c, d) {
                    return Err(Error::Geometry(format!(
                        "polyline self-intersects between segments {i} and {j}"
                    )));
                }
            }
        }
        let area = signed_area(&points);
        if area.abs() < 1e-300 {
            return Err(Error::Geometry("polyline has zero signed area".into()));
        }
        let orientation = if area > 0.0 {
            Orientation::CounterClockwise
        } else {
            Orientation::Clockwise
        };
        Ok(BoundaryPolyline { points, orientation })
    }

    /// Circle of radius `r` about `center`, sampled counterclockwise with `n`
    /// points starting at angle zero.
    pub fn circle(center: Point2, r: f64, n: usize) -> Result<Self> {
        Self::from_radial(center, n, |_| r)
    }

    /// Ellipse with semi-axes `rx`, `ry`.
    pub fn ellipse(center: Point2, rx: f64, ry: f64, n: usize) -> Result<Self> {
        let pts = (0..n)
            .map(|i| {
                let t = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
                Point2::new(center.x + rx * t.cos(), center.y + ry * t.sin())
            })
            .collect();
        Self::new(pts)
    }

    /// Two-lobed "peanut" curve r(θ) = r0·√(cos²θ + c·sin²θ), pinched for
    /// small `c`.
    pub fn peanut(center: Point2, r0: f64, c: f64, n: usize) -> Result<Self> {
        Self::from_radial(center, n, |t| {
            r0 * (t.cos().powi(2) + c * t.sin().powi(2)).sqrt()
        })
    }

    /// Flower curve r(θ) = r0·(1 + ε·cos(mθ)).
    pub fn flower(center: Point2, r0: f64, eps: f64, m: u32, n: usize) -> Result<Self> {
        Self::from_radial(center, n, |t| r0 * (1.0 + eps * (m as f64 * t).cos()))
    }

    fn from_radial(center: Point2, n: usize, r: impl Fn(f64) -> f64) -> Result<Self> {
        let pts = (0..n)
            .map(|i| {
                let t = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
                let ri = r(t);
                Point2::new(center.x + ri * t.cos(), center.y + ri * t.sin())
            })
            .collect();
        Self::new(pts)
    }

    pub fn points(&self) -> &[Point2] {
        &self.points
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    pub fn signed_area(&self) -> f64 {
        signed_area(&self.points)
    }

    /// Returns a counterclockwise copy.
    pub fn oriented_ccw(&self) -> BoundaryPolyline {
        match self.orientation {
            Orientation::CounterClockwise => self.clone(),
            Orientation::Clockwise => {
                let mut pts = self.points.clone();
                pts.reverse();
                BoundaryPolyline {
                    points: pts,
                    orientation: Orientation::CounterClockwise,
                }
            }
        }
    }

    pub fn perimeter(&self) -> f64 {
        let n = self.points.len();
        (0..n)
            .map(|i| self.points[i].dist(self.points[(i + 1) % n]))
            .sum()
    }

    /// Largest extent of the bounding box.
    pub fn diameter(&self) -> f64 {
        let (mut xmin, mut xmax) = (f64::INFINITY, f64::NEG_INFINITY);
        let (mut ymin, mut ymax) = (f64::INFINITY, f64::NEG_INFINITY);
        for p in &self.points {
            xmin = xmin.min(p.x);
            xmax = xmax.max(p.x);
            ymin = ymin.min(p.y);
            ymax = ymax.max(p.y);
        }
        (xmax - xmin).max(ymax - ymin)
    }

    /// Even-odd point-in-polygon test.
    pub fn contains_point(&self, p: Point2) -> bool {
        let n = self.points.len();
        let mut inside = false;
        for i in 0..n {
            let a = self.points[i];
            let b = self.points[(i + 1) % n];
            if (a.y > p.y) != (b.y > p.y) {
                let x = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
                if p.x < x {
                    inside = !inside;
                }
            }
        }
        inside
    }

    /// Minimum distance from `p` to the curve.
    pub fn distance_to_point(&self, p: Point2) -> f64 {
        let n = self.points.len();
        (0..n)
            .map(|i| point_segment_distance(p, self.points[i], self.points[(i + 1) % n]))
            .fold(f64::INFINITY, f64::min)
    }

    /// True if any segment of `self` crosses a segment of `other`.
    pub fn intersects(&self, other: &BoundaryPolyline) -> bool {
        let n = self.points.len();
        let m = other.points.len();
        for i in 0..n {
            let (a, b) = (self.points[i], self.points[(i + 1) % n]);
            for j in 0..m {
                let (c, d) = (other.points[j], other.points[(j + 1) % m]);
                if segments_intersect(a, b, c, d) {
                    return true;
                }
            }
        }
        false
    }

    /// Splits segments longer than `h` by inserting equispaced points.
    /// Original vertices are kept.
    pub fn subdivided(&self, h: f64) -> BoundaryPolyline {
        let n = self.points.len();
        let mut pts = Vec::new();
        for i in 0..n {
            let a = self.points[i];
            let b = self.points[(i + 1) % n];
            pts.push(a);
            let len = a.dist(b);
            let pieces = (len / h).ceil() as usize;
            for k in 1..pieces {
                let t = k as f64 / pieces as f64;
                pts.push(a + (b - a).scale(t));
            }
        }
        BoundaryPolyline {
            points: pts,
            orientation: self.orientation,
        }
    }

    /// Cumulative arc length of each vertex, measured counterclockwise from
    /// the canonical start (vertex of maximal x, ties broken by minimal y).
    /// Returns (per-vertex arc length in original ordering, total length).
    pub fn arc_length_coordinates(&self) -> (Vec<f64>, f64) {
        let ccw = self.oriented_ccw();
        let n = ccw.points.len();
        let start = (0..n)
            .max_by(|&i, &j| {
                let a = ccw.points[i];
                let b = ccw.points[j];
                a.x.partial_cmp(&b.x)
                    .unwrap()
                    .then(b.y.partial_cmp(&a.y).unwrap())
            })
            .unwrap();
        let mut s_ccw = vec![0.0; n];
        let mut acc = 0.0;
        for k in 0..n {
            let i = (start + k) % n;
            let j = (start + k + 1) % n;
            s_ccw[i] = acc;
            acc += ccw.points[i].dist(ccw.points[j]);
        }
        let total = acc;
        // Map back to the original vertex ordering.
        let s = match self.orientation {
            Orientation::CounterClockwise => s_ccw,
            Orientation::Clockwise => {
                let mut s = vec![0.0; n];
                for i in 0..n {
                    s[n - 1 - i] = s_ccw[i];
                }
                s
            }
        };
        (s, total)
    }

    /// CSV export, header `x,y`, closure implied.
    pub fn write_csv(&self, path: &std::path::Path) -> Result<()> {
        let mut out = String::from("x,y\n");
        for p in &self.points {
            out.push_str(&format!("{:.17e},{:.17e}\n", p.x, p.y));
        }
        std::fs::write(path, out)?;
        Ok(())
    }

    pub fn read_csv(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut pts = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if i == 0 {
                continue;
            }
            let mut it = line.split(',');
            let x: f64 = it
                .next()
                .ok_or_else(|| Error::Geometry("missing x column".into()))?
                .trim()
                .parse()
                .map_err(|e| Error::Geometry(format!("bad x at line {}: {e}", i + 1)))?;
            let y: f64 = it
                .next()
                .ok_or_else(|| Error::Geometry("missing y column".into()))?
                .trim()
                .parse()
                .map_err(|e| Error::Geometry(format!("bad y at line {}: {e}", i + 1)))?;
            pts.push(Point2::new(x, y));
        }
        Self::new(pts)
    }
}

fn signed_area(points: &[Point2]) -> f64 {
    let n = points.len();
    0.5 * (0..n)
        .map(|i| cross(points[i], points[(i + 1) % n]))
        .sum::<f64>()
}

/// Geometric side constraints of the admissible set.
#[derive(Clone, Copy, Debug)]
pub struct GeometryConstraints {
    /// Minimum clearance of the inclusion from the outer boundary.
    pub delta: f64,
    /// Minimum triangle quality before a remesh is forced.
    pub min_quality: f64,
}

impl GeometryConstraints {
    pub fn new(delta: f64, min_quality: f64) -> Result<Self> {
        if delta <= 0.0 {
            return Err(Error::Geometry(format!("delta must be positive, got {delta}")));
        }
        if !(min_quality > 0.0 && min_quality <= 1.0) {
            return Err(Error::Geometry(format!(
                "min_quality must lie in (0, 1], got {min_quality}"
            )));
        }
        Ok(GeometryConstraints { delta, min_quality })
    }
}

impl Default for GeometryConstraints {
    fn default() -> Self {
        GeometryConstraints {
            delta: 0.05,
            min_quality: 0.2,
        }
    }
}

/// Outcome of an admissibility check.
#[derive(Clone, Debug)]
pub struct AdmissibilityReport {
    pub admissible: bool,
    /// Minimum distance from the inner curve to the outer curve.
    pub min_clearance: f64,
    pub inner_inside_outer: bool,
    pub violations: Vec<String>,
}

/// Checks that `inner` lies strictly inside `outer` with clearance greater
/// than `constraints.delta` everywhere.
pub fn check_admissibility(
    inner: &BoundaryPolyline,
    outer: &BoundaryPolyline,
    constraints: &GeometryConstraints,
) -> AdmissibilityReport {
    let mut violations = Vec::new();
    let inside = inner.points().iter().all(|&p| outer.contains_point(p)) && !inner.intersects(outer);
    if !inside {
        violations.push("inner boundary is not strictly inside the outer boundary".into());
    }
    let min_clearance = inner
        .points()
        .iter()
        .map(|&p| outer.distance_to_point(p))
        .fold(f64::INFINITY, f64::min);
    if min_clearance <= constraints.delta {
        violations.push(format!(
            "clearance {min_clearance:.6} does not exceed delta {}",
            constraints.delta
        ));
    }
    AdmissibilityReport {
        admissible: violations.is_empty(),
        min_clearance,
        inner_inside_outer: inside,
        violations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_circle(n: usize) -> BoundaryPolyline {
        BoundaryPolyline::circle(Point2::new(0.0, 0.0), 1.0, n).unwrap()
    }

    #[test]
    fn circle_is_ccw_with_correct_area() {
        let c = unit_circle(200);
        assert_eq!(c.orientation(), Orientation::CounterClockwise);
        assert!((c.signed_area() - std::f64::consts::PI).abs() < 1e-3);
    }

    #[test]
    fn too_few_points_rejected() {
        let pts = (0..5)
            .map(|i| {
                let t = 2.0 * std::f64::consts::PI * i as f64 / 5.0;
                Point2::new(t.cos(), t.sin())
            })
            .collect();
        assert!(BoundaryPolyline::new(pts).is_err());
    }

    #[test]
    fn self_intersection_rejected() {
        // Figure-eight ordering of 8 points.
        let pts = vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 1.0),
            Point2::new(1.0, 0.0),
            Point2::new(0.0, 1.0),
            Point2::new(-0.5, 1.0),
            Point2::new(-1.0, 0.8),
            Point2::new(-1.0, 0.2),
            Point2::new(-0.5, 0.0),
        ];
        assert!(BoundaryPolyline::new(pts).is_err());
    }

    #[test]
    fn admissibility_clearance_cases() {
        let outer = unit_circle(100);
        let c = GeometryConstraints::new(0.1, 0.2).unwrap();
        let inner = BoundaryPolyline::circle(Point2::new(0.0, 0.0), 0.5, 60).unwrap();
        assert!(check_admissibility(&inner, &outer, &c).admissible);

        let close = BoundaryPolyline::circle(Point2::new(0.0, 0.0), 0.95, 60).unwrap();
        assert!(!check_admissibility(&close, &outer, &c).admissible);

        let touching = BoundaryPolyline::circle(Point2::new(0.55, 0.0), 0.5, 60).unwrap();
        let report = check_admissibility(&touching, &outer, &c);
        assert!(!report.admissible);
    }

    #[test]
    fn admissibility_monotone_in_delta() {
        let outer = unit_circle(100);
        let inner = BoundaryPolyline::circle(Point2::new(0.1, 0.0), 0.5, 60).unwrap();
        let loose = GeometryConstraints::new(0.05, 0.2).unwrap();
        let tight = GeometryConstraints::new(0.3, 0.2).unwrap();
        let at_tight = check_admissibility(&inner, &outer, &tight);
        let at_loose = check_admissibility(&inner, &outer, &loose);
        if at_tight.admissible {
            assert!(at_loose.admissible);
        }
    }

    #[test]
    fn subdivision_keeps_original_vertices() {
        let c = unit_circle(16);
        let fine = c.subdivided(0.05);
        for p in c.points() {
            assert!(fine.points().iter().any(|q| q.dist(*p) < 1e-15));
        }
        let n = fine.points().len();
        for i in 0..n {
            let d = fine.points()[i].dist(fine.points()[(i + 1) % n]);
            assert!(d <= 0.05 + 1e-12);
        }
    }

    #[test]
    fn arc_length_starts_at_max_x() {
        let c = unit_circle(100);
        let (s, total) = c.arc_length_coordinates();
        assert_eq!(s[0], 0.0); // first sample is at angle 0 = max x
        assert!((total - c.perimeter()).abs() < 1e-12);
        // s increases along the ccw ordering
        assert!(s[1] > 0.0 && s[1] < s[2]);
    }

    #[test]
    fn point_segment_distance_basics() {
        let a = Point2::new(0.0, 0.0);
        let b = Point2::new(2.0, 0.0);
        assert!((point_segment_distance(Point2::new(1.0, 1.0), a, b) - 1.0).abs() < 1e-15);
        assert!((point_segment_distance(Point2::new(3.0, 0.0), a, b) - 1.0).abs() < 1e-15);
    }
}
