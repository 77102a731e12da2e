//! Reconstruction-quality metrics and per-iteration histories.

use std::path::Path;

use crate::geometry::BoundaryPolyline;
use crate::{Error, Result};

/// Hausdorff distance between two closed polylines: the maximum of the two
/// directed distances, where each vertex of one curve is projected exactly
/// onto the segments of the other.
pub fn hausdorff(a: &BoundaryPolyline, b: &BoundaryPolyline) -> f64 {
    directed(a, b).max(directed(b, a))
}

fn directed(from: &BoundaryPolyline, to: &BoundaryPolyline) -> f64 {
    from.points()
        .iter()
        .map(|&p| to.distance_to_point(p))
        .fold(0.0, f64::max)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HistoryRecord {
    pub k: usize,
    pub j: f64,
    pub g: f64,
    pub j_norm: f64,
    pub hausdorff: f64,
    pub t: f64,
    pub primal_residual: f64,
}

/// Per-iteration run records behind the cost and Hausdorff history plots.
#[derive(Clone, Debug, Default)]
pub struct ReconstructionHistory {
    records: Vec<HistoryRecord>,
    /// Resolved configuration of the run that produced the records.
    pub config_text: String,
}

impl ReconstructionHistory {
    pub fn new(config_text: String) -> Self {
        ReconstructionHistory {
            records: Vec::new(),
            config_text,
        }
    }

    pub fn push(&mut self, record: HistoryRecord) -> Result<()> {
        if let Some(last) = self.records.last() {
            if record.k <= last.k {
                return Err(Error::Data(format!(
                    "history iterations must increase: {} after {}",
                    record.k, last.k
                )));
            }
        } else if record.k != 0 {
            return Err(Error::Data("history must start at iteration 0".into()));
        }
        if !(record.primal_residual >= 0.0) {
            return Err(Error::Data(format!(
                "primal residual must be finite and nonnegative, got {}",
                record.primal_residual
            )));
        }
        self.records.push(record);
        Ok(())
    }

    pub fn records(&self) -> &[HistoryRecord] {
        &self.records
    }

    pub fn last(&self) -> Option<&HistoryRecord> {
        self.records.last()
    }

    pub fn best_hausdorff(&self) -> f64 {
        self.records
            .iter()
            .map(|r| r.hausdorff)
            .filter(|d| d.is_finite())
            .fold(f64::NAN, f64::min)
    }
}

/// Writes the history CSV with header `k,J,G,J_norm,hausdorff,t,primal_residual`
/// and 17 significant digits per value.
pub fn write_history(history: &ReconstructionHistory, path: &Path) -> Result<()> {
    let mut out = String::from("k,J,G,J_norm,hausdorff,t,primal_residual\n");
    for r in history.records() {
        out.push_str(&format!(
            "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
            r.k, r.j, r.g, r.j_norm, r.hausdorff, r.t, r.primal_residual
        ));
    }
    std::fs::write(path, out)?;
    Ok(())
}

pub fn read_history(path: &Path) -> Result<ReconstructionHistory> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Data("empty history file".into()))?;
    if header != "k,J,G,J_norm,hausdorff,t,primal_residual" {
        return Err(Error::Data(format!("unexpected history header: {header}")));
    }
    let mut history = ReconstructionHistory::new(String::new());
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 7 {
            return Err(Error::Data(format!(
                "history row {} has {} columns, expected 7",
                i + 2,
                cols.len()
            )));
        }
        let num = |s: &str| -> Result<f64> {
            s.trim()
                .parse()
                .map_err(|e| Error::Data(format!("bad number in history row {}: {e}", i + 2)))
        };
        history.push(HistoryRecord {
            k: cols[0]
                .trim()
                .parse()
                .map_err(|e| Error::Data(format!("bad iteration in row {}: {e}", i + 2)))?,
            j: num(cols[1])?,
            g: num(cols[2])?,
            j_norm: num(cols[3])?,
            hausdorff: num(cols[4])?,
            t: num(cols[5])?,
            primal_residual: num(cols[6])?,
        })?;
    }
    Ok(history)
}

/// File name of the saved boundary snapshot for iteration `k`.
pub fn snapshot_name(k: usize) -> String {
    format!("boundary_{k:04}.csv")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point2;

    fn circle(r: f64, n: usize) -> BoundaryPolyline {
        BoundaryPolyline::circle(Point2::new(0.0, 0.0), r, n).unwrap()
    }

    #[test]
    fn identical_curves_have_zero_distance() {
        let c = circle(0.7, 100);
        assert_eq!(hausdorff(&c, &c), 0.0);
    }

    #[test]
    fn concentric_circles() {
        let a = circle(0.5, 200);
        let b = circle(0.8, 200);
        let d = hausdorff(&a, &b);
        assert!((d - 0.3).abs() <= 1e-3, "d = {d}");
    }

    #[test]
    fn symmetry() {
        let a = circle(0.5, 64);
        let b = BoundaryPolyline::peanut(Point2::new(0.1, 0.0), 0.6, 0.3, 80).unwrap();
        assert_eq!(hausdorff(&a, &b), hausdorff(&b, &a));
    }

    #[test]
    fn square_vs_circle_matches_dense_sampling() {
        let half = 0.5;
        let n = 50;
        let mut pts = Vec::new();
        for i in 0..n {
            let s = -half + (i as f64 / n as f64);
            pts.push(Point2::new(s, -half));
        }
        for i in 0..n {
            let s = -half + (i as f64 / n as f64);
            pts.push(Point2::new(half, s));
        }
        for i in 0..n {
            let s = half - (i as f64 / n as f64);
            pts.push(Point2::new(s, half));
        }
        for i in 0..n {
            let s = half - (i as f64 / n as f64);
            pts.push(Point2::new(-half, s));
        }
        let square = BoundaryPolyline::new(pts).unwrap();
        let disc = circle(0.5, 400);
        let d = hausdorff(&square, &disc);
        // Dense-sampling brute force over both curves.
        let sample = |c: &BoundaryPolyline, m: usize| -> Vec<Point2> {
            let pts = c.points();
            let mut out = Vec::with_capacity(m);
            for i in 0..m {
                let f = i as f64 / m as f64 * pts.len() as f64;
                let j = f.floor() as usize % pts.len();
                let t = f - f.floor();
                let a = pts[j];
                let b = pts[(j + 1) % pts.len()];
                out.push(Point2::new(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)));
            }
            out
        };
        let sa = sample(&square, 100_000);
        let sb = sample(&disc, 100_000);
        let brute_directed = |from: &[Point2], to: &BoundaryPolyline| {
            from.iter()
                .map(|&p| to.distance_to_point(p))
                .fold(0.0, f64::max)
        };
        let brute = brute_directed(&sa, &disc).max(brute_directed(&sb, &square));
        assert!((d - brute).abs() <= 1e-4, "polyline {d} vs brute {brute}");
    }

    #[test]
    fn rigid_motion_invariance() {
        let a = circle(0.5, 120);
        let b = BoundaryPolyline::ellipse(Point2::new(0.1, -0.05), 0.6, 0.4, 140).unwrap();
        let d0 = hausdorff(&a, &b);
        let (c, s) = (0.6f64.cos(), 0.6f64.sin());
        let shift = Point2::new(3.0, -2.0);
        let mv = |p: Point2| Point2::new(c * p.x - s * p.y + shift.x, s * p.x + c * p.y + shift.y);
        let am = BoundaryPolyline::new(a.points().iter().map(|&p| mv(p)).collect()).unwrap();
        let bm = BoundaryPolyline::new(b.points().iter().map(|&p| mv(p)).collect()).unwrap();
        let d1 = hausdorff(&am, &bm);
        assert!((d0 - d1).abs() <= 1e-12, "{d0} vs {d1}");
    }

    #[test]
    fn history_round_trip() {
        let mut h = ReconstructionHistory::new("beta = 0.0055".into());
        for k in 0..5 {
            h.push(HistoryRecord {
                k,
                j: 1.0 / (k + 1) as f64,
                g: 1.1 / (k + 1) as f64,
                j_norm: 1.0 / (k + 1) as f64,
                hausdorff: if k == 0 { f64::NAN } else { 0.3 - 0.01 * k as f64 },
                t: 0.5f64.powi(k as i32),
                primal_residual: 1e-3 * k as f64,
            })
            .unwrap();
        }
        let dir = std::env::temp_dir().join("shaperecon_history_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("history.csv");
        write_history(&h, &path).unwrap();
        let back = read_history(&path).unwrap();
        assert_eq!(back.records().len(), 5);
        for (a, b) in h.records().iter().zip(back.records()) {
            assert_eq!(a.k, b.k);
            assert_eq!(a.j, b.j);
            assert_eq!(a.g, b.g);
            assert_eq!(a.j_norm, b.j_norm);
            assert_eq!(a.t, b.t);
            assert_eq!(a.primal_residual, b.primal_residual);
            assert_eq!(a.hausdorff.is_nan(), b.hausdorff.is_nan());
            if !a.hausdorff.is_nan() {
                assert_eq!(a.hausdorff, b.hausdorff);
            }
        }
    }

    #[test]
    fn history_rejects_nonincreasing_k() {
        let mut h = ReconstructionHistory::default();
        let rec = |k| HistoryRecord {
            k,
            j: 1.0,
            g: 1.0,
            j_norm: 1.0,
            hausdorff: 0.1,
            t: 0.0,
            primal_residual: 0.0,
        };
        h.push(rec(0)).unwrap();
        h.push(rec(1)).unwrap();
        assert!(h.push(rec(1)).is_err());
        let mut h2 = ReconstructionHistory::default();
        assert!(h2.push(rec(3)).is_err());
    }

    #[test]
    fn snapshot_names_are_zero_padded() {
        assert_eq!(snapshot_name(0), "boundary_0000.csv");
        assert_eq!(snapshot_name(120), "boundary_0120.csv");
    }
}
