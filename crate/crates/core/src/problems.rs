//! Concrete PDE problems: the state equation on the current annulus, the
//! adjoint equation, the descent-field (Riesz representative) problem, and
//! synthetic Cauchy data generation with controlled noise.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::fem::{solve_elliptic, BcSpec, BoundaryValue};
use crate::geometry::BoundaryPolyline;
use crate::mesh::{triangulate_annulus, BoundaryLabel, Mesh};
use crate::{Error, Result, ScalarField, VectorField};

/// One pair of boundary Cauchy data: the imposed Neumann flux `g` and the
/// measured Dirichlet trace `f`, the latter stored as samples over the
/// normalized arc length of the outer boundary so it can be re-interpolated
/// onto any inversion mesh.
#[derive(Clone, Debug)]
pub struct CauchyData {
    /// Imposed flux on the outer boundary (constant).
    pub g: f64,
    /// (normalized arc length in [0, 1), value) samples of the measured
    /// trace, sorted by s.
    pub f_samples: Vec<(f64, f64)>,
    pub noise_level: f64,
    pub seed: u64,
    pub fine_h: f64,
}

#[derive(Serialize, Deserialize)]
struct Sidecar {
    g: f64,
    noise_level: f64,
    seed: u64,
    fine_h: f64,
}

impl CauchyData {
    fn validate(&self) -> Result<()> {
        if self.g == 0.0 && self.f_samples.iter().all(|&(_, f)| f == 0.0) {
            return Err(Error::Data(
                "Cauchy pair (f, g) = (0, 0) cannot identify the inclusion".into(),
            ));
        }
        if !(0.0..1.0).contains(&self.noise_level) {
            return Err(Error::Data(format!(
                "noise_level must lie in [0, 1), got {}",
                self.noise_level
            )));
        }
        Ok(())
    }

    /// Evaluates `f` on the outer boundary vertices of an inversion mesh by
    /// linear interpolation in normalized arc length. Entries off the outer
    /// boundary are zero.
    pub fn trace_on(&self, mesh: &Mesh) -> Result<ScalarField> {
        let loop_ids = mesh.boundary_loop(BoundaryLabel::Outer)?;
        // Arc-length coordinate of each loop vertex with the same canonical
        // start used when the data was generated.
        let poly = BoundaryPolyline::new(loop_ids.iter().map(|&i| mesh.vertex(i)).collect())?;
        let (s_coords, total) = poly.arc_length_coordinates();
        let mut values = vec![0.0; mesh.n_vertices()];
        for (pos, &vid) in loop_ids.iter().enumerate() {
            values[vid] = self.interpolate(s_coords[pos] / total);
        }
        ScalarField::new(values)
    }

    /// Linear interpolation at normalized arc length `s` in [0, 1).
    fn interpolate(&self, s: f64) -> f64 {
        let samples = &self.f_samples;
        let n = samples.len();
        // samples are sorted; the curve wraps around at s = 1
        let idx = samples.partition_point(|&(si, _)| si <= s);
        let (s0, f0) = if idx == 0 {
            let (sl, fl) = samples[n - 1];
            (sl - 1.0, fl)
        } else {
            samples[idx - 1]
        };
        let (s1, f1) = if idx == n {
            let (sf, ff) = samples[0];
            (sf + 1.0, ff)
        } else {
            samples[idx]
        };
        if s1 == s0 {
            return f0;
        }
        f0 + (f1 - f0) * (s - s0) / (s1 - s0)
    }

    /// Writes the data CSV (`s,f`) and the JSON sidecar.
    pub fn write(&self, csv_path: &std::path::Path, sidecar_path: &std::path::Path) -> Result<()> {
        let mut out = String::from("s,f\n");
        for &(s, f) in &self.f_samples {
            out.push_str(&format!("{s:.17e},{f:.17e}\n"));
        }
        std::fs::write(csv_path, out)?;
        let sidecar = Sidecar {
            g: self.g,
            noise_level: self.noise_level,
            seed: self.seed,
            fine_h: self.fine_h,
        };
        let json = serde_json::to_string_pretty(&sidecar)
            .map_err(|e| Error::Data(format!("sidecar serialization failed: {e}")))?;
        std::fs::write(sidecar_path, json)?;
        Ok(())
    }

    pub fn read(csv_path: &std::path::Path, sidecar_path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(csv_path)?;
        let mut samples = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if i == 0 {
                continue;
            }
            let mut it = line.split(',');
            let parse = |s: Option<&str>| -> Result<f64> {
                s.ok_or_else(|| Error::Data(format!("short row at line {}", i + 1)))?
                    .trim()
                    .parse()
                    .map_err(|e| Error::Data(format!("bad number at line {}: {e}", i + 1)))
            };
            let s = parse(it.next())?;
            let f = parse(it.next())?;
            samples.push((s, f));
        }
        if samples.len() < 3 {
            return Err(Error::Data("data file has fewer than 3 samples".into()));
        }
        if samples.iter().any(|&(s, _)| !(0.0..1.0).contains(&s)) {
            return Err(Error::Data(
                "arc-length samples must be normalized to [0, 1)".into(),
            ));
        }
        let json = std::fs::read_to_string(sidecar_path)?;
        let sidecar: Sidecar = serde_json::from_str(&json)
            .map_err(|e| Error::Data(format!("bad sidecar: {e}")))?;
        let data = CauchyData {
            g: sidecar.g,
            f_samples: samples,
            noise_level: sidecar.noise_level,
            seed: sidecar.seed,
            fine_h: sidecar.fine_h,
        };
        data.validate()?;
        Ok(data)
    }
}

/// State problem: `-Δu = 0`, `∂ₙu = g` on the outer boundary, `u = 0` on
/// the inclusion boundary.
pub fn solve_state(mesh: &Mesh, g: f64) -> Result<ScalarField> {
    solve_elliptic(
        mesh,
        0.0,
        None,
        &BcSpec {
            dirichlet: vec![(BoundaryLabel::Inner, BoundaryValue::Constant(0.0))],
            neumann: vec![(BoundaryLabel::Outer, BoundaryValue::Constant(g))],
        },
    )
}

/// Adjoint problem: `-Δp = β(u-v) + λ`, `∂ₙp = u - f` on the outer
/// boundary, `p = 0` on the inclusion boundary.
pub fn solve_adjoint(
    mesh: &Mesh,
    u: &ScalarField,
    v: &ScalarField,
    lambda: &ScalarField,
    beta: f64,
    f_trace: &ScalarField,
) -> Result<ScalarField> {
    let source = u.sub(v)?.scaled(beta).add(lambda)?;
    let flux = u.sub(f_trace)?;
    solve_elliptic(
        mesh,
        0.0,
        Some(&source),
        &BcSpec {
            dirichlet: vec![(BoundaryLabel::Inner, BoundaryValue::Constant(0.0))],
            neumann: vec![(BoundaryLabel::Outer, BoundaryValue::Nodal(flux))],
        },
    )
}

/// Descent-field problem, solved componentwise: `-ΔV + V = 0`, `V = 0` on
/// the outer boundary, `∂ₙV = -density·n` on the inclusion boundary, with
/// `n` the outward unit normal of the domain there.
pub fn solve_deformation(mesh: &Mesh, gradient_density: &ScalarField) -> Result<VectorField> {
    let normals = mesh.boundary_vertex_normals(BoundaryLabel::Inner);
    let mut components = Vec::with_capacity(2);
    for axis in 0..2 {
        let flux = ScalarField::new(
            (0..mesh.n_vertices())
                .map(|i| {
                    let n = if axis == 0 { normals[i].x } else { normals[i].y };
                    -gradient_density.get(i) * n
                })
                .collect(),
        )?;
        let sol = solve_elliptic(
            mesh,
            1.0,
            None,
            &BcSpec {
                dirichlet: vec![(BoundaryLabel::Outer, BoundaryValue::Constant(0.0))],
                neumann: vec![(BoundaryLabel::Inner, BoundaryValue::Nodal(flux))],
            },
        )?;
        components.push(sol);
    }
    VectorField::from_components(&components[0], &components[1])
}

/// Discrete L²(∂Ω) norm of a trace given as per-loop-vertex samples, using
/// the edge mass of the loop polyline.
fn boundary_l2_norm(points: &[crate::Point2], values: &[f64]) -> f64 {
    let n = points.len();
    let mut acc = 0.0;
    for i in 0..n {
        let j = (i + 1) % n;
        let len = points[i].dist(points[j]);
        acc += len / 6.0
            * (2.0 * values[i] * values[i]
                + 2.0 * values[i] * values[j]
                + 2.0 * values[j] * values[j]);
    }
    acc.sqrt()
}

/// Generates synthetic Cauchy data on a fine mesh of the true geometry and
/// adds Gaussian noise rescaled to exactly `noise_level` relative L²(∂Ω)
/// magnitude.
pub fn generate_synthetic_data(
    true_inclusion: &BoundaryPolyline,
    outer: &BoundaryPolyline,
    g: f64,
    fine_h: f64,
    noise_level: f64,
    seed: u64,
) -> Result<CauchyData> {
    let fine_mesh = triangulate_annulus(outer, true_inclusion, fine_h)?;
    let u = solve_state(&fine_mesh, g)?;
    let loop_ids = fine_mesh.boundary_loop(BoundaryLabel::Outer)?;
    let points: Vec<crate::Point2> = loop_ids.iter().map(|&i| fine_mesh.vertex(i)).collect();
    let poly = BoundaryPolyline::new(points.clone())?;
    let (s_coords, total) = poly.arc_length_coordinates();
    let f_exact: Vec<f64> = loop_ids.iter().map(|&i| u.get(i)).collect();

    let mut noise = vec![0.0; f_exact.len()];
    if noise_level > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for e in noise.iter_mut() {
            // Box-Muller from two uniform draws; rand's normal distribution
            // lives in rand_distr, which is not needed for this one use.
            let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
            let u2: f64 = rng.gen();
            *e = (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos();
        }
        let f_norm = boundary_l2_norm(&points, &f_exact);
        let e_norm = boundary_l2_norm(&points, &noise);
        if e_norm == 0.0 {
            return Err(Error::Data("degenerate noise draw".into()));
        }
        let scale = noise_level * f_norm / e_norm;
        for e in noise.iter_mut() {
            *e *= scale;
        }
    }

    let mut samples: Vec<(f64, f64)> = s_coords
        .iter()
        .zip(f_exact.iter().zip(&noise))
        .map(|(&s, (&f, &e))| (s / total, f + e))
        .collect();
    samples.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());

    let data = CauchyData {
        g,
        f_samples: samples,
        noise_level,
        seed,
        fine_h,
    };
    data.validate()?;
    Ok(data)
}
