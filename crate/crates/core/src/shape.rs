//! Shape machinery: cost functionals, boundary gradient density, descent
//! directions, backtracking line search, and the inner descent loop that
//! updates the inclusion boundary.

use crate::fem::{
    boundary_normal_derivative, h1_form, integrate_boundary_product, integrate_domain_product,
};
use crate::geometry::GeometryConstraints;
use crate::mesh::{deform_mesh, transfer_field, BoundaryLabel, Mesh};
use crate::problems::{solve_adjoint, solve_deformation, solve_state, CauchyData};
use crate::{Error, Result, ScalarField, VectorField};

/// Which reconstruction method drives the objective.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    /// Augmented-Lagrangian splitting with multiplier updates.
    Admm,
    /// Classical least-squares shape optimization.
    Som,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LineSearchMode {
    /// Shrink from `t_init` until the objective strictly decreases.
    Backtrack,
    /// Single step `t = mu·J/‖V‖_{H¹}` with a validity check only.
    Scaled,
}

#[derive(Clone, Copy, Debug)]
pub struct LineSearchParams {
    pub t_init: f64,
    pub shrink: f64,
    pub max_tries: usize,
    pub mode: LineSearchMode,
    pub mu: f64,
}

impl LineSearchParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_init > 0.0) {
            return Err(Error::Config(format!("t_init must be positive, got {}", self.t_init)));
        }
        if !(self.shrink > 0.0 && self.shrink < 1.0) {
            return Err(Error::Config(format!(
                "shrink must lie in (0, 1), got {}",
                self.shrink
            )));
        }
        if self.max_tries == 0 {
            return Err(Error::Config("max_tries must be at least 1".into()));
        }
        if self.mode == LineSearchMode::Scaled && !(self.mu > 0.0) {
            return Err(Error::Config(format!("mu must be positive, got {}", self.mu)));
        }
        Ok(())
    }
}

impl Default for LineSearchParams {
    fn default() -> Self {
        LineSearchParams {
            t_init: 1.0,
            shrink: 0.5,
            max_tries: 30,
            mode: LineSearchMode::Backtrack,
            mu: 0.002,
        }
    }
}

/// Least-squares misfit `½ ∫_{∂Ω} (u - f)² ds`.
pub fn cost_ls(mesh: &Mesh, u: &ScalarField, f_trace: &ScalarField) -> Result<f64> {
    let diff = u.sub(f_trace)?;
    Ok(0.5 * integrate_boundary_product(mesh, &diff, &diff, BoundaryLabel::Outer)?)
}

/// Augmented objective `J + (β/2)∫(u-v)² + ∫λ(u-v)`.
pub fn augmented_objective(
    mesh: &Mesh,
    u: &ScalarField,
    v: &ScalarField,
    lambda: &ScalarField,
    beta: f64,
    f_trace: &ScalarField,
) -> Result<f64> {
    let j = cost_ls(mesh, u, f_trace)?;
    let diff = u.sub(v)?;
    let penalty = 0.5 * beta * integrate_domain_product(mesh, &diff, &diff)?;
    let multiplier = integrate_domain_product(mesh, lambda, &diff)?;
    Ok(j + penalty + multiplier)
}

/// Boundary gradient density on the inclusion boundary:
/// `∂ₙp·∂ₙu + λv - (β/2)v²` per inner vertex, zero elsewhere.
pub fn shape_gradient_density(
    mesh: &Mesh,
    u: &ScalarField,
    p: &ScalarField,
    v: &ScalarField,
    lambda: &ScalarField,
    beta: f64,
) -> Result<ScalarField> {
    let dnu = boundary_normal_derivative(mesh, u, BoundaryLabel::Inner)?;
    let dnp = boundary_normal_derivative(mesh, p, BoundaryLabel::Inner)?;
    let mut values = vec![0.0; mesh.n_vertices()];
    for i in mesh.boundary_vertices(BoundaryLabel::Inner) {
        values[i] = dnp.get(i) * dnu.get(i) + lambda.get(i) * v.get(i)
            - 0.5 * beta * v.get(i) * v.get(i);
    }
    ScalarField::new(values)
}

/// Directional derivative `∫_{∂ω} density·(V·n) ds`, evaluated with the
/// same edge-mass quadrature that loads the descent-field problem so that
/// the descent identity holds to solver accuracy.
pub fn directional_derivative(
    mesh: &Mesh,
    density: &ScalarField,
    velocity: &VectorField,
) -> Result<f64> {
    if velocity.len() != mesh.n_vertices() {
        return Err(Error::FieldMismatch(
            "velocity length does not match the mesh".into(),
        ));
    }
    let normals = mesh.boundary_vertex_normals(BoundaryLabel::Inner);
    let mut acc = 0.0;
    for e in mesh.boundary_edges() {
        if e.label != BoundaryLabel::Inner {
            continue;
        }
        let len = mesh.vertex(e.a).dist(mesh.vertex(e.b));
        let ga = normals[e.a].scale(density.get(e.a));
        let gb = normals[e.b].scale(density.get(e.b));
        let (va, vb) = (velocity.get(e.a), velocity.get(e.b));
        acc += len / 6.0
            * (2.0 * ga.dot(va) + ga.dot(vb) + gb.dot(va) + 2.0 * gb.dot(vb));
    }
    Ok(acc)
}

/// H¹ norm of a vector field through the assembled stiffness+mass form.
pub fn h1_norm(mesh: &Mesh, velocity: &VectorField) -> Result<f64> {
    let x = velocity.component(0);
    let y = velocity.component(1);
    Ok((h1_form(mesh, &x, &x)? + h1_form(mesh, &y, &y)?).sqrt())
}

/// The objective driving a reconstruction, bundling the measured data.
pub struct ShapeObjective<'a> {
    pub data: &'a CauchyData,
    pub beta: f64,
    pub method: Method,
}

impl ShapeObjective<'_> {
    /// Evaluates the per-iteration objective on a mesh with its fields.
    pub fn value(
        &self,
        mesh: &Mesh,
        u: &ScalarField,
        v: &ScalarField,
        lambda: &ScalarField,
    ) -> Result<f64> {
        let f = self.data.trace_on(mesh)?;
        match self.method {
            Method::Som => cost_ls(mesh, u, &f),
            Method::Admm => augmented_objective(mesh, u, v, lambda, self.beta, &f),
        }
    }

    pub fn density(
        &self,
        mesh: &Mesh,
        u: &ScalarField,
        p: &ScalarField,
        v: &ScalarField,
        lambda: &ScalarField,
    ) -> Result<ScalarField> {
        match self.method {
            // SOM keeps only the least-squares term ∂ₙp·∂ₙu.
            Method::Som => shape_gradient_density(
                mesh,
                u,
                p,
                &ScalarField::zeros(mesh.n_vertices()),
                &ScalarField::zeros(mesh.n_vertices()),
                0.0,
            ),
            Method::Admm => shape_gradient_density(mesh, u, p, v, lambda, self.beta),
        }
    }

    pub fn adjoint(
        &self,
        mesh: &Mesh,
        u: &ScalarField,
        v: &ScalarField,
        lambda: &ScalarField,
    ) -> Result<ScalarField> {
        let f = self.data.trace_on(mesh)?;
        match self.method {
            // SOM adjoint: -Δp = 0, ∂ₙp = u - f.
            Method::Som => solve_adjoint(
                mesh,
                u,
                u,
                &ScalarField::zeros(mesh.n_vertices()),
                0.0,
                &f,
            ),
            Method::Admm => solve_adjoint(mesh, u, v, lambda, self.beta, &f),
        }
    }
}

/// Accepted line-search step.
#[derive(Debug)]
pub struct LineSearchOutcome {
    pub t: f64,
    pub mesh: Mesh,
    pub u: ScalarField,
    pub v: ScalarField,
    pub lambda: ScalarField,
    pub objective: f64,
}

/// Finds a step along `velocity` that keeps the mesh valid and (in
/// backtracking mode) strictly decreases the objective. `v` and `lambda`
/// are re-evaluated spatially on each trial mesh.
#[allow(clippy::too_many_arguments)]
pub fn line_search(
    mesh: &Mesh,
    u: &ScalarField,
    v: &ScalarField,
    lambda: &ScalarField,
    velocity: &VectorField,
    objective: &ShapeObjective<'_>,
    params: &LineSearchParams,
    constraints: &GeometryConstraints,
) -> Result<LineSearchOutcome> {
    params.validate()?;
    if velocity.max_norm() == 0.0 {
        return Err(Error::LineSearchExhausted { tries: 0 });
    }
    let current = objective.value(mesh, u, v, lambda)?;

    let evaluate = |t: f64| -> Result<(Mesh, ScalarField, ScalarField, ScalarField, f64)> {
        let trial = deform_mesh(mesh, velocity, t, constraints)?;
        let v_t = transfer_field(v, mesh, &trial)?;
        let lambda_t = transfer_field(lambda, mesh, &trial)?;
        let u_t = solve_state(&trial, objective.data.g)?;
        let value = objective.value(&trial, &u_t, &v_t, &lambda_t)?;
        Ok((trial, u_t, v_t, lambda_t, value))
    };

    match params.mode {
        LineSearchMode::Backtrack => {
            let mut t = params.t_init;
            for tries in 0..params.max_tries {
                match evaluate(t) {
                    Ok((trial, u_t, v_t, lambda_t, value)) if value < current => {
                        return Ok(LineSearchOutcome {
                            t,
                            mesh: trial,
                            u: u_t,
                            v: v_t,
                            lambda: lambda_t,
                            objective: value,
                        });
                    }
                    Ok(_) => {}
                    Err(
                        Error::InvertedElement { .. }
                        | Error::Clearance { .. }
                        | Error::MeshInvariant(_),
                    ) => {}
                    Err(other) => return Err(other),
                }
                t *= params.shrink;
                let _ = tries;
            }
            Err(Error::LineSearchExhausted {
                tries: params.max_tries,
            })
        }
        LineSearchMode::Scaled => {
            let f = objective.data.trace_on(mesh)?;
            let j = cost_ls(mesh, u, &f)?;
            let norm = h1_norm(mesh, velocity)?;
            if norm == 0.0 {
                return Err(Error::LineSearchExhausted { tries: 0 });
            }
            let t = params.mu * j / norm;
            let (trial, u_t, v_t, lambda_t, value) = evaluate(t)?;
            Ok(LineSearchOutcome {
                t,
                mesh: trial,
                u: u_t,
                v: v_t,
                lambda: lambda_t,
                objective: value,
            })
        }
    }
}

/// Result of the inner descent loop.
#[derive(Debug)]
pub struct SgdResult {
    pub mesh: Mesh,
    pub u: ScalarField,
    pub v: ScalarField,
    pub lambda: ScalarField,
    /// Last accepted step size (zero if no step was taken).
    pub last_t: f64,
    /// Last computed directional derivative.
    pub derivative: f64,
    pub steps_taken: usize,
    /// True if |dG[V]| fell below the tolerance.
    pub converged: bool,
}

/// Inner descent loop: repeats state solve → adjoint solve → gradient
/// density → descent field → line search → field transfer, until the
/// directional derivative falls below `epsilon`, the line search fails, or
/// `inner_max` steps were taken.
#[allow(clippy::too_many_arguments)]
pub fn sgd_inner_loop(
    mesh: &Mesh,
    v: &ScalarField,
    lambda: &ScalarField,
    objective: &ShapeObjective<'_>,
    params: &LineSearchParams,
    constraints: &GeometryConstraints,
    inner_max: usize,
    epsilon: f64,
) -> Result<SgdResult> {
    let mut mesh = mesh.clone();
    let mut v = v.clone();
    let mut lambda = lambda.clone();
    let mut u = solve_state(&mesh, objective.data.g)?;
    let mut last_t = 0.0;
    let mut derivative = f64::NAN;
    let mut steps_taken = 0;
    let mut converged = false;

    for _ in 0..inner_max {
        let p = objective.adjoint(&mesh, &u, &v, &lambda)?;
        let density = objective.density(&mesh, &u, &p, &v, &lambda)?;
        let velocity = solve_deformation(&mesh, &density)?;
        derivative = directional_derivative(&mesh, &density, &velocity)?;
        if derivative.abs() < epsilon {
            converged = true;
            break;
        }
        match line_search(
            &mesh, &u, &v, &lambda, &velocity, objective, params, constraints,
        ) {
            Ok(outcome) => {
                mesh = outcome.mesh;
                u = outcome.u;
                v = outcome.v;
                lambda = outcome.lambda;
                last_t = outcome.t;
                steps_taken += 1;
            }
            Err(Error::LineSearchExhausted { .. }) => break,
            Err(other) => return Err(other),
        }
    }

    Ok(SgdResult {
        mesh,
        u,
        v,
        lambda,
        last_t,
        derivative,
        steps_taken,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{BoundaryPolyline, Point2};
    use crate::mesh::triangulate_annulus;
    use crate::problems::generate_synthetic_data;

    fn annulus(r_in: f64, h: f64) -> Mesh {
        let n_out = ((2.0 * std::f64::consts::PI) / h).ceil() as usize;
        let n_in = ((2.0 * std::f64::consts::PI * r_in) / h).ceil() as usize;
        let outer = BoundaryPolyline::circle(Point2::new(0.0, 0.0), 1.0, n_out).unwrap();
        let inner = BoundaryPolyline::circle(Point2::new(0.0, 0.0), r_in, n_in.max(8)).unwrap();
        triangulate_annulus(&outer, &inner, h).unwrap()
    }

    fn concentric_data(r_true: f64) -> CauchyData {
        let outer = BoundaryPolyline::circle(Point2::new(0.0, 0.0), 1.0, 157).unwrap();
        let truth = BoundaryPolyline::circle(
            Point2::new(0.0, 0.0),
            r_true,
            ((2.0 * std::f64::consts::PI * r_true) / 0.02).ceil() as usize,
        )
        .unwrap();
        generate_synthetic_data(&truth, &outer, 1.0, 0.02, 0.0, 1).unwrap()
    }

    #[test]
    fn cost_vanishes_when_u_matches_f() {
        let mesh = annulus(0.5, 0.06);
        let u = solve_state(&mesh, 1.0).unwrap();
        assert_eq!(cost_ls(&mesh, &u, &u).unwrap(), 0.0);
    }

    #[test]
    fn cost_of_unit_gap_is_half_perimeter() {
        let mesh = annulus(0.5, 0.04);
        let u = ScalarField::constant(1.0, mesh.n_vertices());
        let f = ScalarField::zeros(mesh.n_vertices());
        let j = cost_ls(&mesh, &u, &f).unwrap();
        assert!((j - std::f64::consts::PI).abs() < 5e-3, "J = {j}");
    }

    #[test]
    fn augmented_objective_reduces_to_j_when_v_equals_u() {
        let mesh = annulus(0.5, 0.06);
        let u = solve_state(&mesh, 1.0).unwrap();
        let lambda = ScalarField::constant(0.7, mesh.n_vertices());
        let f = ScalarField::zeros(mesh.n_vertices());
        let j = cost_ls(&mesh, &u, &f).unwrap();
        let g = augmented_objective(&mesh, &u, &u, &lambda, 0.0055, &f).unwrap();
        assert!((g - j).abs() < 1e-12);
    }

    #[test]
    fn augmented_objective_constant_gap() {
        let mesh = annulus(0.5, 0.04);
        let u = solve_state(&mesh, 1.0).unwrap();
        let v = u.add(&ScalarField::constant(-1.0, mesh.n_vertices())).unwrap();
        let lambda = ScalarField::zeros(mesh.n_vertices());
        let f = mesh
            .vertices()
            .iter()
            .map(|p| (p.norm() / 0.5).ln())
            .collect::<Vec<_>>();
        let f = ScalarField::new(f).unwrap();
        let j = cost_ls(&mesh, &u, &f).unwrap();
        let g = augmented_objective(&mesh, &u, &v, &lambda, 2.0, &f).unwrap();
        let one = ScalarField::constant(1.0, mesh.n_vertices());
        let area = crate::fem::integrate_domain(&mesh, &one).unwrap();
        assert!((g - j - area).abs() < 1e-10);
    }

    #[test]
    fn density_is_rotationally_uniform_on_concentric_geometry() {
        let data = concentric_data(0.5);
        let mesh = annulus(0.8, 0.04);
        let u = solve_state(&mesh, 1.0).unwrap();
        let v = ScalarField::constant(1.0, mesh.n_vertices());
        let lambda = ScalarField::constant(0.001, mesh.n_vertices());
        let objective = ShapeObjective {
            data: &data,
            beta: 0.0055,
            method: Method::Admm,
        };
        let p = objective.adjoint(&mesh, &u, &v, &lambda).unwrap();
        let density = objective.density(&mesh, &u, &p, &v, &lambda).unwrap();
        let vals: Vec<f64> = mesh
            .boundary_vertices(BoundaryLabel::Inner)
            .iter()
            .map(|&i| density.get(i))
            .collect();
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        let spread = vals
            .iter()
            .map(|x| (x - mean).abs())
            .fold(0.0f64, f64::max);
        assert!(
            spread / mean.abs() < 0.02,
            "relative spread {} (mean {mean})",
            spread / mean.abs()
        );
    }

    #[test]
    fn descent_identity() {
        let data = concentric_data(0.5);
        let mesh = annulus(0.8, 0.04);
        let u = solve_state(&mesh, 1.0).unwrap();
        let v = ScalarField::constant(1.0, mesh.n_vertices());
        let lambda = ScalarField::constant(0.001, mesh.n_vertices());
        let objective = ShapeObjective {
            data: &data,
            beta: 0.0055,
            method: Method::Admm,
        };
        let p = objective.adjoint(&mesh, &u, &v, &lambda).unwrap();
        let density = objective.density(&mesh, &u, &p, &v, &lambda).unwrap();
        let velocity = solve_deformation(&mesh, &density).unwrap();
        let dd = directional_derivative(&mesh, &density, &velocity).unwrap();
        let h1 = h1_norm(&mesh, &velocity).unwrap();
        assert!(dd <= 0.0, "descent direction has dd = {dd}");
        assert!(
            (dd + h1 * h1).abs() <= 1e-8 * h1 * h1,
            "identity violated: dd = {dd}, -‖V‖² = {}",
            -h1 * h1
        );
    }

    #[test]
    fn tangential_velocity_has_zero_derivative() {
        let mesh = annulus(0.5, 0.04);
        let density = ScalarField::constant(1.0, mesh.n_vertices());
        // Tangential field on the inner circle: rotate the position by 90°.
        let velocity = VectorField::new(
            mesh.vertices()
                .iter()
                .map(|p| Point2::new(-p.y, p.x))
                .collect(),
        )
        .unwrap();
        let dd = directional_derivative(&mesh, &density, &velocity).unwrap();
        // Not exactly zero: the polygonized circle's vertex normals are not
        // exactly radial, so allow quadrature-level error.
        assert!(dd.abs() < 1e-3, "dd = {dd}");
    }

    #[test]
    fn zero_velocity_fails_line_search() {
        let data = concentric_data(0.5);
        let mesh = annulus(0.8, 0.06);
        let u = solve_state(&mesh, 1.0).unwrap();
        let v = ScalarField::constant(1.0, mesh.n_vertices());
        let lambda = ScalarField::zeros(mesh.n_vertices());
        let objective = ShapeObjective {
            data: &data,
            beta: 0.0055,
            method: Method::Admm,
        };
        let err = line_search(
            &mesh,
            &u,
            &v,
            &lambda,
            &VectorField::zeros(mesh.n_vertices()),
            &objective,
            &LineSearchParams::default(),
            &GeometryConstraints::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::LineSearchExhausted { .. }));
    }

    #[test]
    fn backtracking_step_strictly_decreases() {
        let data = concentric_data(0.5);
        let mesh = annulus(0.8, 0.06);
        let v = ScalarField::constant(1.0, mesh.n_vertices());
        let lambda = ScalarField::constant(0.001, mesh.n_vertices());
        let objective = ShapeObjective {
            data: &data,
            beta: 0.0055,
            method: Method::Admm,
        };
        let u = solve_state(&mesh, 1.0).unwrap();
        let before = objective.value(&mesh, &u, &v, &lambda).unwrap();
        let p = objective.adjoint(&mesh, &u, &v, &lambda).unwrap();
        let density = objective.density(&mesh, &u, &p, &v, &lambda).unwrap();
        let velocity = solve_deformation(&mesh, &density).unwrap();
        let outcome = line_search(
            &mesh,
            &u,
            &v,
            &lambda,
            &velocity,
            &objective,
            &LineSearchParams::default(),
            &GeometryConstraints::default(),
        )
        .unwrap();
        assert!(outcome.objective < before);
        assert!(outcome.t > 0.0);
    }

    #[test]
    fn sgd_huge_epsilon_takes_no_step() {
        let data = concentric_data(0.5);
        let mesh = annulus(0.8, 0.06);
        let v = ScalarField::constant(1.0, mesh.n_vertices());
        let lambda = ScalarField::zeros(mesh.n_vertices());
        let objective = ShapeObjective {
            data: &data,
            beta: 0.0055,
            method: Method::Admm,
        };
        let result = sgd_inner_loop(
            &mesh,
            &v,
            &lambda,
            &objective,
            &LineSearchParams::default(),
            &GeometryConstraints::default(),
            50,
            1e9,
        )
        .unwrap();
        assert_eq!(result.steps_taken, 0);
        assert!(result.converged);
        assert_eq!(result.mesh.n_vertices(), mesh.n_vertices());
        for (a, b) in mesh.vertices().iter().zip(result.mesh.vertices()) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn sgd_single_step_with_inner_max_one() {
        let data = concentric_data(0.5);
        let mesh = annulus(0.8, 0.06);
        let v = ScalarField::constant(1.0, mesh.n_vertices());
        let lambda = ScalarField::constant(0.001, mesh.n_vertices());
        let objective = ShapeObjective {
            data: &data,
            beta: 0.0055,
            method: Method::Admm,
        };
        let result = sgd_inner_loop(
            &mesh,
            &v,
            &lambda,
            &objective,
            &LineSearchParams::default(),
            &GeometryConstraints::default(),
            1,
            1e-12,
        )
        .unwrap();
        assert_eq!(result.steps_taken, 1);
        assert!(result.last_t > 0.0);
    }
}
