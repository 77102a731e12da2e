//! P1 finite element assembly and solution of scalar elliptic problems
//! `-Δu + c·u = s` with mixed Dirichlet/Neumann boundary conditions.

use std::collections::{HashMap, HashSet};

use crate::geometry::{cross, Point2};
use crate::mesh::{BoundaryLabel, Mesh};
use crate::{Error, Result, ScalarField};

/// Boundary data: a constant or a nodal trace (full-length mesh vector read
/// at the boundary vertices).
#[derive(Clone, Debug)]
pub enum BoundaryValue {
    Constant(f64),
    Nodal(ScalarField),
}

impl BoundaryValue {
    fn at(&self, vertex: usize) -> f64 {
        match self {
            BoundaryValue::Constant(c) => *c,
            BoundaryValue::Nodal(f) => f.get(vertex),
        }
    }
}

/// Boundary condition specification. No label may appear in both lists and
/// together they must cover every label present on the mesh.
#[derive(Clone, Debug, Default)]
pub struct BcSpec {
    pub dirichlet: Vec<(BoundaryLabel, BoundaryValue)>,
    pub neumann: Vec<(BoundaryLabel, BoundaryValue)>,
}

impl BcSpec {
    fn validate(&self, mesh: &Mesh) -> Result<()> {
        let mut labels_on_mesh = HashSet::new();
        for e in mesh.boundary_edges() {
            labels_on_mesh.insert(e.label);
        }
        let mut seen = HashSet::new();
        for (label, _) in self.dirichlet.iter().chain(&self.neumann) {
            if !seen.insert(*label) {
                return Err(Error::BoundaryCondition(format!(
                    "label {label:?} specified more than once"
                )));
            }
            if !labels_on_mesh.contains(label) {
                return Err(Error::BoundaryCondition(format!(
                    "label {label:?} does not exist on the mesh"
                )));
            }
        }
        for label in &labels_on_mesh {
            if !seen.contains(label) {
                return Err(Error::BoundaryCondition(format!(
                    "label {label:?} has no boundary condition"
                )));
            }
        }
        Ok(())
    }
}

/// Compressed sparse row matrix.
pub struct Csr {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub vals: Vec<f64>,
}

impl Csr {
    pub fn from_triplets(n: usize, mut triplets: Vec<(usize, usize, f64)>) -> Csr {
        triplets.sort_by_key(|&(i, j, _)| (i, j));
        let mut col_idx: Vec<usize> = Vec::new();
        let mut vals: Vec<f64> = Vec::new();
        let mut rows: Vec<usize> = Vec::new();
        for (i, j, v) in triplets {
            if rows.last() == Some(&i) && col_idx.last() == Some(&j) {
                *vals.last_mut().unwrap() += v;
            } else {
                rows.push(i);
                col_idx.push(j);
                vals.push(v);
            }
        }
        let mut row_ptr = vec![0usize; n + 1];
        for &i in &rows {
            row_ptr[i + 1] += 1;
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        Csr {
            n,
            row_ptr,
            col_idx,
            vals,
        }
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for i in 0..self.n {
            let mut acc = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.vals[k] * x[self.col_idx[k]];
            }
            y[i] = acc;
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.n];
        for i in 0..self.n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                if self.col_idx[k] == i {
                    d[i] += self.vals[k];
                }
            }
        }
        d
    }
}

/// Gradients of the three P1 basis functions on a triangle, and its area.
fn triangle_gradients(a: Point2, b: Point2, c: Point2) -> ([Point2; 3], f64) {
    let two_area = cross(b - a, c - a);
    let area = 0.5 * two_area;
    let grads = [
        Point2::new(b.y - c.y, c.x - b.x).scale(1.0 / two_area),
        Point2::new(c.y - a.y, a.x - c.x).scale(1.0 / two_area),
        Point2::new(a.y - b.y, b.x - a.x).scale(1.0 / two_area),
    ];
    (grads, area)
}

/// Assembles `stiffness + mass_coeff · mass` as CSR.
pub fn assemble_operator(mesh: &Mesh, mass_coeff: f64) -> Csr {
    let n = mesh.n_vertices();
    let mut triplets = Vec::with_capacity(9 * mesh.n_triangles());
    for tri in mesh.triangles() {
        let (g, area) = triangle_gradients(
            mesh.vertex(tri[0]),
            mesh.vertex(tri[1]),
            mesh.vertex(tri[2]),
        );
        for l in 0..3 {
            for m in 0..3 {
                let stiff = g[l].dot(g[m]) * area;
                let mass = area / 12.0 * if l == m { 2.0 } else { 1.0 };
                triplets.push((tri[l], tri[m], stiff + mass_coeff * mass));
            }
        }
    }
    Csr::from_triplets(n, triplets)
}

/// Jacobi-preconditioned conjugate gradients. Deterministic: fixed
/// iteration order and summation.
fn solve_cg(a: &Csr, b: &[f64], rel_tol: f64, max_iter: usize) -> Result<Vec<f64>> {
    let n = a.n;
    let b_norm = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    if b_norm == 0.0 {
        return Ok(vec![0.0; n]);
    }
    let diag = a.diagonal();
    if diag.iter().any(|&d| d <= 0.0) {
        return Err(Error::SingularSystem(
            "operator has a non-positive diagonal entry".into(),
        ));
    }
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&diag).map(|(ri, di)| ri / di).collect();
    let mut p = z.clone();
    let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
    let mut ap = vec![0.0; n];
    for _ in 0..max_iter {
        a.matvec(&p, &mut ap);
        let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
        if pap <= 0.0 {
            return Err(Error::SingularSystem(
                "operator is not positive definite".into(),
            ));
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let r_norm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        if r_norm <= rel_tol * b_norm {
            return Ok(x);
        }
        for i in 0..n {
            z[i] = r[i] / diag[i];
        }
        let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::SolverFailure(format!(
        "CG did not reach relative residual {rel_tol:.1e} in {max_iter} iterations"
    )))
}

/// Solves `-Δu + mass_coeff·u = source` with the given boundary conditions.
///
/// Neumann data enters through the boundary-edge mass matrix (exact for P1
/// traces), Dirichlet constraints are imposed by row elimination with
/// right-hand-side correction. The reduced system is solved to a relative
/// residual of 1e-12.
pub fn solve_elliptic(
    mesh: &Mesh,
    mass_coeff: f64,
    source: Option<&ScalarField>,
    bc: &BcSpec,
) -> Result<ScalarField> {
    bc.validate(mesh)?;
    if mass_coeff == 0.0 && bc.dirichlet.is_empty() {
        return Err(Error::SingularSystem(
            "pure-Neumann Laplacian has no unique solution".into(),
        ));
    }
    let n = mesh.n_vertices();
    if let Some(s) = source {
        if s.len() != n {
            return Err(Error::FieldMismatch(format!(
                "source has {} entries for a mesh with {n} vertices",
                s.len()
            )));
        }
    }
    let a = assemble_operator(mesh, mass_coeff);

    let mut rhs = vec![0.0; n];
    if let Some(s) = source {
        // Consistent mass times nodal source.
        for tri in mesh.triangles() {
            let area = 0.5
                * cross(
                    mesh.vertex(tri[1]) - mesh.vertex(tri[0]),
                    mesh.vertex(tri[2]) - mesh.vertex(tri[0]),
                );
            for l in 0..3 {
                for m in 0..3 {
                    rhs[tri[l]] +=
                        area / 12.0 * if l == m { 2.0 } else { 1.0 } * s.get(tri[m]);
                }
            }
        }
    }
    for (label, value) in &bc.neumann {
        for e in mesh.boundary_edges() {
            if e.label != *label {
                continue;
            }
            let len = mesh.vertex(e.a).dist(mesh.vertex(e.b));
            let (ga, gb) = (value.at(e.a), value.at(e.b));
            rhs[e.a] += len / 6.0 * (2.0 * ga + gb);
            rhs[e.b] += len / 6.0 * (ga + 2.0 * gb);
        }
    }

    // Dirichlet constraints.
    let mut fixed: HashMap<usize, f64> = HashMap::new();
    for (label, value) in &bc.dirichlet {
        for v in mesh.boundary_vertices(*label) {
            fixed.insert(v, value.at(v));
        }
    }
    let free: Vec<usize> = (0..n).filter(|v| !fixed.contains_key(v)).collect();
    let renumber: HashMap<usize, usize> =
        free.iter().enumerate().map(|(new, &old)| (old, new)).collect();

    let mut reduced_triplets = Vec::new();
    let mut reduced_rhs: Vec<f64> = free.iter().map(|&v| rhs[v]).collect();
    for (new_i, &old_i) in free.iter().enumerate() {
        for k in a.row_ptr[old_i]..a.row_ptr[old_i + 1] {
            let j = a.col_idx[k];
            match renumber.get(&j) {
                Some(&new_j) => reduced_triplets.push((new_i, new_j, a.vals[k])),
                None => reduced_rhs[new_i] -= a.vals[k] * fixed[&j],
            }
        }
    }
    let reduced = Csr::from_triplets(free.len(), reduced_triplets);
    let solution_free = solve_cg(&reduced, &reduced_rhs, 1e-12, 50 * free.len().max(100))?;

    let mut values = vec![0.0; n];
    for (&v, &val) in &fixed {
        values[v] = val;
    }
    for (new, &old) in free.iter().enumerate() {
        values[old] = solution_free[new];
    }
    ScalarField::new(values)
}

/// ∫ a dx by exact P1 quadrature.
pub fn integrate_domain(mesh: &Mesh, a: &ScalarField) -> Result<f64> {
    check_field(mesh, a)?;
    let mut acc = 0.0;
    for (t, tri) in mesh.triangles().iter().enumerate() {
        acc += mesh.triangle_area(t) * (a.get(tri[0]) + a.get(tri[1]) + a.get(tri[2])) / 3.0;
    }
    Ok(acc)
}

/// ∫ a·b dx through the consistent P1 mass matrix (exact for quadratics).
pub fn integrate_domain_product(mesh: &Mesh, a: &ScalarField, b: &ScalarField) -> Result<f64> {
    check_field(mesh, a)?;
    check_field(mesh, b)?;
    let mut acc = 0.0;
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let area = mesh.triangle_area(t);
        let sa = a.get(tri[0]) + a.get(tri[1]) + a.get(tri[2]);
        let sb = b.get(tri[0]) + b.get(tri[1]) + b.get(tri[2]);
        let dots = a.get(tri[0]) * b.get(tri[0])
            + a.get(tri[1]) * b.get(tri[1])
            + a.get(tri[2]) * b.get(tri[2]);
        acc += area / 12.0 * (sa * sb + dots);
    }
    Ok(acc)
}

/// ∫ a ds over the labeled boundary, exact for P1 traces.
pub fn integrate_boundary(mesh: &Mesh, a: &ScalarField, label: BoundaryLabel) -> Result<f64> {
    check_field(mesh, a)?;
    let mut acc = 0.0;
    let mut found = false;
    for e in mesh.boundary_edges() {
        if e.label != label {
            continue;
        }
        found = true;
        let len = mesh.vertex(e.a).dist(mesh.vertex(e.b));
        acc += len / 2.0 * (a.get(e.a) + a.get(e.b));
    }
    if !found {
        return Err(Error::BoundaryCondition(format!(
            "label {label:?} does not exist on the mesh"
        )));
    }
    Ok(acc)
}

/// ∫ a·b ds over the labeled boundary via the edge mass matrix (exact for
/// products of P1 traces).
pub fn integrate_boundary_product(
    mesh: &Mesh,
    a: &ScalarField,
    b: &ScalarField,
    label: BoundaryLabel,
) -> Result<f64> {
    check_field(mesh, a)?;
    check_field(mesh, b)?;
    let mut acc = 0.0;
    let mut found = false;
    for e in mesh.boundary_edges() {
        if e.label != label {
            continue;
        }
        found = true;
        let len = mesh.vertex(e.a).dist(mesh.vertex(e.b));
        acc += len / 6.0
            * (2.0 * a.get(e.a) * b.get(e.a)
                + a.get(e.a) * b.get(e.b)
                + a.get(e.b) * b.get(e.a)
                + 2.0 * a.get(e.b) * b.get(e.b));
    }
    if !found {
        return Err(Error::BoundaryCondition(format!(
            "label {label:?} does not exist on the mesh"
        )));
    }
    Ok(acc)
}

/// Outward normal derivative of `u` at each boundary vertex of `label`:
/// the area-weighted average of the elementwise gradient over the triangles
/// touching the vertex, dotted with the averaged vertex normal. Entries off
/// the labeled boundary are zero.
pub fn boundary_normal_derivative(
    mesh: &Mesh,
    u: &ScalarField,
    label: BoundaryLabel,
) -> Result<ScalarField> {
    check_field(mesh, u)?;
    let normals = mesh.boundary_vertex_normals(label);
    let on_label: HashSet<usize> = mesh.boundary_vertices(label).into_iter().collect();
    let mut grad_sum = vec![Point2::new(0.0, 0.0); mesh.n_vertices()];
    let mut area_sum = vec![0.0; mesh.n_vertices()];
    for tri in mesh.triangles() {
        let (g, area) = triangle_gradients(
            mesh.vertex(tri[0]),
            mesh.vertex(tri[1]),
            mesh.vertex(tri[2]),
        );
        let grad = g[0].scale(u.get(tri[0]))
            + g[1].scale(u.get(tri[1]))
            + g[2].scale(u.get(tri[2]));
        for &v in tri {
            if on_label.contains(&v) {
                grad_sum[v] = grad_sum[v] + grad.scale(area);
                area_sum[v] += area;
            }
        }
    }
    let mut values = vec![0.0; mesh.n_vertices()];
    for &v in &on_label {
        values[v] = grad_sum[v].scale(1.0 / area_sum[v]).dot(normals[v]);
    }
    ScalarField::new(values)
}

/// H¹ quadratic form `aᵀ(K + M)b` of two scalar fields.
pub fn h1_form(mesh: &Mesh, a: &ScalarField, b: &ScalarField) -> Result<f64> {
    Ok(stiffness_form(mesh, a, b)? + integrate_domain_product(mesh, a, b)?)
}

/// Stiffness pairing `aᵀKb = ∫ ∇a·∇b dx`.
pub fn stiffness_form(mesh: &Mesh, a: &ScalarField, b: &ScalarField) -> Result<f64> {
    check_field(mesh, a)?;
    check_field(mesh, b)?;
    let mut acc = 0.0;
    for tri in mesh.triangles() {
        let (g, area) = triangle_gradients(
            mesh.vertex(tri[0]),
            mesh.vertex(tri[1]),
            mesh.vertex(tri[2]),
        );
        let ga = g[0].scale(a.get(tri[0]))
            + g[1].scale(a.get(tri[1]))
            + g[2].scale(a.get(tri[2]));
        let gb = g[0].scale(b.get(tri[0]))
            + g[1].scale(b.get(tri[1]))
            + g[2].scale(b.get(tri[2]));
        acc += area * ga.dot(gb);
    }
    Ok(acc)
}

/// CSV export `vertex_index,x,y,value`.
pub fn write_field_csv(mesh: &Mesh, field: &ScalarField, path: &std::path::Path) -> Result<()> {
    check_field(mesh, field)?;
    let mut out = String::from("vertex_index,x,y,value\n");
    for i in 0..mesh.n_vertices() {
        let p = mesh.vertex(i);
        out.push_str(&format!("{i},{:.17e},{:.17e},{:.17e}\n", p.x, p.y, field.get(i)));
    }
    std::fs::write(path, out)?;
    Ok(())
}

fn check_field(mesh: &Mesh, f: &ScalarField) -> Result<()> {
    if f.len() != mesh.n_vertices() {
        return Err(Error::FieldMismatch(format!(
            "field has {} entries for a mesh with {} vertices",
            f.len(),
            mesh.n_vertices()
        )));
    }
    Ok(())
}
