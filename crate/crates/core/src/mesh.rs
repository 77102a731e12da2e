//! Triangulations of the doubly connected region between the outer boundary
//! and the inclusion, and operations that move, rebuild and interrogate them.

use std::collections::HashMap;

use spade::{ConstrainedDelaunayTriangulation, RefinementParameters, Triangulation};

use crate::geometry::{cross, BoundaryPolyline, GeometryConstraints, Point2};
use crate::{Error, Result, ScalarField, VectorField};

/// Which boundary loop an edge belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BoundaryLabel {
    Outer,
    Inner,
}

impl BoundaryLabel {
    /// Numeric label used by the mesh file format.
    pub fn code(self) -> usize {
        match self {
            BoundaryLabel::Outer => 1,
            BoundaryLabel::Inner => 2,
        }
    }

    pub fn from_code(code: usize) -> Result<Self> {
        match code {
            1 => Ok(BoundaryLabel::Outer),
            2 => Ok(BoundaryLabel::Inner),
            other => Err(Error::MeshInvariant(format!("unknown boundary label {other}"))),
        }
    }
}

/// A labeled boundary edge, `a`-`b` being 0-based vertex indices.
#[derive(Clone, Copy, Debug)]
pub struct BoundaryEdge {
    pub a: usize,
    pub b: usize,
    pub label: BoundaryLabel,
}

/// Unstructured triangulation of the annular domain.
#[derive(Clone, Debug)]
pub struct Mesh {
    vertices: Vec<Point2>,
    triangles: Vec<[usize; 3]>,
    boundary_edges: Vec<BoundaryEdge>,
    h_target: f64,
}

/// Per-mesh triangle quality summary. Quality of a triangle is
/// 2·inradius/circumradius, equal to 1 for equilateral triangles.
#[derive(Clone, Copy, Debug)]
pub struct QualitySummary {
    pub min_quality: f64,
    pub mean_quality: f64,
    pub min_edge_length: f64,
}

/// Boundary polylines used to rebuild a mesh; carried so nodal fields can be
/// transferred onto the new triangulation.
#[derive(Clone, Debug)]
pub struct TransferRecord {
    pub outer: BoundaryPolyline,
    pub inner: BoundaryPolyline,
}

pub fn triangle_quality(a: Point2, b: Point2, c: Point2) -> f64 {
    let la = b.dist(c);
    let lb = a.dist(c);
    let lc = a.dist(b);
    let area = 0.5 * cross(b - a, c - a).abs();
    let s = 0.5 * (la + lb + lc);
    // q = 2 (area/s) / (la lb lc / 4 area)
    8.0 * area * area / (s * la * lb * lc)
}

impl Mesh {
    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn boundary_edges(&self) -> &[BoundaryEdge] {
        &self.boundary_edges
    }

    pub fn h_target(&self) -> f64 {
        self.h_target
    }

    pub fn vertex(&self, i: usize) -> Point2 {
        self.vertices[i]
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [i, j, k] = self.triangles[t];
        0.5 * cross(self.vertices[j] - self.vertices[i], self.vertices[k] - self.vertices[i])
    }

    /// Vertex indices lying on the given boundary loop, in index order.
    pub fn boundary_vertices(&self, label: BoundaryLabel) -> Vec<usize> {
        let mut seen = vec![false; self.vertices.len()];
        for e in &self.boundary_edges {
            if e.label == label {
                seen[e.a] = true;
                seen[e.b] = true;
            }
        }
        (0..self.vertices.len()).filter(|&i| seen[i]).collect()
    }

    /// The boundary loop as an ordered, counterclockwise cycle of vertex
    /// indices.
    pub fn boundary_loop(&self, label: BoundaryLabel) -> Result<Vec<usize>> {
        let mut adj: HashMap<usize, Vec<usize>> = HashMap::new();
        let mut count = 0;
        for e in &self.boundary_edges {
            if e.label == label {
                adj.entry(e.a).or_default().push(e.b);
                adj.entry(e.b).or_default().push(e.a);
                count += 1;
            }
        }
        if count == 0 {
            return Err(Error::MeshInvariant(format!("no edges with label {label:?}")));
        }
        for (v, ns) in &adj {
            if ns.len() != 2 {
                return Err(Error::MeshInvariant(format!(
                    "boundary vertex {v} has {} incident {label:?} edges",
                    ns.len()
                )));
            }
        }
        let start = *adj.keys().min().unwrap();
        let mut cycle = vec![start];
        let mut prev = start;
        let mut cur = adj[&start][0];
        while cur != start {
            cycle.push(cur);
            let ns = &adj[&cur];
            let next = if ns[0] == prev { ns[1] } else { ns[0] };
            prev = cur;
            cur = next;
        }
        if cycle.len() != count {
            return Err(Error::MeshInvariant(format!(
                "{label:?} edges do not form a single closed loop ({} of {count} visited)",
                cycle.len()
            )));
        }
        // Orient counterclockwise.
        let area: f64 = 0.5
            * (0..cycle.len())
                .map(|i| {
                    cross(
                        self.vertices[cycle[i]],
                        self.vertices[cycle[(i + 1) % cycle.len()]],
                    )
                })
                .sum::<f64>();
        if area < 0.0 {
            cycle.reverse();
        }
        Ok(cycle)
    }

    /// Extracts the boundary loop as a polyline.
    pub fn boundary_polyline(&self, label: BoundaryLabel) -> Result<BoundaryPolyline> {
        let cycle = self.boundary_loop(label)?;
        BoundaryPolyline::new(cycle.iter().map(|&i| self.vertices[i]).collect())
    }

    /// Outward unit normal of the domain at each boundary vertex of `label`,
    /// obtained by length-weighted averaging of the adjacent edge normals and
    /// renormalizing. Vertices off the loop get the zero vector.
    pub fn boundary_vertex_normals(&self, label: BoundaryLabel) -> Vec<Point2> {
        // Outward edge normal: perpendicular pointing away from the opposite
        // vertex of the single triangle owning the edge.
        let mut owner: HashMap<(usize, usize), usize> = HashMap::new();
        for (t, tri) in self.triangles.iter().enumerate() {
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                let key = (a.min(b), a.max(b));
                owner.entry(key).or_insert(tri[(k + 2) % 3]);
                let _ = t;
            }
        }
        let mut normals = vec![Point2::new(0.0, 0.0); self.vertices.len()];
        for e in &self.boundary_edges {
            if e.label != label {
                continue;
            }
            let (pa, pb) = (self.vertices[e.a], self.vertices[e.b]);
            let d = pb - pa;
            let len = d.norm();
            let mut n = Point2::new(d.y, -d.x);
            let opp = owner[&(e.a.min(e.b), e.a.max(e.b))];
            let mid = (pa + pb).scale(0.5);
            if n.dot(self.vertices[opp] - mid) > 0.0 {
                n = n.scale(-1.0);
            }
            let n = n.scale(1.0 / len); // unit
            normals[e.a] = normals[e.a] + n.scale(len);
            normals[e.b] = normals[e.b] + n.scale(len);
        }
        for n in &mut normals {
            let len = n.norm();
            if len > 0.0 {
                *n = n.scale(1.0 / len);
            }
        }
        normals
    }

    pub fn quality(&self) -> QualitySummary {
        let mut min_q = f64::INFINITY;
        let mut sum_q = 0.0;
        let mut min_edge = f64::INFINITY;
        for tri in &self.triangles {
            let (a, b, c) = (
                self.vertices[tri[0]],
                self.vertices[tri[1]],
                self.vertices[tri[2]],
            );
            let q = triangle_quality(a, b, c);
            min_q = min_q.min(q);
            sum_q += q;
            min_edge = min_edge.min(a.dist(b)).min(b.dist(c)).min(c.dist(a));
        }
        QualitySummary {
            min_quality: min_q,
            mean_quality: sum_q / self.triangles.len() as f64,
            min_edge_length: min_edge,
        }
    }

    pub fn median_edge_length(&self) -> f64 {
        let mut lens = Vec::new();
        let mut seen = std::collections::HashSet::new();
        for tri in &self.triangles {
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                if seen.insert((a.min(b), a.max(b))) {
                    lens.push(self.vertices[a].dist(self.vertices[b]));
                }
            }
        }
        lens.sort_by(|a, b| a.partial_cmp(b).unwrap());
        lens[lens.len() / 2]
    }

    /// Full invariant check: positive areas, manifold edge incidence,
    /// single closed loops per label, inclusion strictly inside the outer
    /// boundary.
    pub fn validate(&self) -> Result<()> {
        for (t, _) in self.triangles.iter().enumerate() {
            let area = self.triangle_area(t);
            if area <= 0.0 {
                return Err(Error::MeshInvariant(format!(
                    "triangle {t} has non-positive signed area {area:.3e}"
                )));
            }
        }
        let mut edge_count: HashMap<(usize, usize), usize> = HashMap::new();
        for tri in &self.triangles {
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                *edge_count.entry((a.min(b), a.max(b))).or_insert(0) += 1;
            }
        }
        let mut boundary_set = std::collections::HashSet::new();
        for e in &self.boundary_edges {
            boundary_set.insert((e.a.min(e.b), e.a.max(e.b)));
        }
        for (edge, count) in &edge_count {
            let on_boundary = boundary_set.contains(edge);
            match (count, on_boundary) {
                (1, true) | (2, false) => {}
                (1, false) => {
                    return Err(Error::MeshInvariant(format!(
                        "edge {edge:?} is on the mesh boundary but unlabeled"
                    )))
                }
                (2, true) => {
                    return Err(Error::MeshInvariant(format!(
                        "labeled boundary edge {edge:?} is interior"
                    )))
                }
                _ => {
                    return Err(Error::MeshInvariant(format!(
                        "edge {edge:?} belongs to {count} triangles"
                    )))
                }
            }
        }
        let outer = self.boundary_polyline(BoundaryLabel::Outer)?;
        self.boundary_loop(BoundaryLabel::Inner)?;
        for &v in &self.boundary_vertices(BoundaryLabel::Inner) {
            if !outer.contains_point(self.vertices[v]) {
                return Err(Error::MeshInvariant(format!(
                    "inner boundary vertex {v} is not inside the outer boundary"
                )));
            }
        }
        Ok(())
    }

    /// Mesh file format: line 1 `nv nt nb`, then vertices `x y`, then
    /// triangles `i j k`, then boundary edges `i j label`.
    pub fn write_file(&self, path: &std::path::Path) -> Result<()> {
        let mut out = format!(
            "{} {} {}\n",
            self.vertices.len(),
            self.triangles.len(),
            self.boundary_edges.len()
        );
        for p in &self.vertices {
            out.push_str(&format!("{:.17e} {:.17e}\n", p.x, p.y));
        }
        for t in &self.triangles {
            out.push_str(&format!("{} {} {}\n", t[0], t[1], t[2]));
        }
        for e in &self.boundary_edges {
            out.push_str(&format!("{} {} {}\n", e.a, e.b, e.label.code()));
        }
        std::fs::write(path, out)?;
        Ok(())
    }

    pub fn read_file(path: &std::path::Path) -> Result<Mesh> {
        let text = std::fs::read_to_string(path)?;
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::MeshInvariant("empty mesh file".into()))?;
        let mut it = header.split_whitespace();
        let parse_count = |s: Option<&str>| -> Result<usize> {
            s.ok_or_else(|| Error::MeshInvariant("short mesh header".into()))?
                .parse()
                .map_err(|e| Error::MeshInvariant(format!("bad mesh header: {e}")))
        };
        let nv = parse_count(it.next())?;
        let nt = parse_count(it.next())?;
        let nb = parse_count(it.next())?;
        let mut vertices = Vec::with_capacity(nv);
        for _ in 0..nv {
            let line = lines
                .next()
                .ok_or_else(|| Error::MeshInvariant("truncated vertex block".into()))?;
            let mut it = line.split_whitespace();
            let x: f64 = it.next().unwrap_or("").parse().map_err(|e| {
                Error::MeshInvariant(format!("bad vertex coordinate: {e}"))
            })?;
            let y: f64 = it.next().unwrap_or("").parse().map_err(|e| {
                Error::MeshInvariant(format!("bad vertex coordinate: {e}"))
            })?;
            vertices.push(Point2::new(x, y));
        }
        let mut triangles = Vec::with_capacity(nt);
        for _ in 0..nt {
            let line = lines
                .next()
                .ok_or_else(|| Error::MeshInvariant("truncated triangle block".into()))?;
            let mut it = line.split_whitespace();
            let mut tri = [0usize; 3];
            for v in &mut tri {
                *v = parse_count(it.next())?;
            }
            triangles.push(tri);
        }
        let mut boundary_edges = Vec::with_capacity(nb);
        for _ in 0..nb {
            let line = lines
                .next()
                .ok_or_else(|| Error::MeshInvariant("truncated boundary block".into()))?;
            let mut it = line.split_whitespace();
            let a = parse_count(it.next())?;
            let b = parse_count(it.next())?;
            let label = BoundaryLabel::from_code(parse_count(it.next())?)?;
            boundary_edges.push(BoundaryEdge { a, b, label });
        }
        let mesh = Mesh {
            vertices,
            triangles,
            boundary_edges,
            h_target: 0.0,
        };
        mesh.validate()?;
        Ok(mesh)
    }
}

/// Triangulates the region between `outer` and `inner` with target edge
/// size `h`. Boundary segments longer than `h` are subdivided; all input
/// polyline points become mesh vertices.
pub fn triangulate_annulus(
    outer: &BoundaryPolyline,
    inner: &BoundaryPolyline,
    h: f64,
) -> Result<Mesh> {
    if !(h > 0.0) {
        return Err(Error::Triangulation(format!("h must be positive, got {h}")));
    }
    if h > inner.diameter() {
        return Err(Error::Triangulation(format!(
            "h = {h} exceeds the inner curve's diameter {}",
            inner.diameter()
        )));
    }
    if inner.intersects(outer) {
        return Err(Error::Triangulation(
            "inner and outer boundaries intersect".into(),
        ));
    }
    if !inner.points().iter().all(|&p| outer.contains_point(p)) {
        return Err(Error::Triangulation(
            "inner boundary is not inside the outer boundary".into(),
        ));
    }
    let gap = inner
        .points()
        .iter()
        .map(|&p| outer.distance_to_point(p))
        .fold(f64::INFINITY, f64::min);
    if gap < 0.5 * h {
        return Err(Error::Triangulation(format!(
            "annulus is degenerate: boundary separation {gap:.3e} is below h/2"
        )));
    }

    let outer_pts = outer.oriented_ccw().subdivided(h);
    let inner_pts = inner.oriented_ccw().subdivided(h);

    let mut cdt: ConstrainedDelaunayTriangulation<spade::Point2<f64>> =
        ConstrainedDelaunayTriangulation::new();
    let to_spade = |p: &Point2| spade::Point2::new(p.x, p.y);
    cdt.add_constraint_edges(outer_pts.points().iter().map(to_spade), true)
        .map_err(|e| Error::Triangulation(format!("outer boundary insertion failed: {e}")))?;
    cdt.add_constraint_edges(inner_pts.points().iter().map(to_spade), true)
        .map_err(|e| Error::Triangulation(format!("inner boundary insertion failed: {e}")))?;

    let result = cdt.refine(
        RefinementParameters::new()
            .exclude_outer_faces(true)
            .with_max_allowed_area(0.5 * h * h)
            // The default additional-vertex budget scales with the input
            // size and is far too small for fine meshes of a coarse domain.
            .with_max_additional_vertices(
                ((outer.signed_area().abs() / (0.125 * h * h)).ceil() as usize).max(10_000),
            ),
    );
    if !result.refinement_complete {
        return Err(Error::Triangulation(
            "mesh refinement did not complete".into(),
        ));
    }
    let excluded: std::collections::HashSet<_> = result.excluded_faces.iter().copied().collect();

    // Collect retained faces, renumbering the vertices they use.
    let mut index_map: HashMap<usize, usize> = HashMap::new();
    let mut vertices: Vec<Point2> = Vec::new();
    let mut triangles: Vec<[usize; 3]> = Vec::new();
    for face in cdt.inner_faces() {
        if excluded.contains(&face.fix()) {
            continue;
        }
        let vs = face.vertices();
        let mut tri = [0usize; 3];
        for (slot, v) in tri.iter_mut().zip(vs.iter()) {
            let old = v.fix().index();
            let next = vertices.len();
            let idx = *index_map.entry(old).or_insert_with(|| {
                let p = v.position();
                vertices.push(Point2::new(p.x, p.y));
                next
            });
            *slot = idx;
        }
        triangles.push(tri);
    }
    if triangles.is_empty() {
        return Err(Error::Triangulation("no triangles retained".into()));
    }

    // Boundary edges: sides owned by exactly one retained triangle.
    let mut edge_count: HashMap<(usize, usize), usize> = HashMap::new();
    for tri in &triangles {
        for k in 0..3 {
            let (a, b) = (tri[k], tri[(k + 1) % 3]);
            *edge_count.entry((a.min(b), a.max(b))).or_insert(0) += 1;
        }
    }
    let mut boundary_edges = Vec::new();
    for (&(a, b), &count) in &edge_count {
        if count == 1 {
            let mid = (vertices[a] + vertices[b]).scale(0.5);
            let label = if inner.distance_to_point(mid) < outer.distance_to_point(mid) {
                BoundaryLabel::Inner
            } else {
                BoundaryLabel::Outer
            };
            boundary_edges.push(BoundaryEdge { a, b, label });
        }
    }
    boundary_edges.sort_by_key(|e| (e.a, e.b));

    let mesh = Mesh {
        vertices,
        triangles,
        boundary_edges,
        h_target: h,
    };
    mesh.validate()?;
    Ok(mesh)
}

/// Moves every vertex by `t·V`, keeping the connectivity. Fails with a
/// distinct error if an element inverts or the inclusion comes within
/// `constraints.delta` of the outer boundary.
pub fn deform_mesh(
    mesh: &Mesh,
    velocity: &VectorField,
    t: f64,
    constraints: &GeometryConstraints,
) -> Result<Mesh> {
    if velocity.len() != mesh.n_vertices() {
        return Err(Error::FieldMismatch(format!(
            "velocity has {} entries for a mesh with {} vertices",
            velocity.len(),
            mesh.n_vertices()
        )));
    }
    for &v in &mesh.boundary_vertices(BoundaryLabel::Outer) {
        if velocity.get(v).norm() > 1e-9 {
            return Err(Error::FieldMismatch(format!(
                "velocity does not vanish on the outer boundary (vertex {v})"
            )));
        }
    }
    let vertices: Vec<Point2> = mesh
        .vertices
        .iter()
        .enumerate()
        .map(|(i, &p)| p + velocity.get(i).scale(t))
        .collect();
    let moved = Mesh {
        vertices,
        triangles: mesh.triangles.clone(),
        boundary_edges: mesh.boundary_edges.clone(),
        h_target: mesh.h_target,
    };
    for t_idx in 0..moved.triangles.len() {
        let area = moved.triangle_area(t_idx);
        if area <= 0.0 {
            return Err(Error::InvertedElement {
                triangle: t_idx,
                area,
            });
        }
    }
    let outer = moved.boundary_polyline(BoundaryLabel::Outer)?;
    for &v in &moved.boundary_vertices(BoundaryLabel::Inner) {
        let d = outer.distance_to_point(moved.vertices[v]);
        if d <= constraints.delta {
            return Err(Error::Clearance {
                vertex: v,
                distance: d,
                delta: constraints.delta,
            });
        }
        if !outer.contains_point(moved.vertices[v]) {
            return Err(Error::Clearance {
                vertex: v,
                distance: 0.0,
                delta: constraints.delta,
            });
        }
    }
    Ok(moved)
}

/// Rebuilds the triangulation from the current boundary polylines.
pub fn remesh(mesh: &Mesh, h: f64) -> Result<(Mesh, TransferRecord)> {
    let outer = mesh.boundary_polyline(BoundaryLabel::Outer)?;
    let inner = mesh.boundary_polyline(BoundaryLabel::Inner)?;
    let new_mesh = triangulate_annulus(&outer, &inner, h)?;
    Ok((new_mesh, TransferRecord { outer, inner }))
}

/// Uniform-grid point locator over a mesh's triangles.
pub struct TriangleLocator<'a> {
    mesh: &'a Mesh,
    xmin: f64,
    ymin: f64,
    cell: f64,
    nx: usize,
    ny: usize,
    bins: Vec<Vec<usize>>,
}

impl<'a> TriangleLocator<'a> {
    pub fn new(mesh: &'a Mesh) -> Self {
        let (mut xmin, mut xmax) = (f64::INFINITY, f64::NEG_INFINITY);
        let (mut ymin, mut ymax) = (f64::INFINITY, f64::NEG_INFINITY);
        for p in mesh.vertices() {
            xmin = xmin.min(p.x);
            xmax = xmax.max(p.x);
            ymin = ymin.min(p.y);
            ymax = ymax.max(p.y);
        }
        let span = (xmax - xmin).max(ymax - ymin).max(1e-12);
        let n = (mesh.n_triangles() as f64).sqrt().ceil() as usize;
        let n = n.clamp(1, 512);
        let cell = span / n as f64;
        let nx = ((xmax - xmin) / cell).ceil() as usize + 1;
        let ny = ((ymax - ymin) / cell).ceil() as usize + 1;
        let mut bins = vec![Vec::new(); nx * ny];
        for (t, tri) in mesh.triangles().iter().enumerate() {
            let ps = [mesh.vertex(tri[0]), mesh.vertex(tri[1]), mesh.vertex(tri[2])];
            let txmin = ps.iter().map(|p| p.x).fold(f64::INFINITY, f64::min);
            let txmax = ps.iter().map(|p| p.x).fold(f64::NEG_INFINITY, f64::max);
            let tymin = ps.iter().map(|p| p.y).fold(f64::INFINITY, f64::min);
            let tymax = ps.iter().map(|p| p.y).fold(f64::NEG_INFINITY, f64::max);
            let i0 = (((txmin - xmin) / cell).floor() as isize).max(0) as usize;
            let i1 = ((((txmax - xmin) / cell).floor() as isize).max(0) as usize).min(nx - 1);
            let j0 = (((tymin - ymin) / cell).floor() as isize).max(0) as usize;
            let j1 = ((((tymax - ymin) / cell).floor() as isize).max(0) as usize).min(ny - 1);
            for i in i0..=i1 {
                for j in j0..=j1 {
                    bins[j * nx + i].push(t);
                }
            }
        }
        TriangleLocator {
            mesh,
            xmin,
            ymin,
            cell,
            nx,
            ny,
            bins,
        }
    }

    /// Containing triangle and barycentric coordinates of `p`, if any.
    pub fn locate(&self, p: Point2) -> Option<(usize, [f64; 3])> {
        let i = (((p.x - self.xmin) / self.cell).floor() as isize).clamp(0, self.nx as isize - 1)
            as usize;
        let j = (((p.y - self.ymin) / self.cell).floor() as isize).clamp(0, self.ny as isize - 1)
            as usize;
        for &t in &self.bins[j * self.nx + i] {
            if let Some(bary) = self.barycentric(t, p) {
                return Some((t, bary));
            }
        }
        None
    }

    fn barycentric(&self, t: usize, p: Point2) -> Option<[f64; 3]> {
        let [i, j, k] = self.mesh.triangles()[t];
        let (a, b, c) = (self.mesh.vertex(i), self.mesh.vertex(j), self.mesh.vertex(k));
        let area = cross(b - a, c - a);
        if area == 0.0 {
            return None;
        }
        let w0 = cross(b - p, c - p) / area;
        let w1 = cross(c - p, a - p) / area;
        let w2 = cross(a - p, b - p) / area;
        let tol = -1e-10;
        if w0 >= tol && w1 >= tol && w2 >= tol {
            Some([w0, w1, w2])
        } else {
            None
        }
    }
}

/// P1 interpolation of a nodal field from `old` onto the vertices of `new`.
/// Vertices outside `old` receive the value at the nearest old vertex.
pub fn transfer_field(field: &ScalarField, old: &Mesh, new: &Mesh) -> Result<ScalarField> {
    if field.len() != old.n_vertices() {
        return Err(Error::FieldMismatch(format!(
            "field has {} entries for a mesh with {} vertices",
            field.len(),
            old.n_vertices()
        )));
    }
    let locator = TriangleLocator::new(old);
    let mut values = Vec::with_capacity(new.n_vertices());
    for &p in new.vertices() {
        let v = match locator.locate(p) {
            Some((t, w)) => {
                let [i, j, k] = old.triangles()[t];
                w[0] * field.get(i) + w[1] * field.get(j) + w[2] * field.get(k)
            }
            None => {
                let nearest = (0..old.n_vertices())
                    .min_by(|&a, &b| {
                        old.vertex(a)
                            .dist(p)
                            .partial_cmp(&old.vertex(b).dist(p))
                            .unwrap()
                    })
                    .unwrap();
                field.get(nearest)
            }
        };
        values.push(v);
    }
    ScalarField::new(values)
}

pub fn transfer_vector_field(field: &VectorField, old: &Mesh, new: &Mesh) -> Result<VectorField> {
    let x = transfer_field(&field.component(0), old, new)?;
    let y = transfer_field(&field.component(1), old, new)?;
    VectorField::from_components(&x, &y)
}
