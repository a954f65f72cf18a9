//! Conforming triangulations, uniform refinement and VTK export.

mod vtk;

use std::collections::HashMap;

use crate::error::{Error, Result};

pub use vtk::VtkWriter;

pub type Point = [f64; 2];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BoundaryTag {
    Bottom,
    Right,
    Top,
    Left,
    /// Edge on a curved boundary; refinement projects new vertices onto the unit circle.
    Circle,
    /// Clamped edge of the cantilever.
    Fixed,
    /// Right-edge piece carrying the optional cantilever traction.
    Load,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundaryEdge {
    pub vertices: [usize; 2],
    pub tag: BoundaryTag,
}

/// Affine map data of one triangle.
#[derive(Clone, Copy, Debug)]
pub struct CellGeometry {
    pub vertices: [Point; 3],
    pub area: f64,
    /// Gradients of the barycentric coordinates.
    pub grads: [[f64; 2]; 3],
}

impl CellGeometry {
    pub fn new(vertices: [Point; 3]) -> Self {
        let [a, b, c] = vertices;
        let det = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
        let inv = 1.0 / det;
        let grads = [
            [(b[1] - c[1]) * inv, (c[0] - b[0]) * inv],
            [(c[1] - a[1]) * inv, (a[0] - c[0]) * inv],
            [(a[1] - b[1]) * inv, (b[0] - a[0]) * inv],
        ];
        CellGeometry { vertices, area: 0.5 * det, grads }
    }

    /// Physical point for barycentric coordinates `l`.
    #[inline]
    pub fn point(&self, l: [f64; 3]) -> Point {
        let v = &self.vertices;
        [l[0] * v[0][0] + l[1] * v[1][0] + l[2] * v[2][0], l[0] * v[0][1] + l[1] * v[1][1] + l[2] * v[2][1]]
    }

    pub fn centroid(&self) -> Point {
        self.point([1.0 / 3.0; 3])
    }

    pub fn diameter(&self) -> f64 {
        let v = &self.vertices;
        let d = |p: Point, q: Point| ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt();
        d(v[0], v[1]).max(d(v[1], v[2])).max(d(v[2], v[0]))
    }
}

#[derive(Clone, Debug)]
pub struct Mesh {
    pub vertices: Vec<Point>,
    pub cells: Vec<[usize; 3]>,
    pub boundary_edges: Vec<BoundaryEdge>,
    h: f64,
}

impl Mesh {
    /// Builds a mesh from cells, orienting every cell counterclockwise and
    /// tagging each boundary edge with `tagger(a, b)`.
    pub fn from_cells(
        vertices: Vec<Point>,
        mut cells: Vec<[usize; 3]>,
        tagger: impl Fn(Point, Point) -> BoundaryTag,
    ) -> Result<Self> {
        for (i, c) in cells.iter_mut().enumerate() {
            if c.iter().any(|&v| v >= vertices.len()) {
                return Err(Error::InvalidParameter(format!("cell {i} references a missing vertex")));
            }
            let g = CellGeometry::new([vertices[c[0]], vertices[c[1]], vertices[c[2]]]);
            if g.area == 0.0 {
                return Err(Error::InvalidParameter(format!("cell {i} is degenerate")));
            }
            if g.area < 0.0 {
                c.swap(1, 2);
            }
        }
        let mut count: HashMap<(usize, usize), (usize, [usize; 2])> = HashMap::new();
        for c in &cells {
            for e in 0..3 {
                let (a, b) = (c[e], c[(e + 1) % 3]);
                let key = (a.min(b), a.max(b));
                count.entry(key).or_insert((0, [a, b])).0 += 1;
            }
        }
        let mut boundary: Vec<BoundaryEdge> = count
            .into_iter()
            .filter(|(_, (n, _))| *n == 1)
            .map(|(_, (_, [a, b]))| BoundaryEdge { vertices: [a, b], tag: tagger(vertices[a], vertices[b]) })
            .collect();
        boundary.sort_by_key(|e| (e.vertices[0].min(e.vertices[1]), e.vertices[0].max(e.vertices[1])));
        Ok(Self::assemble(vertices, cells, boundary))
    }

    fn assemble(vertices: Vec<Point>, cells: Vec<[usize; 3]>, boundary_edges: Vec<BoundaryEdge>) -> Self {
        let mut mesh = Mesh { vertices, cells, boundary_edges, h: 0.0 };
        mesh.h = (0..mesh.n_cells()).map(|c| mesh.geometry(c).diameter()).fold(0.0, f64::max);
        mesh
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    /// Maximum cell diameter.
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn geometry(&self, cell: usize) -> CellGeometry {
        let c = self.cells[cell];
        CellGeometry::new([self.vertices[c[0]], self.vertices[c[1]], self.vertices[c[2]]])
    }

    pub fn area(&self) -> f64 {
        (0..self.n_cells()).map(|c| self.geometry(c).area).sum()
    }

    /// Largest distance between two vertices.
    pub fn diameter(&self) -> f64 {
        let hull: Vec<Point> = self.boundary_edges.iter().map(|e| self.vertices[e.vertices[0]]).collect();
        let mut best: f64 = 0.0;
        for (i, p) in hull.iter().enumerate() {
            for q in &hull[i + 1..] {
                best = best.max(((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt());
            }
        }
        best
    }

    /// Vertices on edges whose tag satisfies `pred`, sorted.
    pub fn boundary_vertices_where(&self, pred: impl Fn(BoundaryTag) -> bool) -> Vec<usize> {
        let mut out: Vec<usize> = self.boundary_edges.iter().filter(|e| pred(e.tag)).flat_map(|e| e.vertices).collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    pub fn boundary_vertices(&self) -> Vec<usize> {
        self.boundary_vertices_where(|_| true)
    }

    /// Smallest interior angle over all cells, in radians.
    pub fn min_angle(&self) -> f64 {
        let mut best = f64::INFINITY;
        for c in 0..self.n_cells() {
            let v = self.geometry(c).vertices;
            for i in 0..3 {
                let (p, q, r) = (v[i], v[(i + 1) % 3], v[(i + 2) % 3]);
                let a = [q[0] - p[0], q[1] - p[1]];
                let b = [r[0] - p[0], r[1] - p[1]];
                let cos = (a[0] * b[0] + a[1] * b[1]) / ((a[0].hypot(a[1])) * (b[0].hypot(b[1])));
                best = best.min(cos.clamp(-1.0, 1.0).acos());
            }
        }
        best
    }

    /// Splits every triangle into four by joining edge midpoints. Children of
    /// cell `c` are `4c..4c+4`; parent vertices keep their indices.
    pub fn refine_uniform(&self) -> Mesh {
        let mut vertices = self.vertices.clone();
        let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();
        let mut mid = |a: usize, b: usize, vertices: &mut Vec<Point>| -> usize {
            *midpoint.entry((a.min(b), a.max(b))).or_insert_with(|| {
                let (p, q) = (vertices[a], vertices[b]);
                vertices.push([0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])]);
                vertices.len() - 1
            })
        };
        let mut cells = Vec::with_capacity(4 * self.n_cells());
        for &[a, b, c] in &self.cells {
            let ab = mid(a, b, &mut vertices);
            let bc = mid(b, c, &mut vertices);
            let ca = mid(c, a, &mut vertices);
            cells.push([a, ab, ca]);
            cells.push([ab, b, bc]);
            cells.push([ca, bc, c]);
            cells.push([ab, bc, ca]);
        }
        let mut boundary = Vec::with_capacity(2 * self.boundary_edges.len());
        for e in &self.boundary_edges {
            let [a, b] = e.vertices;
            let m = mid(a, b, &mut vertices);
            boundary.push(BoundaryEdge { vertices: [a, m], tag: e.tag });
            boundary.push(BoundaryEdge { vertices: [m, b], tag: e.tag });
            if e.tag == BoundaryTag::Circle {
                let p = vertices[m];
                let r = p[0].hypot(p[1]);
                vertices[m] = [p[0] / r, p[1] / r];
            }
        }
        Mesh::assemble(vertices, cells, boundary)
    }

    pub fn refined(&self, times: usize) -> Mesh {
        let mut m = self.clone();
        for _ in 0..times {
            m = m.refine_uniform();
        }
        m
    }
}

/// `[x0, x1] x [y0, y1]` split into `nx * ny` rectangles, each cut along the
/// diagonal from its lower-left to its upper-right corner.
pub fn rectangle_mesh(x0: f64, x1: f64, y0: f64, y1: f64, nx: usize, ny: usize) -> Result<Mesh> {
    if nx == 0 || ny == 0 {
        return Err(Error::InvalidParameter("rectangle mesh needs at least one cell per side".into()));
    }
    let idx = |i: usize, j: usize| j * (nx + 1) + i;
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            let x = if i == nx { x1 } else { x0 + (x1 - x0) * i as f64 / nx as f64 };
            let y = if j == ny { y1 } else { y0 + (y1 - y0) * j as f64 / ny as f64 };
            vertices.push([x, y]);
        }
    }
    let mut cells = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let (a, b, c, d) = (idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
            cells.push([a, b, c]);
            cells.push([a, c, d]);
        }
    }
    let tol = 1e-12 * (x1 - x0).abs().max((y1 - y0).abs());
    let near = move |a: f64, b: f64| (a - b).abs() < tol;
    Mesh::from_cells(vertices, cells, |p, q| {
        if near(p[1], y0) && near(q[1], y0) {
            BoundaryTag::Bottom
        } else if near(p[0], x1) && near(q[0], x1) {
            BoundaryTag::Right
        } else if near(p[1], y1) && near(q[1], y1) {
            BoundaryTag::Top
        } else {
            BoundaryTag::Left
        }
    })
}

/// `(-1, 1)^2` with `n` cells per side.
pub fn unit_square_mesh(n: usize) -> Result<Mesh> {
    rectangle_mesh(-1.0, 1.0, -1.0, 1.0, n, n)
}

/// One row of `n` square cells covering `(0, 1) x (0, 1/n)`; the left and
/// right edges carry the data of a one-dimensional problem.
pub fn strip_mesh(n: usize) -> Result<Mesh> {
    if n == 0 {
        return Err(Error::InvalidParameter("strip mesh needs n >= 1".into()));
    }
    rectangle_mesh(0.0, 1.0, 0.0, 1.0 / n as f64, n, 1)
}

/// Polygonal unit disk: a centre square (split into four triangles around
/// the origin) ringed by four boundary patches of two triangles each, refined
/// `level` times with new boundary vertices projected onto the circle.
pub fn disk_mesh(level: usize) -> Mesh {
    let inner = 0.5 * std::f64::consts::FRAC_1_SQRT_2;
    let outer = std::f64::consts::FRAC_1_SQRT_2;
    let mut vertices = vec![[0.0, 0.0]];
    for r in [inner, outer] {
        vertices.extend([[r, r], [-r, r], [-r, -r], [r, -r]]);
    }
    let mut cells = Vec::with_capacity(12);
    for i in 0..4 {
        let (a, b) = (1 + i, 1 + (i + 1) % 4);
        let (oa, ob) = (a + 4, b + 4);
        cells.extend([[0, a, b], [a, oa, ob], [a, ob, b]]);
    }
    let base = Mesh::from_cells(vertices, cells, |_, _| BoundaryTag::Circle).expect("disk patches are valid");
    base.refined(level)
}

/// Segment of the right edge tagged [`BoundaryTag::Load`] on the cantilever.
pub const LOAD_SEGMENT: (f64, f64) = (0.45, 0.55);

/// `(0, 3) x (0, 1)` with the left edge clamped.
pub fn cantilever_mesh(nx: usize, ny: usize) -> Result<Mesh> {
    let mut mesh = rectangle_mesh(0.0, 3.0, 0.0, 1.0, nx, ny)?;
    retag_cantilever(&mut mesh);
    Ok(mesh)
}

/// Re-applies cantilever tags after refinement.
pub fn retag_cantilever(mesh: &mut Mesh) {
    for e in mesh.boundary_edges.iter_mut() {
        let (p, q) = (mesh.vertices[e.vertices[0]], mesh.vertices[e.vertices[1]]);
        if e.tag == BoundaryTag::Left {
            e.tag = BoundaryTag::Fixed;
        } else if matches!(e.tag, BoundaryTag::Right | BoundaryTag::Load) {
            let (lo, hi) = (p[1].min(q[1]), p[1].max(q[1]));
            e.tag = if hi > LOAD_SEGMENT.0 && lo < LOAD_SEGMENT.1 { BoundaryTag::Load } else { BoundaryTag::Right };
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn square_counts() {
        for (n, nv, nc) in [(1, 4, 2), (2, 9, 8), (4, 25, 32)] {
            let m = unit_square_mesh(n).unwrap();
            assert_eq!((m.n_vertices(), m.n_cells()), (nv, nc));
            assert_abs_diff_eq!(m.h(), 2.0 * 2f64.sqrt() / n as f64, epsilon = 1e-14);
            assert_abs_diff_eq!(m.area(), 4.0, epsilon = 1e-13);
        }
        assert!(unit_square_mesh(0).is_err());
    }

    #[test]
    fn refinement_counts_and_nesting() {
        let m = unit_square_mesh(1).unwrap();
        let r = m.refine_uniform();
        assert_eq!(r.n_cells(), 8);
        assert_abs_diff_eq!(r.h(), 0.5 * m.h(), epsilon = 1e-14);
        assert_eq!(unit_square_mesh(2).unwrap().refined(2).n_cells(), 128);
        for (i, p) in m.vertices.iter().enumerate() {
            assert_eq!(*p, r.vertices[i]);
        }
        assert_abs_diff_eq!(r.min_angle(), m.min_angle(), epsilon = 1e-12);
    }

    #[test]
    fn boundary_edges_belong_to_one_cell_and_close() {
        let m = unit_square_mesh(3).unwrap().refine_uniform();
        let mut degree = vec![0usize; m.n_vertices()];
        for e in &m.boundary_edges {
            degree[e.vertices[0]] += 1;
            degree[e.vertices[1]] += 1;
            let owners = m.cells.iter().filter(|c| c.contains(&e.vertices[0]) && c.contains(&e.vertices[1])).count();
            assert_eq!(owners, 1);
        }
        assert!(degree.iter().all(|&d| d == 0 || d == 2));
        assert_eq!(m.boundary_edges.len(), 4 * 6);
    }

    #[test]
    fn disk_boundary_on_circle() {
        let m0 = disk_mesh(0);
        let on_circle = m0.boundary_vertices();
        assert_eq!((on_circle.len(), m0.n_cells()), (4, 12));
        for &v in &on_circle {
            let p = m0.vertices[v];
            assert_abs_diff_eq!(p[0].hypot(p[1]), 1.0, epsilon = 1e-14);
        }
        let m5 = disk_mesh(5);
        for p in &m5.vertices {
            assert!(p[0].hypot(p[1]) <= 1.0 + 1e-14);
        }
        let pi = std::f64::consts::PI;
        assert!((m5.area() - pi).abs() / pi < 3e-3);
        assert!(m5.cells.iter().enumerate().all(|(c, _)| m5.geometry(c).area > 0.0));
        assert!(m5.min_angle() > 0.2);
    }

    #[test]
    fn cantilever_tags() {
        let m = cantilever_mesh(3, 1).unwrap();
        assert_eq!((m.n_vertices(), m.n_cells()), (8, 6));
        assert_abs_diff_eq!(m.area(), 3.0, epsilon = 1e-14);
        let fine = cantilever_mesh(6, 4).unwrap();
        let left = fine.boundary_vertices_where(|t| t == BoundaryTag::Fixed);
        assert_eq!(left.len(), 5);
        assert!(!fine.boundary_vertices_where(|t| t == BoundaryTag::Load).is_empty());
    }
}
