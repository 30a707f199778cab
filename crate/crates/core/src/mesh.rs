//! Structured triangulations of the unit square.
//!
//! Vertex `(i, j)` sits at `(i/n, j/n)` with global index `j (n+1) + i`.
//! Each grid cell is split along its lower-left to upper-right diagonal.
//! Triangles are stored counter-clockwise with the right-angle vertex first.

use std::collections::HashMap;

use crate::error::{Error, Result};

pub type Point = [f64; 2];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundaryTag {
    /// The top edge `y = 1`, where the trace modes live.
    Top,
    Other,
}

#[derive(Clone, Debug)]
pub struct InteriorFace {
    pub vertices: [usize; 2],
    pub left: usize,
    pub right: usize,
    /// Unit normal pointing from `left` into `right`.
    pub normal: Point,
}

#[derive(Clone, Debug)]
pub struct BoundaryEdge {
    pub vertices: [usize; 2],
    pub element: usize,
    pub tag: BoundaryTag,
}

/// Handle to either kind of mesh edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EdgeId {
    Interior(usize),
    Boundary(usize),
}

#[derive(Clone, Debug)]
pub struct Mesh {
    pub n: usize,
    pub vertices: Vec<Point>,
    pub triangles: Vec<[usize; 3]>,
    pub interior_faces: Vec<InteriorFace>,
    pub boundary_edges: Vec<BoundaryEdge>,
    pub omega_flags: Vec<bool>,
}

/// The data region: a band touching the left, bottom and right sides.
pub fn in_omega(p: Point) -> bool {
    p[0] < 0.1 || p[0] > 0.9 || p[1] < 0.25
}

pub fn build_structured_mesh(n: usize) -> Result<Mesh> {
    if n < 2 {
        return Err(Error::invalid(format!(
            "mesh needs at least 2 subdivisions per side, got {n}"
        )));
    }
    let np = n + 1;
    let vid = |i: usize, j: usize| j * np + i;

    let mut vertices = Vec::with_capacity(np * np);
    for j in 0..np {
        for i in 0..np {
            vertices.push([i as f64 / n as f64, j as f64 / n as f64]);
        }
    }

    let mut triangles = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let (v00, v10, v11, v01) = (vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1));
            triangles.push([v10, v11, v00]);
            triangles.push([v01, v00, v11]);
        }
    }

    // Edge -> adjacent elements, in first-seen order for reproducibility.
    let mut edge_slots: HashMap<(usize, usize), usize> = HashMap::new();
    let mut edges: Vec<((usize, usize), Vec<usize>)> = Vec::new();
    for (t, tri) in triangles.iter().enumerate() {
        for k in 0..3 {
            let (a, b) = (tri[k], tri[(k + 1) % 3]);
            let key = (a.min(b), a.max(b));
            let slot = *edge_slots.entry(key).or_insert_with(|| {
                edges.push((key, Vec::new()));
                edges.len() - 1
            });
            edges[slot].1.push(t);
        }
    }

    let mut interior_faces = Vec::new();
    let mut boundary_edges = Vec::new();
    for ((a, b), elems) in edges {
        match elems.as_slice() {
            [left, right] => {
                let (pa, pb) = (vertices[a], vertices[b]);
                let len = ((pb[0] - pa[0]).powi(2) + (pb[1] - pa[1]).powi(2)).sqrt();
                let mut normal = [(pb[1] - pa[1]) / len, -(pb[0] - pa[0]) / len];
                let c = barycenter(&vertices, &triangles[*left]);
                if normal[0] * (c[0] - pa[0]) + normal[1] * (c[1] - pa[1]) > 0.0 {
                    normal = [-normal[0], -normal[1]];
                }
                interior_faces.push(InteriorFace {
                    vertices: [a, b],
                    left: *left,
                    right: *right,
                    normal,
                });
            }
            [element] => {
                let top = vertices[a][1] == 1.0 && vertices[b][1] == 1.0;
                boundary_edges.push(BoundaryEdge {
                    vertices: [a, b],
                    element: *element,
                    tag: if top { BoundaryTag::Top } else { BoundaryTag::Other },
                });
            }
            _ => unreachable!("edge shared by more than two triangles"),
        }
    }

    let mut mesh = Mesh {
        n,
        vertices,
        triangles,
        interior_faces,
        boundary_edges,
        omega_flags: Vec::new(),
    };
    mesh.omega_flags = classify_omega(&mesh);
    Ok(mesh)
}

/// Flags each triangle whose barycenter lies in the data region.
///
/// Exact (elements fully inside or outside) when `n` is a multiple of 20.
pub fn classify_omega(mesh: &Mesh) -> Vec<bool> {
    mesh.triangles
        .iter()
        .map(|t| in_omega(barycenter(&mesh.vertices, t)))
        .collect()
}

fn barycenter(vertices: &[Point], tri: &[usize; 3]) -> Point {
    let [a, b, c] = tri.map(|v| vertices[v]);
    [(a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0]
}

impl Mesh {
    /// Maximum element diameter, `√2 / n`.
    pub fn h(&self) -> f64 {
        std::f64::consts::SQRT_2 / self.n as f64
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn triangle_points(&self, t: usize) -> [Point; 3] {
        self.triangles[t].map(|v| self.vertices[v])
    }

    pub fn barycenter(&self, t: usize) -> Point {
        barycenter(&self.vertices, &self.triangles[t])
    }

    pub fn signed_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangle_points(t);
        0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
    }

    pub fn edge_points(&self, vertices: [usize; 2]) -> [Point; 2] {
        vertices.map(|v| self.vertices[v])
    }

    pub fn edge_length(&self, vertices: [usize; 2]) -> f64 {
        let [a, b] = self.edge_points(vertices);
        ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt()
    }

    /// True when the `ω` lines fall on mesh lines, so classification is exact.
    pub fn omega_is_aligned(&self) -> bool {
        self.n.is_multiple_of(20)
    }

    /// Unit tangent of a boundary edge, oriented towards increasing `x`
    /// (or increasing `y` on vertical edges). On the top edge this is `(1, 0)`.
    pub fn boundary_tangent(&self, edge: EdgeId) -> Result<Point> {
        let e = match edge {
            EdgeId::Boundary(e) => self
                .boundary_edges
                .get(e)
                .ok_or_else(|| Error::invalid(format!("boundary edge {e} out of range")))?,
            EdgeId::Interior(f) => {
                return Err(Error::invalid(format!(
                    "edge {f} is an interior face, not a boundary edge"
                )))
            }
        };
        let [a, b] = self.edge_points(e.vertices);
        let len = self.edge_length(e.vertices);
        let mut t = [(b[0] - a[0]) / len, (b[1] - a[1]) / len];
        if t[0] < 0.0 || (t[0] == 0.0 && t[1] < 0.0) {
            t = [-t[0], -t[1]];
        }
        Ok(t)
    }

    /// Boundary edge endpoints ordered along the boundary tangent.
    pub fn oriented_boundary_edge(&self, e: usize) -> [usize; 2] {
        let [a, b] = self.boundary_edges[e].vertices;
        let (pa, pb) = (self.vertices[a], self.vertices[b]);
        if pb[0] < pa[0] || (pb[0] == pa[0] && pb[1] < pa[1]) {
            [b, a]
        } else {
            [a, b]
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_match_closed_forms() {
        for n in [2usize, 4, 20, 40] {
            let m = build_structured_mesh(n).unwrap();
            assert_eq!(m.vertices.len(), (n + 1) * (n + 1));
            assert_eq!(m.triangles.len(), 2 * n * n);
            assert_eq!(m.boundary_edges.len(), 4 * n);
            assert_eq!(m.interior_faces.len(), 3 * n * n - 2 * n);
        }
        let m = build_structured_mesh(2).unwrap();
        assert_eq!(
            (m.vertices.len(), m.triangles.len(), m.boundary_edges.len(), m.interior_faces.len()),
            (9, 8, 8, 8)
        );
    }

    #[test]
    fn rejects_degenerate_sizes() {
        assert!(matches!(build_structured_mesh(1), Err(Error::InvalidArgument(_))));
        assert!(build_structured_mesh(0).is_err());
    }

    #[test]
    fn uniform_positive_areas() {
        let m = build_structured_mesh(20).unwrap();
        assert!((m.h() - 2f64.sqrt() / 20.0).abs() < 1e-16);
        // Compensated sum so the check measures the areas, not the adder.
        let (mut total, mut carry) = (0.0f64, 0.0f64);
        for t in 0..m.triangles.len() {
            let a = m.signed_area(t);
            assert!((a - 1.0 / 800.0).abs() < 1e-16);
            let s = total + a;
            carry += if total.abs() >= a.abs() { (total - s) + a } else { (a - s) + total };
            total = s;
        }
        let total = total + carry;
        assert!((total - 1.0).abs() < 1e-14, "{total}");
    }

    #[test]
    fn interior_faces_are_consistent() {
        let m = build_structured_mesh(4).unwrap();
        let mut seen = std::collections::HashSet::new();
        for f in &m.interior_faces {
            let key = (f.vertices[0].min(f.vertices[1]), f.vertices[0].max(f.vertices[1]));
            assert!(seen.insert(key), "face listed twice");
            assert_ne!(f.left, f.right);
            for e in [f.left, f.right] {
                assert!(f.vertices.iter().all(|v| m.triangles[e].contains(v)));
            }
            let norm = (f.normal[0].powi(2) + f.normal[1].powi(2)).sqrt();
            assert!((norm - 1.0).abs() < 1e-14);
            let (cl, cr) = (m.barycenter(f.left), m.barycenter(f.right));
            let d = [cr[0] - cl[0], cr[1] - cl[1]];
            assert!(d[0] * f.normal[0] + d[1] * f.normal[1] > 0.0);
        }
    }

    #[test]
    fn top_tags() {
        let m = build_structured_mesh(4).unwrap();
        for e in &m.boundary_edges {
            let [a, b] = m.edge_points(e.vertices);
            assert_eq!(e.tag == BoundaryTag::Top, a[1] == 1.0 && b[1] == 1.0);
        }
        let top = m.boundary_edges.iter().filter(|e| e.tag == BoundaryTag::Top).count();
        assert_eq!(top, 4);
    }

    #[test]
    fn omega_area_is_exact_on_aligned_meshes() {
        for n in [20usize, 40] {
            let m = build_structured_mesh(n).unwrap();
            let area: f64 = (0..m.triangles.len())
                .filter(|&t| m.omega_flags[t])
                .map(|t| m.signed_area(t))
                .sum();
            assert!((area - 0.4).abs() < 1e-14, "n={n}: {area}");
        }
        let m = build_structured_mesh(20).unwrap();
        let t = (0..m.triangles.len())
            .find(|&t| {
                let c = m.barycenter(t);
                (c[0] - 0.5).abs() < 0.03 && (c[1] - 0.5).abs() < 0.03
            })
            .unwrap();
        assert!(!m.omega_flags[t]);
    }

    #[test]
    fn tangents() {
        let m = build_structured_mesh(20).unwrap();
        let find = |p: Point, q: Point| {
            m.boundary_edges
                .iter()
                .position(|e| {
                    let [a, b] = m.edge_points(e.vertices);
                    let close = |u: Point, v: Point| (u[0] - v[0]).abs() < 1e-12 && (u[1] - v[1]).abs() < 1e-12;
                    (close(a, p) && close(b, q)) || (close(a, q) && close(b, p))
                })
                .unwrap()
        };
        let top = find([0.5, 1.0], [0.55, 1.0]);
        assert_eq!(m.boundary_tangent(EdgeId::Boundary(top)).unwrap(), [1.0, 0.0]);
        let left = find([0.0, 0.0], [0.0, 0.05]);
        assert_eq!(m.boundary_tangent(EdgeId::Boundary(left)).unwrap(), [0.0, 1.0]);
        assert!(m.boundary_tangent(EdgeId::Interior(0)).is_err());
    }
}
