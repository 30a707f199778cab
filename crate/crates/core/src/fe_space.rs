//! Continuous piecewise-linear Lagrange space on a [`Mesh`].

use crate::field::{ExactField, ScalarField};
use crate::mesh::{Mesh, Point};
use crate::quadrature::TriangleRule;

/// Vertex-based degrees of freedom, with the boundary / interior split that
/// defines the homogeneous subspace.
#[derive(Clone, Debug)]
pub struct DofMap {
    pub num_dofs: usize,
    pub boundary: Vec<usize>,
    pub interior: Vec<usize>,
    /// Global DOF -> position in `interior`, `None` on the boundary.
    pub interior_index: Vec<Option<usize>>,
    pub cells: Vec<[usize; 3]>,
}

impl DofMap {
    pub fn new(mesh: &Mesh) -> Self {
        let num_dofs = mesh.num_vertices();
        let mut boundary = Vec::new();
        let mut interior = Vec::new();
        let mut interior_index = vec![None; num_dofs];
        for (v, p) in mesh.vertices.iter().enumerate() {
            let on_boundary = p[0] == 0.0 || p[0] == 1.0 || p[1] == 0.0 || p[1] == 1.0;
            if on_boundary {
                boundary.push(v);
            } else {
                interior_index[v] = Some(interior.len());
                interior.push(v);
            }
        }
        Self {
            num_dofs,
            boundary,
            interior,
            interior_index,
            cells: mesh.triangles.clone(),
        }
    }

    pub fn num_interior(&self) -> usize {
        self.interior.len()
    }

    pub fn is_boundary(&self, dof: usize) -> bool {
        self.interior_index[dof].is_none()
    }

    /// Extends a vector over interior DOFs by zeros on the boundary.
    pub fn extend_interior(&self, interior_values: &[f64]) -> Vec<f64> {
        let mut full = vec![0.0; self.num_dofs];
        for (k, &v) in self.interior.iter().enumerate() {
            full[v] = interior_values[k];
        }
        full
    }

    pub fn restrict_interior(&self, full: &[f64]) -> Vec<f64> {
        self.interior.iter().map(|&v| full[v]).collect()
    }
}

/// Area and constant hat-function gradients of one triangle.
#[derive(Clone, Copy, Debug)]
pub struct ElementGeometry {
    pub area: f64,
    pub grads: [[f64; 2]; 3],
}

impl ElementGeometry {
    pub fn new(p: &[Point; 3]) -> Self {
        let det = (p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]);
        let mut grads = [[0.0; 2]; 3];
        for k in 0..3 {
            let (a, b) = (p[(k + 1) % 3], p[(k + 2) % 3]);
            grads[k] = [(a[1] - b[1]) / det, (b[0] - a[0]) / det];
        }
        Self {
            area: 0.5 * det.abs(),
            grads,
        }
    }

    pub fn of(mesh: &Mesh, t: usize) -> Self {
        Self::new(&mesh.triangle_points(t))
    }
}

/// Barycentric coordinates of `x` with respect to triangle `p`.
pub fn barycentric(p: &[Point; 3], x: Point) -> [f64; 3] {
    let det = (p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]);
    let l1 = ((x[0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (x[1] - p[0][1])) / det;
    let l2 = ((p[1][0] - p[0][0]) * (x[1] - p[0][1]) - (x[0] - p[0][0]) * (p[1][1] - p[0][1])) / det;
    [1.0 - l1 - l2, l1, l2]
}

#[derive(Clone, Debug, PartialEq)]
pub struct FeFunction {
    pub coefficients: Vec<f64>,
}

impl FeFunction {
    pub fn zeros(num_dofs: usize) -> Self {
        Self {
            coefficients: vec![0.0; num_dofs],
        }
    }

    pub fn from_coefficients(coefficients: Vec<f64>) -> Self {
        Self { coefficients }
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    pub fn value_at(&self, mesh: &Mesh, t: usize, bary: [f64; 3]) -> f64 {
        let tri = mesh.triangles[t];
        (0..3).map(|k| bary[k] * self.coefficients[tri[k]]).sum()
    }
}

/// Nodal interpolant.
pub fn interpolate(mesh: &Mesh, g: &dyn ScalarField) -> FeFunction {
    FeFunction {
        coefficients: mesh.vertices.iter().map(|p| g.value(p[0], p[1])).collect(),
    }
}

/// Constant gradient of `u` on triangle `t`.
pub fn element_gradient(mesh: &Mesh, u: &FeFunction, t: usize) -> [f64; 2] {
    let geo = ElementGeometry::of(mesh, t);
    let tri = mesh.triangles[t];
    let mut g = [0.0; 2];
    for (&v, grad) in tri.iter().zip(&geo.grads) {
        g[0] += u.coefficients[v] * grad[0];
        g[1] += u.coefficients[v] * grad[1];
    }
    g
}

/// Anything that can be sampled element by element: discrete functions and
/// differences between an exact field and a discrete one.
pub trait ElementwiseField: Sync {
    fn value(&self, mesh: &Mesh, t: usize, x: Point, bary: [f64; 3]) -> f64;
    fn gradient(&self, mesh: &Mesh, t: usize, x: Point, bary: [f64; 3]) -> [f64; 2];

    /// Elementwise Laplacian; zero for piecewise-linear functions.
    fn laplacian(&self, mesh: &Mesh, t: usize, x: Point, bary: [f64; 3]) -> f64;
}

impl ElementwiseField for FeFunction {
    fn value(&self, mesh: &Mesh, t: usize, _x: Point, bary: [f64; 3]) -> f64 {
        self.value_at(mesh, t, bary)
    }

    fn gradient(&self, mesh: &Mesh, t: usize, _x: Point, _bary: [f64; 3]) -> [f64; 2] {
        element_gradient(mesh, self, t)
    }

    fn laplacian(&self, _mesh: &Mesh, _t: usize, _x: Point, _bary: [f64; 3]) -> f64 {
        0.0
    }
}

/// `exact − discrete`.
pub struct Difference<'a, E: ?Sized> {
    pub exact: &'a E,
    pub discrete: &'a FeFunction,
}

impl<E: ExactField + ?Sized> ElementwiseField for Difference<'_, E> {
    fn value(&self, mesh: &Mesh, t: usize, x: Point, bary: [f64; 3]) -> f64 {
        self.exact.value(x[0], x[1]) - self.discrete.value_at(mesh, t, bary)
    }

    fn gradient(&self, mesh: &Mesh, t: usize, x: Point, _bary: [f64; 3]) -> [f64; 2] {
        let ge = self.exact.gradient(x[0], x[1]);
        let gh = element_gradient(mesh, self.discrete, t);
        [ge[0] - gh[0], ge[1] - gh[1]]
    }

    fn laplacian(&self, _mesh: &Mesh, _t: usize, x: Point, _bary: [f64; 3]) -> f64 {
        let hs = self.exact.hessian(x[0], x[1]);
        hs[0][0] + hs[1][1]
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorNorms {
    pub l2: f64,
    pub h1_seminorm: f64,
    pub h1: f64,
}

/// L², H¹-seminorm and H¹ norms of `u_exact − u_h` by elementwise quadrature.
pub fn error_norms(
    mesh: &Mesh,
    u_exact: &dyn ExactField,
    u_h: &FeFunction,
    rule: &TriangleRule,
) -> ErrorNorms {
    let diff = Difference {
        exact: u_exact,
        discrete: u_h,
    };
    let (mut l2_sq, mut semi_sq) = (0.0, 0.0);
    for t in 0..mesh.triangles.len() {
        let tri = mesh.triangle_points(t);
        for (x, bary, w) in rule.mapped(&tri) {
            let e = diff.value(mesh, t, x, bary);
            let g = diff.gradient(mesh, t, x, bary);
            l2_sq += w * e * e;
            semi_sq += w * (g[0] * g[0] + g[1] * g[1]);
        }
    }
    ErrorNorms {
        l2: l2_sq.sqrt(),
        h1_seminorm: semi_sq.sqrt(),
        h1: (l2_sq + semi_sq).sqrt(),
    }
}

/// Squared contributions to the H² norm of an exact field.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct H2Norm {
    pub l2_sq: f64,
    pub h1_seminorm_sq: f64,
    pub h2_seminorm_sq: f64,
}

impl H2Norm {
    pub fn full(&self) -> f64 {
        (self.l2_sq + self.h1_seminorm_sq + self.h2_seminorm_sq).sqrt()
    }

    pub fn seminorm(&self) -> f64 {
        self.h2_seminorm_sq.sqrt()
    }
}

pub fn h2_norm(mesh: &Mesh, u: &dyn ExactField, rule: &TriangleRule) -> H2Norm {
    let mut acc = H2Norm {
        l2_sq: 0.0,
        h1_seminorm_sq: 0.0,
        h2_seminorm_sq: 0.0,
    };
    for t in 0..mesh.triangles.len() {
        for (x, _, w) in rule.mapped(&mesh.triangle_points(t)) {
            let v = u.value(x[0], x[1]);
            let g = u.gradient(x[0], x[1]);
            let hs = u.hessian(x[0], x[1]);
            acc.l2_sq += w * v * v;
            acc.h1_seminorm_sq += w * (g[0] * g[0] + g[1] * g[1]);
            acc.h2_seminorm_sq +=
                w * (hs[0][0] * hs[0][0] + hs[0][1] * hs[0][1] + hs[1][0] * hs[1][0] + hs[1][1] * hs[1][1]);
        }
    }
    acc
}
