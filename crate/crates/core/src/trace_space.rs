//! The finite-dimensional space of admissible Dirichlet traces.

use faer::Mat;

use crate::fe_space::DofMap;
use crate::mesh::{BoundaryTag, Mesh, Point};
use crate::quadrature::EdgeRule;
use crate::sparse::{SparseMatrix, TripletBuilder};

/// A finite family of boundary modes. Tangential derivatives are taken along
/// [`Mesh::boundary_tangent`].
pub trait TraceModes: Sync {
    fn dim(&self) -> usize;

    /// Whether any mode is nonzero on edges with this tag.
    fn supported_on(&self, tag: BoundaryTag) -> bool;

    fn value(&self, mode: usize, p: Point, tag: BoundaryTag) -> f64;

    fn tangential_derivative(&self, mode: usize, p: Point, tag: BoundaryTag) -> f64;

    /// `Σ coeffs[k] φ_k(p)`
    fn combination(&self, coeffs: &[f64], p: Point, tag: BoundaryTag) -> f64 {
        coeffs.iter().enumerate().map(|(k, c)| c * self.value(k, p, tag)).sum()
    }

    fn combination_derivative(&self, coeffs: &[f64], p: Point, tag: BoundaryTag) -> f64 {
        coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| c * self.tangential_derivative(k, p, tag))
            .sum()
    }
}

/// `φ_k = √2 sin(kπx)` on the top edge, zero on the rest of the boundary,
/// for `k = 1..=modes`.
#[derive(Clone, Copy, Debug)]
pub struct SineTraceBasis {
    pub modes: usize,
}

impl SineTraceBasis {
    pub fn new(modes: usize) -> Self {
        Self { modes }
    }
}

impl TraceModes for SineTraceBasis {
    fn dim(&self) -> usize {
        self.modes
    }

    fn supported_on(&self, tag: BoundaryTag) -> bool {
        tag == BoundaryTag::Top
    }

    fn value(&self, mode: usize, p: Point, tag: BoundaryTag) -> f64 {
        match tag {
            BoundaryTag::Top => {
                let k = (mode + 1) as f64;
                std::f64::consts::SQRT_2 * (k * std::f64::consts::PI * p[0]).sin()
            }
            BoundaryTag::Other => 0.0,
        }
    }

    fn tangential_derivative(&self, mode: usize, p: Point, tag: BoundaryTag) -> f64 {
        match tag {
            BoundaryTag::Top => {
                let kpi = (mode + 1) as f64 * std::f64::consts::PI;
                std::f64::consts::SQRT_2 * kpi * (kpi * p[0]).cos()
            }
            BoundaryTag::Other => 0.0,
        }
    }
}

/// Boundary mass and tangential-stiffness Gram matrices of the modes.
pub fn gram_matrices(basis: &dyn TraceModes, mesh: &Mesh, rule: &EdgeRule) -> (Mat<f64>, Mat<f64>) {
    let dim = basis.dim();
    let mut mass = Mat::<f64>::zeros(dim, dim);
    let mut stiff = Mat::<f64>::zeros(dim, dim);
    for (e, edge) in mesh.boundary_edges.iter().enumerate() {
        if !basis.supported_on(edge.tag) {
            continue;
        }
        let [a, b] = mesh.edge_points(mesh.oriented_boundary_edge(e));
        for (p, _, w) in rule.mapped(a, b) {
            let vals: Vec<f64> = (0..dim).map(|k| basis.value(k, p, edge.tag)).collect();
            let ders: Vec<f64> = (0..dim).map(|k| basis.tangential_derivative(k, p, edge.tag)).collect();
            for i in 0..dim {
                for j in 0..dim {
                    mass[(i, j)] += w * vals[i] * vals[j];
                    stiff[(i, j)] += w * ders[i] * ders[j];
                }
            }
        }
    }
    (mass, stiff)
}

/// Couplings `C_M[i,k] = ∫ ψ_i φ_k` and `C_K[i,k] = ∫ ψ_i' φ_k'` over the
/// boundary, as `num_dofs × dim` sparse matrices.
pub fn coupling_blocks(
    basis: &dyn TraceModes,
    dofmap: &DofMap,
    mesh: &Mesh,
    rule: &EdgeRule,
) -> (SparseMatrix, SparseMatrix) {
    let dim = basis.dim();
    let mut cm = TripletBuilder::new(dofmap.num_dofs, dim);
    let mut ck = TripletBuilder::new(dofmap.num_dofs, dim);
    for (e, edge) in mesh.boundary_edges.iter().enumerate() {
        if !basis.supported_on(edge.tag) {
            continue;
        }
        let [va, vb] = mesh.oriented_boundary_edge(e);
        let [a, b] = mesh.edge_points([va, vb]);
        let len = mesh.edge_length([va, vb]);
        let mut local_m = vec![[0.0; 2]; dim];
        let mut local_k = vec![[0.0; 2]; dim];
        for (p, t, w) in rule.mapped(a, b) {
            let hats = [1.0 - t, t];
            let hat_ders = [-1.0 / len, 1.0 / len];
            for k in 0..dim {
                let phi = basis.value(k, p, edge.tag);
                let dphi = basis.tangential_derivative(k, p, edge.tag);
                for l in 0..2 {
                    local_m[k][l] += w * hats[l] * phi;
                    local_k[k][l] += w * hat_ders[l] * dphi;
                }
            }
        }
        for k in 0..dim {
            for (l, v) in [va, vb].into_iter().enumerate() {
                cm.push(v, k, local_m[k][l]);
                ck.push(v, k, local_k[k][l]);
            }
        }
    }
    (cm.build(), ck.build())
}
