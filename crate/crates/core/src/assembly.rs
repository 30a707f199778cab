//! Assembly of the bilinear forms and load vectors of the method.
//!
//! Unscaled operators live in [`FormMatrices`]; [`ScaledForms`] applies the
//! powers of `h` that give every term of the Lagrangian matching units.
//!
//! The jump penalty sums each interior face once. Summing over element
//! boundaries instead would visit every face twice and double `J`.

use faer::Mat;

use crate::error::{Error, Result};
use crate::fe_space::{DofMap, ElementGeometry};
use crate::field::ScalarField;
use crate::mesh::{InteriorFace, Mesh};
use crate::quadrature::{EdgeRule, TriangleRule};
use crate::sparse::{SparseMatrix, TripletBuilder};
use crate::trace_space::{coupling_blocks, gram_matrices, TraceModes};

#[derive(Clone, Debug)]
pub struct FormMatrices {
    /// `∫ ∇ψ_i · ∇ψ_j`
    pub stiffness: SparseMatrix,
    /// `∫_ω ψ_i ψ_j`
    pub omega_mass: SparseMatrix,
    /// `Σ_F h³ ∫_F [∂_ν ψ_i][∂_ν ψ_j]`, already carrying its `h³`.
    pub jump: SparseMatrix,
    /// `∫_∂Ω ψ_i ψ_j`
    pub boundary_mass: SparseMatrix,
    /// `∫_∂Ω ψ_i' ψ_j'` (tangential derivatives)
    pub boundary_stiffness: SparseMatrix,
    pub coupling_mass: SparseMatrix,
    pub coupling_stiffness: SparseMatrix,
    pub mode_mass: Mat<f64>,
    pub mode_stiffness: Mat<f64>,
    pub h: f64,
}

pub fn assemble_forms(
    mesh: &Mesh,
    dofmap: &DofMap,
    basis: &dyn TraceModes,
    edge_rule: &EdgeRule,
) -> FormMatrices {
    let (coupling_mass, coupling_stiffness) = coupling_blocks(basis, dofmap, mesh, edge_rule);
    let (mode_mass, mode_stiffness) = gram_matrices(basis, mesh, edge_rule);
    let (boundary_mass, boundary_stiffness) = assemble_boundary(mesh, dofmap);
    FormMatrices {
        stiffness: assemble_stiffness(mesh, dofmap),
        omega_mass: assemble_omega_mass(mesh, dofmap),
        jump: assemble_jump(mesh, dofmap),
        boundary_mass,
        boundary_stiffness,
        coupling_mass,
        coupling_stiffness,
        mode_mass,
        mode_stiffness,
        h: mesh.h(),
    }
}

pub fn local_stiffness(geo: &ElementGeometry) -> [[f64; 3]; 3] {
    let mut k = [[0.0; 3]; 3];
    for (row, gi) in k.iter_mut().zip(&geo.grads) {
        for (entry, gj) in row.iter_mut().zip(&geo.grads) {
            *entry = geo.area * (gi[0] * gj[0] + gi[1] * gj[1]);
        }
    }
    k
}

/// Exact P1 mass matrix: `|K|/12 (1 + δ_ij)`.
pub fn local_mass(geo: &ElementGeometry) -> [[f64; 3]; 3] {
    let mut m = [[geo.area / 12.0; 3]; 3];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = geo.area / 6.0;
    }
    m
}

pub fn assemble_stiffness(mesh: &Mesh, dofmap: &DofMap) -> SparseMatrix {
    let mut t = TripletBuilder::with_capacity(dofmap.num_dofs, dofmap.num_dofs, 9 * mesh.triangles.len());
    for (e, cell) in dofmap.cells.iter().enumerate() {
        let k = local_stiffness(&ElementGeometry::of(mesh, e));
        for i in 0..3 {
            for j in 0..3 {
                t.push(cell[i], cell[j], k[i][j]);
            }
        }
    }
    t.build()
}

pub fn assemble_omega_mass(mesh: &Mesh, dofmap: &DofMap) -> SparseMatrix {
    let mut t = TripletBuilder::new(dofmap.num_dofs, dofmap.num_dofs);
    for (e, cell) in dofmap.cells.iter().enumerate() {
        if !mesh.omega_flags[e] {
            continue;
        }
        let m = local_mass(&ElementGeometry::of(mesh, e));
        for i in 0..3 {
            for j in 0..3 {
                t.push(cell[i], cell[j], m[i][j]);
            }
        }
    }
    t.build()
}

/// Unweighted normal-derivative jump `[∂_ν u]_F` of every nodal basis function
/// touching face `F`. For continuous P1 functions the tangential gradient is
/// continuous, so the full gradient jump is the normal jump.
fn face_jumps(mesh: &Mesh, dofmap: &DofMap, face: &InteriorFace) -> Vec<(usize, f64)> {
    let nu = face.normal;
    let mut out: Vec<(usize, f64)> = Vec::with_capacity(4);
    // jump = ∂_ν u|_right − ∂_ν u|_left
    for (elem, sign) in [(face.right, 1.0), (face.left, -1.0)] {
        let geo = ElementGeometry::of(mesh, elem);
        for (k, &v) in dofmap.cells[elem].iter().enumerate() {
            let c = sign * (geo.grads[k][0] * nu[0] + geo.grads[k][1] * nu[1]);
            match out.iter_mut().find(|(d, _)| *d == v) {
                Some((_, acc)) => *acc += c,
                None => out.push((v, c)),
            }
        }
    }
    out
}

/// `G` with rows `(h³|F|)^{1/2} [∂_ν ψ_j]_F`, so that `J = GᵀG`.
pub fn jump_operator(mesh: &Mesh, dofmap: &DofMap) -> SparseMatrix {
    let h3 = mesh.h().powi(3);
    let faces = &mesh.interior_faces;
    let mut t = TripletBuilder::with_capacity(faces.len(), dofmap.num_dofs, 4 * faces.len());
    for (f, face) in faces.iter().enumerate() {
        let weight = (h3 * mesh.edge_length(face.vertices)).sqrt();
        for (v, c) in face_jumps(mesh, dofmap, face) {
            t.push(f, v, weight * c);
        }
    }
    t.build()
}

/// `Σ_F h³ ∫_F [∂_ν ψ_i][∂_ν ψ_j]`, each interior face counted once.
pub fn assemble_jump(mesh: &Mesh, dofmap: &DofMap) -> SparseMatrix {
    let h3 = mesh.h().powi(3);
    let mut t = TripletBuilder::with_capacity(dofmap.num_dofs, dofmap.num_dofs, 16 * mesh.interior_faces.len());
    for face in &mesh.interior_faces {
        let len = mesh.edge_length(face.vertices);
        let jumps = face_jumps(mesh, dofmap, face);
        for &(i, a) in &jumps {
            for &(j, b) in &jumps {
                t.push(i, j, h3 * len * a * b);
            }
        }
    }
    t.build()
}

/// `J(u) = ‖G u‖²`, free of the cancellation in `uᵀ J u`.
pub fn jump_energy(g: &SparseMatrix, u: &[f64]) -> f64 {
    g.mul_vec(u).iter().map(|v| v * v).sum()
}

/// Boundary mass and tangential stiffness of P1 traces over all of `∂Ω`.
pub fn assemble_boundary(mesh: &Mesh, dofmap: &DofMap) -> (SparseMatrix, SparseMatrix) {
    let mut m = TripletBuilder::new(dofmap.num_dofs, dofmap.num_dofs);
    let mut k = TripletBuilder::new(dofmap.num_dofs, dofmap.num_dofs);
    for edge in &mesh.boundary_edges {
        let len = mesh.edge_length(edge.vertices);
        let [a, b] = edge.vertices;
        for (i, j, mass, stiff) in [
            (a, a, len / 3.0, 1.0 / len),
            (b, b, len / 3.0, 1.0 / len),
            (a, b, len / 6.0, -1.0 / len),
            (b, a, len / 6.0, -1.0 / len),
        ] {
            m.push(i, j, mass);
            k.push(i, j, stiff);
        }
    }
    (m.build(), k.build())
}

/// `∫_region g ψ_i` for every DOF; `omega_only` restricts to flagged elements.
pub fn load_vector(
    mesh: &Mesh,
    dofmap: &DofMap,
    g: &dyn ScalarField,
    omega_only: bool,
    rule: &TriangleRule,
) -> Vec<f64> {
    let mut out = vec![0.0; dofmap.num_dofs];
    for (e, cell) in dofmap.cells.iter().enumerate() {
        if omega_only && !mesh.omega_flags[e] {
            continue;
        }
        for (x, bary, w) in rule.mapped(&mesh.triangle_points(e)) {
            let gv = g.value(x[0], x[1]);
            for k in 0..3 {
                out[cell[k]] += w * gv * bary[k];
            }
        }
    }
    out
}

/// Right-hand sides of the three block equations.
#[derive(Clone, Debug, PartialEq)]
pub struct DataRhs {
    /// `h² (q, ψ_i)_ω` over all DOFs.
    pub u: Vec<f64>,
    /// Zero: the trace equation is homogeneous.
    pub y: Vec<f64>,
    /// `h² (f, ψ_i)` over interior DOFs.
    pub z: Vec<f64>,
}

impl DataRhs {
    pub fn scaled(&self, s: f64) -> Self {
        let sc = |v: &[f64]| v.iter().map(|x| s * x).collect();
        Self {
            u: sc(&self.u),
            y: sc(&self.y),
            z: sc(&self.z),
        }
    }
}

/// The `h²(f, h²Δv)` residual term is identically zero for P1 and omitted.
pub fn assemble_rhs(
    mesh: &Mesh,
    dofmap: &DofMap,
    q: &dyn ScalarField,
    f: &dyn ScalarField,
    modes: usize,
    rule: &TriangleRule,
) -> DataRhs {
    let h2 = mesh.h().powi(2);
    let u = load_vector(mesh, dofmap, q, true, rule)
        .into_iter()
        .map(|v| h2 * v)
        .collect();
    let full_f = load_vector(mesh, dofmap, f, false, rule);
    let z = dofmap.interior.iter().map(|&v| h2 * full_f[v]).collect();
    DataRhs {
        u,
        y: vec![0.0; modes],
        z,
    }
}

/// Scaled blocks entering the saddle-point system.
#[derive(Clone, Debug)]
pub struct ScaledForms {
    pub h: f64,
    pub gamma: f64,
    /// `h² K`
    pub a: SparseMatrix,
    /// `h² M_ω`
    pub d_omega: SparseMatrix,
    /// `γ J`
    pub s: SparseMatrix,
    /// `h M_∂ + h³ K_∂`
    pub b_uu: SparseMatrix,
    /// `−(h C_M + h³ C_K)`
    pub b_uy: SparseMatrix,
    /// `h M_N + h³ K_N`
    pub b_yy: Mat<f64>,
}

impl ScaledForms {
    pub fn new(forms: &FormMatrices, gamma: f64) -> Result<Self> {
        if !(gamma >= 0.0 && gamma.is_finite()) {
            return Err(Error::invalid(format!("stabilizer scale must be >= 0, got {gamma}")));
        }
        let h = forms.h;
        let h3 = h.powi(3);
        let b_yy = Mat::from_fn(forms.mode_mass.nrows(), forms.mode_mass.ncols(), |i, j| {
            h * forms.mode_mass[(i, j)] + h3 * forms.mode_stiffness[(i, j)]
        });
        Ok(Self {
            h,
            gamma,
            a: forms.stiffness.scaled(h * h),
            d_omega: forms.omega_mass.scaled(h * h),
            s: forms.jump.scaled(gamma),
            b_uu: SparseMatrix::linear_combination(&[
                (h, &forms.boundary_mass),
                (h3, &forms.boundary_stiffness),
            ])?,
            b_uy: SparseMatrix::linear_combination(&[
                (-h, &forms.coupling_mass),
                (-h3, &forms.coupling_stiffness),
            ])?,
            b_yy,
        })
    }

    pub fn num_modes(&self) -> usize {
        self.b_yy.nrows()
    }

    /// Trace coefficients minimizing `B(u, ·)`: solves `B_yy y = −B_uyᵀ u`.
    pub fn trace_projection(&self, u: &[f64]) -> Vec<f64> {
        let rhs = self.b_uy.transpose_mul_vec(u);
        let dim = self.num_modes();
        if dim == 0 {
            return Vec::new();
        }
        let b = Mat::from_fn(dim, 1, |i, _| -rhs[i]);
        let llt = self
            .b_yy
            .llt(faer::Side::Lower)
            .expect("trace Gram block is symmetric positive definite");
        let x = faer::linalg::solvers::Solve::solve(&llt, &b);
        (0..dim).map(|i| x[(i, 0)]).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fe_space::{interpolate, FeFunction};
    use crate::field::Affine;
    use crate::mesh::build_structured_mesh;

    #[test]
    fn local_stiffness_of_right_triangle() {
        let n = 5.0;
        let p = [[1.0 / n, 0.0], [1.0 / n, 1.0 / n], [0.0, 0.0]];
        let k = local_stiffness(&ElementGeometry::new(&p));
        let expected = [[1.0, -0.5, -0.5], [-0.5, 0.5, 0.0], [-0.5, 0.0, 0.5]];
        for i in 0..3 {
            for j in 0..3 {
                assert!((k[i][j] - expected[i][j]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn stiffness_kernel_and_energy() {
        for n in [4usize, 20] {
            let mesh = build_structured_mesh(n).unwrap();
            let dofs = DofMap::new(&mesh);
            let k = assemble_stiffness(&mesh, &dofs);
            assert!(k.symmetry_defect() <= 1e-12 * k.max_abs());
            assert!(k.row_sums().iter().all(|s| s.abs() < 1e-13));
            let x = interpolate(&mesh, &Affine { a: 1.0, b: 0.0, c: 0.0 });
            assert!((k.quadratic_form(&x.coefficients) - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn omega_mass_properties() {
        let mesh = build_structured_mesh(20).unwrap();
        let dofs = DofMap::new(&mesh);
        let m = assemble_omega_mass(&mesh, &dofs);
        assert_eq!(m.symmetry_defect(), 0.0);
        let ones = vec![1.0; dofs.num_dofs];
        assert!((m.quadratic_form(&ones) - 0.4).abs() < 1e-14);
        // (0.5, 0.5) is well outside ω.
        let v = 10 * 21 + 10;
        assert!(m.row(v).all(|(_, x)| x == 0.0));
    }

    #[test]
    fn jump_vanishes_on_affines() {
        for n in [4usize, 20] {
            let mesh = build_structured_mesh(n).unwrap();
            let dofs = DofMap::new(&mesh);
            let j = assemble_jump(&mesh, &dofs);
            assert!(j.symmetry_defect() <= 1e-12 * j.max_abs());
            assert!(j.row_sums().iter().all(|s| s.abs() < 1e-14));
            let u = interpolate(&mesh, &Affine { a: -2.0, b: 0.7, c: 3.0 });
            assert!(j.quadratic_form(&u.coefficients).abs() <= 1e-14);
            assert!(jump_energy(&jump_operator(&mesh, &dofs), &u.coefficients) <= 1e-14);
        }
    }

    #[test]
    fn boundary_blocks_are_consistent() {
        let mesh = build_structured_mesh(4).unwrap();
        let dofs = DofMap::new(&mesh);
        let (m, k) = assemble_boundary(&mesh, &dofs);
        let ones = vec![1.0; dofs.num_dofs];
        assert!((m.quadratic_form(&ones) - 4.0).abs() < 1e-14);
        assert!(k.quadratic_form(&ones).abs() < 1e-13);
        let mut interior_only = FeFunction::zeros(dofs.num_dofs);
        interior_only.coefficients[dofs.interior[0]] = 1.0;
        assert_eq!(m.quadratic_form(&interior_only.coefficients), 0.0);
    }

    #[test]
    fn rhs_partition_of_unity() {
        let mesh = build_structured_mesh(20).unwrap();
        let dofs = DofMap::new(&mesh);
        let rule = TriangleRule::degree4();
        let h2 = mesh.h().powi(2);
        let zero = |_: f64, _: f64| 0.0;
        let one = |_: f64, _: f64| 1.0;
        let r = assemble_rhs(&mesh, &dofs, &zero, &zero, 5, &rule);
        assert!(r.u.iter().chain(&r.y).chain(&r.z).all(|&v| v == 0.0));
        let r = assemble_rhs(&mesh, &dofs, &one, &zero, 5, &rule);
        assert!((r.u.iter().sum::<f64>() - h2 * 0.4).abs() < 1e-15);
        let r = assemble_rhs(&mesh, &dofs, &zero, &one, 5, &rule);
        let full: f64 = load_vector(&mesh, &dofs, &one, false, &rule).iter().sum();
        assert!((h2 * full - h2).abs() < 1e-15);
        assert!(r.z.iter().sum::<f64>() < h2);
    }

    #[test]
    fn negative_gamma_rejected() {
        let mesh = build_structured_mesh(4).unwrap();
        let dofs = DofMap::new(&mesh);
        let forms = assemble_forms(&mesh, &dofs, &crate::SineTraceBasis::new(2), &EdgeRule::default());
        assert!(ScaledForms::new(&forms, -1.0).is_err());
        let s = ScaledForms::new(&forms, 0.0).unwrap();
        assert_eq!(s.s.max_abs(), 0.0);
    }
}
