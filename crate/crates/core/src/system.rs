//! The symmetric saddle-point system in `(u, y, z) ∈ V_h × 𝒱_N × V_h0`.
//!
//! Block rows, in unknown order `u | y | z`:
//!
//! ```text
//! [ B_uu + D_ω + S   B_uy   A_zuᵀ ] [u]   [h²(q,·)_ω]
//! [ B_uyᵀ            B_yy   0     ] [y] = [0        ]
//! [ A_zu             0      0     ] [z]   [h²(f,·)  ]
//! ```
//!
//! `A_zu` is the scaled stiffness restricted to interior rows. The trace
//! unknowns stay in the system rather than being eliminated.

use std::path::Path;

use faer::linalg::solvers::Solve;
use faer::Mat;

use crate::assembly::{DataRhs, ScaledForms};
use crate::error::{Error, Result};
use crate::fe_space::{DofMap, FeFunction};
use crate::sparse::{SparseMatrix, TripletBuilder};

/// Relative residual accepted from the direct solve.
pub const RESIDUAL_TOLERANCE: f64 = 1e-10;

const MAX_REFINEMENT_STEPS: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BlockLayout {
    pub num_u: usize,
    pub num_y: usize,
    pub num_z: usize,
}

impl BlockLayout {
    pub fn dim(&self) -> usize {
        self.num_u + self.num_y + self.num_z
    }

    pub fn y_offset(&self) -> usize {
        self.num_u
    }

    pub fn z_offset(&self) -> usize {
        self.num_u + self.num_y
    }

    pub fn split<'a>(&self, x: &'a [f64]) -> (&'a [f64], &'a [f64], &'a [f64]) {
        let (u, rest) = x.split_at(self.num_u);
        let (y, z) = rest.split_at(self.num_y);
        (u, y, z)
    }
}

#[derive(Clone, Debug)]
pub struct BlockSystem {
    pub matrix: SparseMatrix,
    pub rhs: Vec<f64>,
    pub layout: BlockLayout,
    pub interior: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct Solution {
    pub u: FeFunction,
    /// Mode coefficients of the trace unknown.
    pub y: Vec<f64>,
    /// Dual variable, zero on the boundary.
    pub z: FeFunction,
    pub relative_residual: f64,
}

fn check_len(what: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { what, expected, found })
    }
}

pub fn build_system(scaled: &ScaledForms, rhs: &DataRhs, dofmap: &DofMap) -> Result<BlockSystem> {
    let layout = BlockLayout {
        num_u: dofmap.num_dofs,
        num_y: scaled.num_modes(),
        num_z: dofmap.num_interior(),
    };
    for (what, m) in [
        ("stiffness block", &scaled.a),
        ("omega mass block", &scaled.d_omega),
        ("stabilizer block", &scaled.s),
        ("boundary block", &scaled.b_uu),
    ] {
        check_len(what, layout.num_u, m.nrows())?;
        check_len(what, layout.num_u, m.ncols())?;
    }
    check_len("trace coupling rows", layout.num_u, scaled.b_uy.nrows())?;
    check_len("trace coupling columns", layout.num_y, scaled.b_uy.ncols())?;
    check_len("trace Gram columns", layout.num_y, scaled.b_yy.ncols())?;
    check_len("u right-hand side", layout.num_u, rhs.u.len())?;
    check_len("y right-hand side", layout.num_y, rhs.y.len())?;
    check_len("z right-hand side", layout.num_z, rhs.z.len())?;

    let (yo, zo) = (layout.y_offset(), layout.z_offset());
    let nnz_guess = 3 * scaled.a.nnz() + scaled.b_uu.nnz() + 2 * scaled.b_uy.nnz();
    let mut t = TripletBuilder::with_capacity(layout.dim(), layout.dim(), nnz_guess);
    let uu = SparseMatrix::linear_combination(&[
        (1.0, &scaled.b_uu),
        (1.0, &scaled.d_omega),
        (1.0, &scaled.s),
    ])?;
    t.add_block(0, 0, 1.0, &uu);
    for (i, j, v) in scaled.b_uy.iter() {
        t.push(i, yo + j, v);
        t.push(yo + j, i, v);
    }
    for i in 0..layout.num_y {
        for j in 0..layout.num_y {
            let v = scaled.b_yy[(i, j)];
            if v != 0.0 {
                t.push(yo + i, yo + j, v);
            }
        }
    }
    for (k, &row) in dofmap.interior.iter().enumerate() {
        for (j, v) in scaled.a.row(row) {
            t.push(zo + k, j, v);
            t.push(j, zo + k, v);
        }
    }

    let mut b = Vec::with_capacity(layout.dim());
    b.extend_from_slice(&rhs.u);
    b.extend_from_slice(&rhs.y);
    b.extend_from_slice(&rhs.z);

    Ok(BlockSystem {
        matrix: t.build(),
        rhs: b,
        layout,
        interior: dofmap.interior.clone(),
    })
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

impl BlockSystem {
    pub fn dim(&self) -> usize {
        self.layout.dim()
    }

    pub fn residual(&self, x: &[f64]) -> Vec<f64> {
        let mx = self.matrix.mul_vec(x);
        self.rhs.iter().zip(mx).map(|(b, m)| b - m).collect()
    }

    /// `‖b − Mx‖ / ‖b‖`, or the absolute residual when `b = 0`.
    pub fn relative_residual(&self, x: &[f64]) -> f64 {
        let r = norm(&self.residual(x));
        let b = norm(&self.rhs);
        if b > 0.0 {
            r / b
        } else {
            r
        }
    }

    /// Sparse LU with partial pivoting, followed by a few steps of iterative
    /// refinement in double precision.
    pub fn solve(&self) -> Result<Solution> {
        let dim = self.dim();
        let x = if self.rhs.iter().all(|&v| v == 0.0) {
            vec![0.0; dim]
        } else {
            let a = self.matrix.to_faer()?;
            let lu = a.sp_lu().map_err(|e| Error::SolverFailure {
                message: format!("sparse LU factorization failed: {e:?}"),
                residual: f64::NAN,
            })?;
            let solve = |b: &[f64]| -> Vec<f64> {
                let rhs = Mat::from_fn(dim, 1, |i, _| b[i]);
                let sol = lu.solve(&rhs);
                (0..dim).map(|i| sol[(i, 0)]).collect()
            };
            let mut x = solve(&self.rhs);
            for _ in 0..MAX_REFINEMENT_STEPS {
                let r = self.residual(&x);
                if norm(&r) <= 1e-3 * RESIDUAL_TOLERANCE * norm(&self.rhs) {
                    break;
                }
                let dx = solve(&r);
                x.iter_mut().zip(dx).for_each(|(xi, di)| *xi += di);
            }
            x
        };
        let residual = self.relative_residual(&x);
        if residual.is_nan() || residual > RESIDUAL_TOLERANCE {
            return Err(Error::SolverFailure {
                message: format!("direct solve of a {dim}x{dim} system did not converge"),
                residual,
            });
        }
        let (u, y, z) = self.layout.split(&x);
        let mut z_full = vec![0.0; self.layout.num_u];
        for (k, &v) in self.interior.iter().enumerate() {
            z_full[v] = z[k];
        }
        Ok(Solution {
            u: FeFunction::from_coefficients(u.to_vec()),
            y: y.to_vec(),
            z: FeFunction::from_coefficients(z_full),
            relative_residual: residual,
        })
    }

    pub fn write_matrix_market(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.matrix
            .write_matrix_market(std::io::BufWriter::new(file))?;
        Ok(())
    }
}

/// Largest deviation between the solved trace coefficients and the
/// projection `B_yy⁻¹ (h C_Mᵀ u + h³ C_Kᵀ u)` recomputed from `u`.
pub fn eliminate_y_check(solution: &Solution, scaled: &ScaledForms) -> f64 {
    let recomputed = scaled.trace_projection(&solution.u.coefficients);
    solution
        .y
        .iter()
        .zip(recomputed)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

/// The eliminated form `g(u, z, v, w) = a(u,w) + a(v,z) + b̃(u,v) + h²(u,v)_ω + s(u,v)`
/// with `u, v` over all DOFs and `z, w` full-length vectors vanishing on the boundary.
pub fn eliminated_form(scaled: &ScaledForms, u: &[f64], z: &[f64], v: &[f64], w: &[f64]) -> f64 {
    scaled.a.bilinear(u, w)
        + scaled.a.bilinear(v, z)
        + tilde_b(scaled, u, v)
        + scaled.d_omega.bilinear(u, v)
        + scaled.s.bilinear(u, v)
}

/// `b̃(u, v) = uᵀ B_uu v − (B_uyᵀ u)ᵀ B_yy⁻¹ (B_uyᵀ v)`, the form of
/// `B(u − Pu, 0)` after minimizing over the trace coefficients.
pub fn tilde_b(scaled: &ScaledForms, u: &[f64], v: &[f64]) -> f64 {
    let pv = scaled.trace_projection(v);
    let cu = scaled.b_uy.transpose_mul_vec(u);
    scaled.b_uu.bilinear(u, v) + cu.iter().zip(&pv).map(|(a, b)| a * b).sum::<f64>()
}
