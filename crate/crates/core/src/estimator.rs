//! A posteriori error estimator, the method's energy norm, the constant
//! ratio `C(u)` and log-log rate fitting.

use faer::linalg::solvers::Solve;
use faer::Mat;

use crate::error::{Error, Result};
use crate::fe_space::{barycentric, Difference, ElementwiseField, FeFunction};
use crate::field::{ExactField, ScalarField};
use crate::mesh::{Mesh, Point};
use crate::quadrature::{EdgeRule, TriangleRule};
use crate::system::Solution;
use crate::trace_space::TraceModes;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct EstimatorBreakdown {
    /// `h ‖u_h − q‖_{L²(ω)}`
    pub data: f64,
    /// `J(u_h)^{1/2}`
    pub jump: f64,
    /// `B̃(u_h)^{1/2}` with the solved trace coefficients
    pub trace: f64,
    /// `‖h²Δu_h + h²f‖` over elements, `= h² ‖f‖` for P1
    pub residual: f64,
    pub total: f64,
}

/// Quadrature rules and mesh context shared by the norm evaluations.
pub struct NormContext<'a> {
    pub mesh: &'a Mesh,
    pub basis: &'a dyn TraceModes,
    pub triangle_rule: &'a TriangleRule,
    pub edge_rule: &'a EdgeRule,
}

impl NormContext<'_> {
    fn h(&self) -> f64 {
        self.mesh.h()
    }

    /// `Σ_F h³ ∫_F [∂_ν w]²` with face-quadrature of one-sided gradients.
    pub fn jump_squared(&self, w: &dyn ElementwiseField) -> f64 {
        let mesh = self.mesh;
        let h3 = self.h().powi(3);
        let mut acc = 0.0;
        for face in &mesh.interior_faces {
            let [a, b] = mesh.edge_points(face.vertices);
            let (tl, tr) = (mesh.triangle_points(face.left), mesh.triangle_points(face.right));
            for (p, _, wq) in self.edge_rule.mapped(a, b) {
                let gl = w.gradient(mesh, face.left, p, barycentric(&tl, p));
                let gr = w.gradient(mesh, face.right, p, barycentric(&tr, p));
                let jump = (gr[0] - gl[0]) * face.normal[0] + (gr[1] - gl[1]) * face.normal[1];
                acc += wq * jump * jump;
            }
        }
        h3 * acc
    }

    /// `‖h² Δw‖²` summed over elements.
    pub fn laplacian_squared(&self, w: &dyn ElementwiseField) -> f64 {
        let mesh = self.mesh;
        let h4 = self.h().powi(4);
        let mut acc = 0.0;
        for t in 0..mesh.triangles.len() {
            for (x, bary, wq) in self.triangle_rule.mapped(&mesh.triangle_points(t)) {
                let l = w.laplacian(mesh, t, x, bary);
                acc += wq * l * l;
            }
        }
        h4 * acc
    }

    /// `h² ‖w‖²_{L²(ω)}`
    pub fn omega_squared(&self, w: &dyn ElementwiseField) -> f64 {
        let mesh = self.mesh;
        let mut acc = 0.0;
        for t in (0..mesh.triangles.len()).filter(|&t| mesh.omega_flags[t]) {
            for (x, bary, wq) in self.triangle_rule.mapped(&mesh.triangle_points(t)) {
                let v = w.value(mesh, t, x, bary);
                acc += wq * v * v;
            }
        }
        self.h().powi(2) * acc
    }

    /// `‖h ∇w‖²`
    pub fn dual_squared(&self, w: &dyn ElementwiseField) -> f64 {
        let mesh = self.mesh;
        let mut acc = 0.0;
        for t in 0..mesh.triangles.len() {
            for (x, bary, wq) in self.triangle_rule.mapped(&mesh.triangle_points(t)) {
                let g = w.gradient(mesh, t, x, bary);
                acc += wq * (g[0] * g[0] + g[1] * g[1]);
            }
        }
        self.h().powi(2) * acc
    }

    fn boundary_samples(&self, w: &dyn ElementwiseField) -> Vec<BoundarySample> {
        let mesh = self.mesh;
        let mut out = Vec::with_capacity(mesh.boundary_edges.len() * self.edge_rule.points.len());
        for (e, edge) in mesh.boundary_edges.iter().enumerate() {
            let [a, b] = mesh.edge_points(mesh.oriented_boundary_edge(e));
            let tangent = [b[0] - a[0], b[1] - a[1]];
            let len = (tangent[0].powi(2) + tangent[1].powi(2)).sqrt();
            let tri = mesh.triangle_points(edge.element);
            for (p, _, wq) in self.edge_rule.mapped(a, b) {
                let bary = barycentric(&tri, p);
                let g = w.gradient(mesh, edge.element, p, bary);
                out.push(BoundarySample {
                    point: p,
                    tag: edge.tag,
                    weight: wq,
                    value: w.value(mesh, edge.element, p, bary),
                    derivative: (g[0] * tangent[0] + g[1] * tangent[1]) / len,
                });
            }
        }
        out
    }

    /// `B(w, y) = h ‖w − Σ y_k φ_k‖²_{∂Ω} + h³ ‖∂_t(w − Σ y_k φ_k)‖²_{∂Ω}`.
    pub fn trace_squared(&self, w: &dyn ElementwiseField, y: &[f64]) -> f64 {
        let h = self.h();
        let (mut mass, mut stiff) = (0.0, 0.0);
        for s in self.boundary_samples(w) {
            let dv = s.value - self.basis.combination(y, s.point, s.tag);
            let dd = s.derivative - self.basis.combination_derivative(y, s.point, s.tag);
            mass += s.weight * dv * dv;
            stiff += s.weight * dd * dd;
        }
        h * mass + h.powi(3) * stiff
    }

    /// Mode coefficients minimizing `B(w, ·)`, from boundary quadrature of `w`.
    pub fn trace_projection(&self, w: &dyn ElementwiseField) -> Vec<f64> {
        let dim = self.basis.dim();
        if dim == 0 {
            return Vec::new();
        }
        let h = self.h();
        let h3 = h.powi(3);
        let mut gram = Mat::<f64>::zeros(dim, dim);
        let mut rhs = Mat::<f64>::zeros(dim, 1);
        for s in self.boundary_samples(w) {
            let vals: Vec<f64> = (0..dim).map(|k| self.basis.value(k, s.point, s.tag)).collect();
            let ders: Vec<f64> = (0..dim)
                .map(|k| self.basis.tangential_derivative(k, s.point, s.tag))
                .collect();
            for i in 0..dim {
                rhs[(i, 0)] += s.weight * (h * s.value * vals[i] + h3 * s.derivative * ders[i]);
                for j in 0..dim {
                    gram[(i, j)] += s.weight * (h * vals[i] * vals[j] + h3 * ders[i] * ders[j]);
                }
            }
        }
        let llt = gram
            .llt(faer::Side::Lower)
            .expect("trace Gram matrix is symmetric positive definite");
        let y = llt.solve(&rhs);
        (0..dim).map(|i| y[(i, 0)]).collect()
    }
}

struct BoundarySample {
    point: Point,
    tag: crate::mesh::BoundaryTag,
    weight: f64,
    value: f64,
    derivative: f64,
}

/// Evaluates the estimator for a solved system with data `q` on `ω` and
/// source `f`.
pub fn compute_estimator(
    ctx: &NormContext<'_>,
    solution: &Solution,
    q: &dyn ScalarField,
    f: &dyn ScalarField,
) -> EstimatorBreakdown {
    let mesh = ctx.mesh;
    let h = ctx.h();
    let u_h = &solution.u;

    let mut misfit = 0.0;
    let mut source = 0.0;
    for t in 0..mesh.triangles.len() {
        for (x, bary, w) in ctx.triangle_rule.mapped(&mesh.triangle_points(t)) {
            if mesh.omega_flags[t] {
                let d = u_h.value_at(mesh, t, bary) - q.value(x[0], x[1]);
                misfit += w * d * d;
            }
            let fv = f.value(x[0], x[1]);
            source += w * fv * fv;
        }
    }

    let data = h * misfit.sqrt();
    let jump = ctx.jump_squared(u_h).sqrt();
    let trace = ctx.trace_squared(u_h, &solution.y).sqrt();
    let residual = h * h * source.sqrt();
    EstimatorBreakdown {
        data,
        jump,
        trace,
        residual,
        total: data + jump + trace + residual,
    }
}

/// Addends of `⫴u, z⫴²`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct TripleNorm {
    /// `B̃(u)`
    pub trace: f64,
    /// `h² ‖u‖²_ω`
    pub omega: f64,
    /// `S(u)`, scaled by the requested stabilizer weight
    pub stabilizer: f64,
    /// `‖h∇z‖²`
    pub dual: f64,
}

impl TripleNorm {
    pub fn squared(&self) -> f64 {
        self.trace + self.omega + self.stabilizer + self.dual
    }

    pub fn value(&self) -> f64 {
        self.squared().sqrt()
    }
}

/// `⫴u, z⫴` with `S = J + ‖h²Δ·‖²` multiplied by `stabilizer_weight`
/// (1 for the norm itself, `γ` for the energy the discrete system sees).
pub fn triple_norm(
    ctx: &NormContext<'_>,
    u: &dyn ElementwiseField,
    z: &FeFunction,
    stabilizer_weight: f64,
) -> TripleNorm {
    let y = ctx.trace_projection(u);
    TripleNorm {
        trace: ctx.trace_squared(u, &y),
        omega: ctx.omega_squared(u),
        stabilizer: stabilizer_weight * (ctx.jump_squared(u) + ctx.laplacian_squared(u)),
        dual: ctx.dual_squared(z),
    }
}

/// `⫴u − u_h, z_h⫴` for an exact solution.
pub fn error_triple_norm(
    ctx: &NormContext<'_>,
    exact: &dyn ExactField,
    solution: &Solution,
) -> TripleNorm {
    let diff = Difference {
        exact,
        discrete: &solution.u,
    };
    triple_norm(ctx, &diff, &solution.z, 1.0)
}

/// `C(u) = ‖u − u_h‖_{H¹} / (h ‖u‖_{H²})`.
pub fn constant_ratio(h1_error: f64, h: f64, h2_norm: f64) -> Result<f64> {
    if h2_norm.is_nan() || h.is_nan() || h2_norm <= 0.0 || h <= 0.0 {
        return Err(Error::invalid(format!(
            "constant ratio needs positive h and H2 norm (h = {h}, norm = {h2_norm})"
        )));
    }
    Ok(h1_error / (h * h2_norm))
}

/// Least-squares slope of `log(error)` against `log(h)`.
pub fn fit_rate(pairs: &[(f64, f64)]) -> Result<f64> {
    if pairs.len() < 3 {
        return Err(Error::invalid(format!(
            "rate fit needs at least three points, got {}",
            pairs.len()
        )));
    }
    if let Some(&(h, e)) = pairs.iter().find(|(h, e)| !(*h > 0.0 && *e > 0.0)) {
        return Err(Error::invalid(format!(
            "rate fit needs positive values, got ({h}, {e})"
        )));
    }
    let n = pairs.len() as f64;
    let (xs, ys): (Vec<f64>, Vec<f64>) = pairs.iter().map(|(h, e)| (h.ln(), e.ln())).unzip();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::invalid("rate fit needs at least two distinct h values"));
    }
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fit_rate_examples() {
        let hs = [0.1, 0.05, 0.025, 0.0125];
        let p: Vec<_> = hs.iter().map(|&h| (h, h)).collect();
        assert!((fit_rate(&p).unwrap() - 1.0).abs() < 1e-12);
        let p: Vec<_> = hs.iter().map(|&h| (h, 7.0 * h * h)).collect();
        assert!((fit_rate(&p).unwrap() - 2.0).abs() < 1e-12);
        let p: Vec<_> = hs.iter().map(|&h| (h, 3.0)).collect();
        assert!(fit_rate(&p).unwrap().abs() < 1e-12);
    }

    #[test]
    fn fit_rate_rejects_bad_input() {
        assert!(fit_rate(&[(0.1, 1.0), (0.0, 1.0), (0.2, 1.0)]).is_err());
        assert!(fit_rate(&[(0.1, -1.0), (0.05, 1.0), (0.2, 1.0)]).is_err());
        assert!(fit_rate(&[(0.1, 1.0), (0.05, 0.5)]).is_err());
    }

    #[test]
    fn constant_ratio_is_linear_in_error() {
        let c1 = constant_ratio(0.01, 0.1, 2.0).unwrap();
        let c2 = constant_ratio(0.02, 0.1, 2.0).unwrap();
        assert!((c2 - 2.0 * c1).abs() < 1e-15);
        assert_eq!(constant_ratio(0.0, 0.1, 2.0).unwrap(), 0.0);
        assert!(constant_ratio(0.1, 0.1, 0.0).is_err());
    }
}
