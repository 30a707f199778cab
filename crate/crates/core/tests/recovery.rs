//! Solved-system checks against independently computed references.

use std::f64::consts::FRAC_1_SQRT_2;

use ucfem::estimator::{compute_estimator, error_triple_norm, fit_rate};
use ucfem::fe_space::error_norms;
use ucfem::harness::{Discretization, SineSeries, SolutionId};
use ucfem::system::eliminate_y_check;

fn solve_simple(n: usize, modes: usize) -> (Discretization, ucfem::Solution) {
    let u = SineSeries::from_id(SolutionId::Simple);
    let f = u.source();
    let d = Discretization::new(n, modes, 0.0, &u, &f).unwrap();
    let s = d.solve().unwrap();
    (d, s)
}

#[test]
fn exact_trace_projection_is_a_single_mode() {
    // The trace of y sin(πx) is φ₁/√2; its projection has no other modes.
    let u = SineSeries::from_id(SolutionId::Simple);
    let (d, _) = solve_simple(20, 5);
    let y = d.norm_context().trace_projection(&ExactAsElementwise(&u));
    assert!((y[0] - FRAC_1_SQRT_2).abs() < 1e-10, "{y:?}");
    assert!(y[1..].iter().all(|c| c.abs() < 1e-10), "{y:?}");
    let coeffs = u.trace_coefficients();
    assert_eq!(coeffs.len(), 1);
    assert_eq!(coeffs[0].0, 1);
    assert!((coeffs[0].1 - FRAC_1_SQRT_2).abs() < 1e-15);
}

#[test]
fn recovered_trace_coefficients() {
    let (d, s) = solve_simple(20, 5);
    let h = d.mesh.h();
    assert!((s.y[0] - FRAC_1_SQRT_2).abs() <= 5.0 * h, "{:?}", s.y);
    for (k, c) in s.y.iter().enumerate().skip(1) {
        assert!(c.abs() <= 1e-3, "mode {}: {c}", k + 1);
    }
}

#[test]
fn single_mode_trace_matches_quadrature_projection() {
    let u = SineSeries::from_id(SolutionId::Simple);
    let (d, s) = solve_simple(20, 1);
    assert!(eliminate_y_check(&s, &d.scaled) <= 1e-10);
    let oracle = d.norm_context().trace_projection(&ExactAsElementwise(&u));
    assert!((s.y[0] - oracle[0]).abs() <= 5.0 * d.mesh.h());
    let from_uh = d.norm_context().trace_projection(&s.u);
    assert!((s.y[0] - from_uh[0]).abs() <= 1e-10);
}

#[test]
fn estimator_and_energy_norm_under_refinement() {
    let u = SineSeries::from_id(SolutionId::Simple);
    let f = u.source();
    let mut est = Vec::new();
    let mut energy = Vec::new();
    for n in [20, 40, 80, 160] {
        let (d, s) = solve_simple(n, 5);
        let ctx = d.norm_context();
        let h = d.mesh.h();
        let e = compute_estimator(&ctx, &s, &u, &f);
        assert!(e.total > 0.0);
        if n == 20 {
            // Effectivity measured on this mesh and pinned.
            let err = error_norms(&d.mesh, &u, &s.u, &d.triangle_rule);
            let eff = h * err.h1 / e.total;
            assert!((0.80..=0.87).contains(&eff), "{eff}");
        }
        est.push((h, e.total));
        energy.push((h, error_triple_norm(&ctx, &u, &s).value()));
    }
    let est_rate = fit_rate(&est).unwrap();
    assert!(est_rate >= 1.8, "{est_rate}");
    // The energy norm carries the semiclassical h-weights, so the best
    // approximation bound |u|_{H²} scaled by h² gives slope 2.
    let energy_rate = fit_rate(&energy).unwrap();
    assert!((energy_rate - 2.0).abs() <= 0.15, "{energy_rate}");
}

/// Exact field viewed elementwise, for the quadrature-based projection.
struct ExactAsElementwise<'a>(&'a SineSeries);

impl ucfem::fe_space::ElementwiseField for ExactAsElementwise<'_> {
    fn value(&self, _: &ucfem::Mesh, _: usize, x: [f64; 2], _: [f64; 3]) -> f64 {
        ucfem::ScalarField::value(self.0, x[0], x[1])
    }

    fn gradient(&self, _: &ucfem::Mesh, _: usize, x: [f64; 2], _: [f64; 3]) -> [f64; 2] {
        ucfem::ExactField::gradient(self.0, x[0], x[1])
    }

    fn laplacian(&self, _: &ucfem::Mesh, _: usize, x: [f64; 2], _: [f64; 3]) -> f64 {
        let h = ucfem::ExactField::hessian(self.0, x[0], x[1]);
        h[0][0] + h[1][1]
    }
}
