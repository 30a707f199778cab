//! Shared fixtures for the criterion benchmarks.

use ucfem::harness::{Discretization, SineSeries, SolutionId};
use ucfem::Result;

/// Assembles the simple manufactured problem on an `n × n` mesh.
pub fn simple_problem(n: usize, modes: usize) -> Result<Discretization> {
    let exact = SineSeries::from_id(SolutionId::Simple);
    let source = exact.source();
    Discretization::new(n, modes, 0.0, &exact, &source)
}
