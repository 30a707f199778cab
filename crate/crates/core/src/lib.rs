//! Stabilized P1 finite elements for the unique continuation of Poisson
//! solutions from an interior region, when the Dirichlet trace is known to
//! lie in a finite-dimensional space of boundary modes.
//!
//! The pipeline is
//!
//! 1. [`mesh::build_structured_mesh`] triangulates the unit square and flags
//!    the data region `ω`,
//! 2. [`assembly`] builds the scaled bilinear forms,
//! 3. [`system`] couples them into the symmetric saddle-point system in
//!    `(u, y, z)` and solves it with a sparse LU,
//! 4. [`estimator`] evaluates the a posteriori estimator, the method's
//!    energy norm and the constant ratio `C(u)`,
//! 5. [`harness`] drives convergence studies and writes CSV / SVG output.

pub mod assembly;
pub mod error;
pub mod estimator;
pub mod fe_space;
pub mod field;
pub mod harness;
pub mod mesh;
pub mod quadrature;
pub mod sparse;
pub mod system;
pub mod trace_space;

pub use error::{Error, Result};
pub use fe_space::{DofMap, FeFunction};
pub use field::{ExactField, ScalarField};
pub use mesh::Mesh;
pub use sparse::SparseMatrix;
pub use system::{BlockSystem, Solution};
pub use trace_space::{SineTraceBasis, TraceModes};
