//! Small symmetric eigen-solvers and piecewise-linear envelopes.
//!
//! Everything the bound computations need is tiny (tri-diagonal matrices of
//! order ≤ 64, dense oracle matrices of a few hundred rows), so these are
//! straightforward textbook routines rather than a general library.

mod dense;
mod envelope;
mod tridiag;

pub use dense::{max_eigenvalue_dense, DenseSymmetric, JACOBI_MAX_SWEEPS};
pub use envelope::{upper_concave_envelope, PiecewiseLinear, Shape, SLOPE_TIE_TOL};
pub use tridiag::{max_eigenpair_tridiag, max_eigenvalue_tridiag, TridiagonalSymmetric};
