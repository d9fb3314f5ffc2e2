//! Geometry of symmetric positive-definite (SPD) matrices.
//!
//! The crate provides, bottom up:
//!
//! * [`linalg`] — symmetric/SPD matrix types and eigendecomposition-based
//!   matrix functions (inverse, square roots, log, exp, powers),
//! * [`geometry`] — the Fisher-information (affine-invariant) metric:
//!   distance, geodesic, exponential/logarithmic maps, the two-matrix
//!   geometric mean, plus the log-Euclidean distance and the Bhattacharyya
//!   divergence,
//! * [`ajd`] — exact joint diagonalization of two SPD matrices and
//!   approximate joint diagonalization (AJD) of larger sets under Pham's
//!   log-likelihood criterion,
//! * [`means`] — arithmetic, harmonic, log-Euclidean, Bhattacharyya and
//!   Fisher-information geometric means (gradient-descent,
//!   majorization-minimization and square-root-iteration solvers), the
//!   AJD-based log-Euclidean (ALE) mean and its online circular-buffer
//!   variant,
//! * [`simgen`] — a seeded generator of synthetic SPD sets with known mixing
//!   ground truth, used by the benchmark harness,
//! * [`io`] — the plain-text `spdset`/`spdtruth` file formats,
//! * [`props`] — the executable property suite behind `spdbench props`.
//!
//! All numeric kernels are deterministic: eigenvalues are sorted, eigenvector
//! signs are fixed, random streams are seeded ChaCha, and parallel stages
//! collect per-item results in index order before any floating-point
//! reduction, so a given build produces identical bytes run after run.

pub mod ajd;
pub mod error;
pub mod geometry;
pub mod io;
pub mod linalg;
pub mod means;
mod par;
pub mod props;
pub mod set;
pub mod simgen;

pub use error::{Error, Result};
pub use linalg::{EigenPair, SpdMatrix, SymmetricMatrix};
pub use set::MatrixSet;

pub use nalgebra;
