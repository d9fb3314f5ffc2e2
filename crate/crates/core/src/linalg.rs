//! Symmetric and positive-definite matrix types with spectral operations.
//!
//! Matrix functions are computed through the eigendecomposition
//! `C = U diag(w) U^T` as `f(C) = U diag(f(w)) U^T`. Eigenvalues come out
//! sorted in descending order with a fixed eigenvector sign convention, so
//! every operation is deterministic for a given input. Results that are
//! mathematically symmetric are re-symmetrized as `(M + M^T)/2` before being
//! wrapped, because floating-point drift would otherwise leak into downstream
//! exact-symmetry checks.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative floor for positive definiteness: a symmetric matrix is accepted
/// as SPD when its smallest eigenvalue exceeds `PD_TOL_REL` times its
/// largest. Scale-free, so a factor-10 rescaling of the data does not change
/// the verdict.
pub const PD_TOL_REL: f64 = 1e-12;

/// Largest eigenvalue magnitude accepted by [`SymmetricMatrix::exp`];
/// `exp` overflows `f64` just above this.
pub const EXP_EIGENVALUE_LIMIT: f64 = 709.78;

/// Dense real symmetric matrix. Stored entries satisfy
/// `m[(i,j)] == m[(j,i)]` exactly; construction enforces this by averaging
/// the two triangles and mirroring.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix {
    m: DMatrix<f64>,
}

impl SymmetricMatrix {
    /// Builds from a square matrix with finite entries, symmetrizing as
    /// `(M + M^T)/2`.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        check_square_finite(&m)?;
        Ok(Self::symmetrize(m))
    }

    /// Symmetrizes in place and wraps. Assumes squareness/finiteness were
    /// already checked or hold by construction.
    pub(crate) fn symmetrize(mut m: DMatrix<f64>) -> Self {
        let n = m.nrows();
        for i in 0..n {
            for j in (i + 1)..n {
                let v = 0.5 * (m[(i, j)] + m[(j, i)]);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        Self { m }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            m: DMatrix::zeros(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.m
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.m.norm()
    }

    /// Entrywise sum; exact symmetry is preserved by entrywise addition.
    pub fn add(&self, other: &SymmetricMatrix) -> Result<SymmetricMatrix> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(SymmetricMatrix {
            m: &self.m + &other.m,
        })
    }

    pub fn sub(&self, other: &SymmetricMatrix) -> Result<SymmetricMatrix> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(SymmetricMatrix {
            m: &self.m - &other.m,
        })
    }

    pub fn scale(&self, a: f64) -> SymmetricMatrix {
        SymmetricMatrix { m: &self.m * a }
    }

    /// Deterministic eigendecomposition; see [`EigenPair`].
    pub fn eigen(&self) -> Result<EigenPair> {
        sym_eigen_of(&self.m)
    }

    /// Matrix exponential `U exp(w) U^T`; always SPD.
    pub fn exp(&self) -> Result<SpdMatrix> {
        let eig = self.eigen()?;
        let lmax = eig.values[0];
        if lmax > EXP_EIGENVALUE_LIMIT {
            return Err(Error::ExpOverflow {
                eigenvalue: lmax,
                limit: EXP_EIGENVALUE_LIMIT,
            });
        }
        Ok(SpdMatrix::from_sym_unchecked(eig.assemble(f64::exp)))
    }

    /// Congruence transform `F M F^T`. `F` may be rectangular with `dim`
    /// columns; the result is symmetric of size `F.nrows()`.
    pub fn congruence(&self, f: &DMatrix<f64>) -> Result<SymmetricMatrix> {
        congruence_raw(&self.m, f, self.dim()).map(SymmetricMatrix::symmetrize)
    }
}

/// Dense real symmetric positive-definite matrix: all eigenvalues strictly
/// positive relative to [`PD_TOL_REL`], checked on construction via
/// [`SpdMatrix::new`].
#[derive(Debug, Clone, PartialEq)]
pub struct SpdMatrix {
    s: SymmetricMatrix,
}

impl SpdMatrix {
    /// Validating constructor: symmetrizes, eigendecomposes and checks
    /// positive definiteness.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        Self::from_symmetric(SymmetricMatrix::new(m)?)
    }

    pub fn from_symmetric(s: SymmetricMatrix) -> Result<Self> {
        let eig = s.eigen()?;
        check_pd(&eig.values)?;
        Ok(Self { s })
    }

    /// Wraps a matrix known to be SPD by construction (exp of a symmetric
    /// matrix, congruence of an SPD matrix by an invertible factor, sums of
    /// SPD matrices, ...). Callers are responsible for that argument; the
    /// public validating path is [`SpdMatrix::new`].
    pub(crate) fn from_sym_unchecked(s: SymmetricMatrix) -> Self {
        Self { s }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            s: SymmetricMatrix {
                m: DMatrix::identity(dim, dim),
            },
        }
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        if diag.is_empty() {
            return Err(Error::InvalidParameter("empty diagonal".into()));
        }
        if diag.iter().any(|&d| !d.is_finite() || d <= 0.0) {
            return Err(Error::InvalidParameter(
                "diagonal entries must be finite and positive".into(),
            ));
        }
        Self::new(DMatrix::from_diagonal(&DVector::from_column_slice(diag)))
    }

    pub fn dim(&self) -> usize {
        self.s.dim()
    }

    pub fn sym(&self) -> &SymmetricMatrix {
        &self.s
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        self.s.matrix()
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.s.m
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.s.frobenius_norm()
    }

    pub fn trace(&self) -> f64 {
        self.s.m.trace()
    }

    /// Eigendecomposition with the positive-definiteness recheck. All
    /// spectral functions route through this, so a violation surfaces with
    /// the offending eigenvalue no matter how the value was obtained.
    pub fn eigen(&self) -> Result<EigenPair> {
        let eig = self.s.eigen()?;
        check_pd(&eig.values)?;
        Ok(eig)
    }

    pub fn inverse(&self) -> Result<SpdMatrix> {
        Ok(Self::from_sym_unchecked(
            self.eigen()?.assemble(|w| 1.0 / w),
        ))
    }

    pub fn sqrt(&self) -> Result<SpdMatrix> {
        Ok(Self::from_sym_unchecked(self.eigen()?.assemble(f64::sqrt)))
    }

    pub fn inv_sqrt(&self) -> Result<SpdMatrix> {
        Ok(Self::from_sym_unchecked(
            self.eigen()?.assemble(|w| 1.0 / w.sqrt()),
        ))
    }

    /// Matrix logarithm; symmetric but in general indefinite.
    pub fn log(&self) -> Result<SymmetricMatrix> {
        Ok(self.eigen()?.assemble(f64::ln))
    }

    /// Spectral power `U diag(w^beta) U^T` for any real exponent.
    pub fn powf(&self, beta: f64) -> Result<SpdMatrix> {
        Ok(Self::from_sym_unchecked(
            self.eigen()?.assemble(|w| w.powf(beta)),
        ))
    }

    /// Log-determinant `sum ln w_n`, numerically robust where the raw
    /// determinant would over- or underflow.
    pub fn ln_det(&self) -> Result<f64> {
        Ok(self.eigen()?.values.iter().map(|w| w.ln()).sum())
    }

    /// Congruence transform `F C F^T`; positive definiteness is preserved
    /// whenever `F` has full row rank, which holds for every use in this
    /// crate (invertible or orthogonal factors).
    pub fn congruence(&self, f: &DMatrix<f64>) -> Result<SpdMatrix> {
        let raw = congruence_raw(self.matrix(), f, self.dim())?;
        Ok(Self::from_sym_unchecked(SymmetricMatrix::symmetrize(raw)))
    }

    pub fn add(&self, other: &SpdMatrix) -> Result<SpdMatrix> {
        Ok(Self::from_sym_unchecked(self.s.add(&other.s)?))
    }

    /// Scaling by a strictly positive factor stays in the cone.
    pub fn scale(&self, a: f64) -> Result<SpdMatrix> {
        if !a.is_finite() || a <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "scale factor must be finite and positive, got {a}"
            )));
        }
        Ok(Self::from_sym_unchecked(self.s.scale(a)))
    }
}

/// Eigendecomposition of a symmetric matrix: orthonormal eigenvectors (one
/// per column of `vectors`) and eigenvalues sorted descending. The sign of
/// each eigenvector is fixed so its first nonzero component is positive,
/// making the decomposition deterministic for golden-file comparisons.
#[derive(Debug, Clone)]
pub struct EigenPair {
    pub vectors: DMatrix<f64>,
    pub values: DVector<f64>,
}

impl EigenPair {
    /// Rebuilds `U diag(f(w)) U^T`, re-symmetrized.
    pub fn assemble(&self, f: impl Fn(f64) -> f64) -> SymmetricMatrix {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for j in 0..n {
            let fw = f(self.values[j]);
            for i in 0..n {
                scaled[(i, j)] *= fw;
            }
        }
        SymmetricMatrix::symmetrize(scaled * self.vectors.transpose())
    }
}

fn check_square_finite(m: &DMatrix<f64>) -> Result<()> {
    if m.nrows() != m.ncols() || m.nrows() == 0 {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            if !m[(i, j)].is_finite() {
                return Err(Error::NonFinite { row: i, col: j });
            }
        }
    }
    Ok(())
}

fn check_pd(values: &DVector<f64>) -> Result<()> {
    let lmax = values[0];
    let lmin = values[values.len() - 1];
    let tol = PD_TOL_REL * lmax.max(0.0);
    if !(lmax > 0.0) || lmin <= tol {
        return Err(Error::NotPositiveDefinite {
            eigenvalue: lmin,
            tolerance: tol,
        });
    }
    Ok(())
}

/// Eigendecomposition used by both wrapper types. nalgebra's symmetric QL
/// solver is deterministic; sorting and the sign convention are applied on
/// top so the output is unique.
pub(crate) fn sym_eigen_of(m: &DMatrix<f64>) -> Result<EigenPair> {
    let n = m.nrows();
    let se = nalgebra::SymmetricEigen::try_new(m.clone(), f64::EPSILON, 100_000).ok_or(
        Error::EigenDidNotConverge {
            dim: n,
            norm: m.norm(),
        },
    )?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| se.eigenvalues[b].total_cmp(&se.eigenvalues[a]));

    let mut vectors = DMatrix::zeros(n, n);
    let mut values = DVector::zeros(n);
    for (dst, &src) in order.iter().enumerate() {
        values[dst] = se.eigenvalues[src];
        let mut sign = 1.0;
        for i in 0..n {
            let x = se.eigenvectors[(i, src)];
            if x != 0.0 {
                sign = x.signum();
                break;
            }
        }
        for i in 0..n {
            vectors[(i, dst)] = sign * se.eigenvectors[(i, src)];
        }
    }
    Ok(EigenPair { vectors, values })
}

fn congruence_raw(m: &DMatrix<f64>, f: &DMatrix<f64>, dim: usize) -> Result<DMatrix<f64>> {
    if f.ncols() != dim || f.nrows() == 0 {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: f.ncols(),
        });
    }
    Ok(f * m * f.transpose())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::dmatrix;

    fn seeded_spd(dim: usize, seed: u64) -> SpdMatrix {
        crate::simgen::random_spd(dim, seed).unwrap()
    }

    #[test]
    fn symmetrization_is_exact() {
        let m = dmatrix![1.0, 2.0; 2.5, 4.0];
        let s = SymmetricMatrix::new(m).unwrap();
        assert_eq!(s.matrix()[(0, 1)], s.matrix()[(1, 0)]);
        assert_eq!(s.matrix()[(0, 1)], 2.25);
    }

    #[test]
    fn rejects_non_square_and_non_finite() {
        assert!(SymmetricMatrix::new(DMatrix::zeros(2, 3)).is_err());
        let m = dmatrix![1.0, f64::NAN; 0.0, 1.0];
        assert!(matches!(
            SymmetricMatrix::new(m),
            Err(Error::NonFinite { .. })
        ));
    }

    #[test]
    fn spd_construction_rejects_indefinite() {
        let err = SpdMatrix::new(dmatrix![1.0, 0.0; 0.0, -2.0]).unwrap_err();
        match err {
            Error::NotPositiveDefinite { eigenvalue, .. } => {
                assert_relative_eq!(eigenvalue, -2.0, max_relative = 1e-12)
            }
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn eigen_identity_and_diagonal() {
        let eig = SpdMatrix::identity(2).eigen().unwrap();
        assert_eq!(eig.values.as_slice(), &[1.0, 1.0]);
        assert_eq!(eig.vectors, DMatrix::identity(2, 2));

        let eig = SpdMatrix::from_diagonal(&[1.0, 3.0]).unwrap().eigen().unwrap();
        assert_eq!(eig.values.as_slice(), &[3.0, 1.0]);
        // descending order puts the eigenvector of 3 first
        assert_eq!(eig.vectors[(1, 0)], 1.0);
        assert_eq!(eig.vectors[(0, 1)], 1.0);
    }

    #[test]
    fn eigen_reconstructs_input() {
        let s = seeded_spd(5, 42);
        let eig = s.eigen().unwrap();
        let rebuilt = eig.assemble(|w| w);
        assert!((rebuilt.matrix() - s.matrix()).norm() < 1e-12 * s.frobenius_norm().max(1.0));
        let ortho = (eig.vectors.transpose() * &eig.vectors - DMatrix::identity(5, 5)).norm();
        assert!(ortho < 1e-12);
    }

    #[test]
    fn eigen_sign_convention_is_deterministic() {
        let s = seeded_spd(4, 7);
        let a = s.eigen().unwrap();
        let b = s.eigen().unwrap();
        assert_eq!(a.vectors, b.vectors);
        for j in 0..4 {
            let first = (0..4).map(|i| a.vectors[(i, j)]).find(|x| *x != 0.0).unwrap();
            assert!(first > 0.0);
        }
    }

    #[test]
    fn spectral_functions_on_diagonals() {
        let c = SpdMatrix::from_diagonal(&[2.0, 4.0]).unwrap();
        let inv = c.inverse().unwrap();
        assert_relative_eq!(inv.matrix()[(0, 0)], 0.5, max_relative = 1e-14);
        assert_relative_eq!(inv.matrix()[(1, 1)], 0.25, max_relative = 1e-14);

        let i = SpdMatrix::identity(3);
        assert_eq!(i.sqrt().unwrap().matrix(), i.matrix());

        let c = SpdMatrix::from_diagonal(&[std::f64::consts::E, (2.0f64).exp()]).unwrap();
        let l = c.log().unwrap();
        assert_relative_eq!(l.matrix()[(0, 0)], 1.0, max_relative = 1e-14);
        assert_relative_eq!(l.matrix()[(1, 1)], 2.0, max_relative = 1e-14);
    }

    #[test]
    fn exp_of_zero_and_diagonal() {
        let z = SymmetricMatrix::zeros(3);
        assert_eq!(z.exp().unwrap().matrix(), SpdMatrix::identity(3).matrix());

        let s = SymmetricMatrix::new(dmatrix![1.0, 0.0; 0.0, 2.0]).unwrap();
        let e = s.exp().unwrap();
        assert_relative_eq!(e.matrix()[(0, 0)], std::f64::consts::E, max_relative = 1e-14);
        assert_relative_eq!(e.matrix()[(1, 1)], (2.0f64).exp(), max_relative = 1e-14);
    }

    #[test]
    fn exp_overflow_is_reported() {
        let s = SymmetricMatrix::new(DMatrix::identity(2, 2) * 800.0).unwrap();
        assert!(matches!(s.exp(), Err(Error::ExpOverflow { .. })));
    }

    #[test]
    fn exp_log_round_trip() {
        let s = crate::simgen::random_symmetric(5, 3).unwrap().scale(0.8);
        let back = s.exp().unwrap().log().unwrap();
        assert!((back.matrix() - s.matrix()).norm() < 1e-10 * s.frobenius_norm().max(1.0));
    }

    #[test]
    fn sqrt_and_invsqrt_identities() {
        let c = seeded_spd(6, 11);
        let r = c.sqrt().unwrap();
        assert!((r.matrix() * r.matrix() - c.matrix()).norm() < 1e-10 * c.frobenius_norm());
        let w = c.inv_sqrt().unwrap();
        let white = w.matrix() * c.matrix() * w.matrix();
        assert!((white - DMatrix::identity(6, 6)).norm() < 1e-10);
    }

    #[test]
    fn congruence_cases() {
        let c = seeded_spd(4, 5);
        let id = DMatrix::identity(4, 4);
        assert_eq!(c.congruence(&id).unwrap().matrix(), c.matrix());

        let f = crate::simgen::random_invertible(4, 9).unwrap();
        let i4 = SpdMatrix::identity(4);
        let fft = i4.congruence(&f).unwrap();
        assert!((fft.matrix() - &f * f.transpose()).norm() < 1e-13 * fft.frobenius_norm());

        // det(F C F^T) = det(F)^2 det(C)
        let g = c.congruence(&f).unwrap();
        let lhs = g.ln_det().unwrap();
        let rhs = 2.0 * f.determinant().abs().ln() + c.ln_det().unwrap();
        assert_relative_eq!(lhs, rhs, max_relative = 1e-10, epsilon = 1e-10);

        assert!(c.congruence(&DMatrix::zeros(4, 3)).is_err());
    }

    #[test]
    fn ln_det_matches_determinant() {
        let c = seeded_spd(5, 21);
        assert_relative_eq!(
            c.ln_det().unwrap(),
            c.matrix().determinant().ln(),
            max_relative = 1e-10
        );
    }
}
