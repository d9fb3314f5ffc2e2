//! Distances, geodesics and tangent-space maps on the SPD cone.
//!
//! Three (semi-)metrics are provided: the affine-invariant Fisher metric
//! [`fi_distance`], the log-Euclidean metric [`le_distance`] and the
//! Bhattacharyya divergence [`bhat_divergence`]. Symmetric functions of two
//! arguments are evaluated after putting the arguments in a canonical order,
//! so swapping them returns a bitwise-identical result.

use crate::error::{Error, Result};
use crate::linalg::{SpdMatrix, SymmetricMatrix};

/// Geodesic position parameter, restricted to the segment `[0, 1]` between
/// the two endpoints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeodesicParam(f64);

impl GeodesicParam {
    pub fn new(beta: f64) -> Result<Self> {
        if !beta.is_finite() || !(0.0..=1.0).contains(&beta) {
            return Err(Error::InvalidParameter(format!(
                "geodesic parameter must lie in [0, 1], got {beta}"
            )));
        }
        Ok(Self(beta))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

fn check_same_dim(c1: &SpdMatrix, c2: &SpdMatrix) -> Result<()> {
    if c1.dim() != c2.dim() {
        return Err(Error::DimensionMismatch {
            expected: c1.dim(),
            found: c2.dim(),
        });
    }
    Ok(())
}

/// Orders two matrices by lexicographic comparison of their raw entries.
/// Symmetric binary operations evaluate on the ordered pair, which turns
/// mathematical symmetry into bitwise symmetry.
fn canonical<'a>(c1: &'a SpdMatrix, c2: &'a SpdMatrix) -> (&'a SpdMatrix, &'a SpdMatrix) {
    let a = c1.matrix().as_slice();
    let b = c2.matrix().as_slice();
    for (x, y) in a.iter().zip(b.iter()) {
        match x.total_cmp(y) {
            std::cmp::Ordering::Less => return (c1, c2),
            std::cmp::Ordering::Greater => return (c2, c1),
            std::cmp::Ordering::Equal => {}
        }
    }
    (c1, c2)
}

/// Fisher-information (affine-invariant) distance
/// `sqrt(sum_n ln^2 w_n)` over the eigenvalues `w_n` of `C1^-1 C2`.
pub fn fi_distance(c1: &SpdMatrix, c2: &SpdMatrix) -> Result<f64> {
    check_same_dim(c1, c2)?;
    let (a, b) = canonical(c1, c2);
    let w = a.inv_sqrt()?;
    let inner = b.congruence(w.matrix())?;
    let eig = inner.eigen()?;
    Ok(eig.values.iter().map(|v| v.ln().powi(2)).sum::<f64>().sqrt())
}

/// Fisher-information norm: distance from the identity,
/// `sqrt(sum_n ln^2 w_n)` over the eigenvalues of `C` itself.
pub fn fi_norm(c: &SpdMatrix) -> Result<f64> {
    fi_distance(&SpdMatrix::identity(c.dim()), c)
}

/// Log-Euclidean distance `||ln C1 - ln C2||_F`. Already bitwise symmetric:
/// negating every entry of the difference leaves the norm unchanged.
pub fn le_distance(c1: &SpdMatrix, c2: &SpdMatrix) -> Result<f64> {
    check_same_dim(c1, c2)?;
    let d = c1.log()?.sub(&c2.log()?)?;
    Ok(d.frobenius_norm())
}

/// Bhattacharyya divergence
/// `ln det((C1 + C2)/2) - (ln det C1 + ln det C2)/2`; zero iff `C1 == C2`.
pub fn bhat_divergence(c1: &SpdMatrix, c2: &SpdMatrix) -> Result<f64> {
    check_same_dim(c1, c2)?;
    let mid = c1.add(c2)?.scale(0.5)?;
    Ok(mid.ln_det()? - 0.5 * (c1.ln_det()? + c2.ln_det()?))
}

/// Square root of [`bhat_divergence`], clamped at zero against the rounding
/// noise of nearly-equal arguments.
pub fn bhat_distance(c1: &SpdMatrix, c2: &SpdMatrix) -> Result<f64> {
    Ok(bhat_divergence(c1, c2)?.max(0.0).sqrt())
}

/// Point at parameter `beta` on the Fisher geodesic from `omega` to `phi`:
/// `Omega^1/2 (Omega^-1/2 Phi Omega^-1/2)^beta Omega^1/2`. The endpoints are
/// returned as exact copies.
pub fn geodesic(omega: &SpdMatrix, phi: &SpdMatrix, beta: GeodesicParam) -> Result<SpdMatrix> {
    check_same_dim(omega, phi)?;
    if beta.value() == 0.0 {
        return Ok(omega.clone());
    }
    if beta.value() == 1.0 {
        return Ok(phi.clone());
    }
    let r = omega.sqrt()?;
    let w = omega.inv_sqrt()?;
    let inner = phi.congruence(w.matrix())?.powf(beta.value())?;
    inner.congruence(r.matrix())
}

/// Midpoint of the Fisher geodesic, i.e. the geometric mean of two matrices:
/// `C1^1/2 (C1^-1/2 C2 C1^-1/2)^1/2 C1^1/2`. Evaluated on canonically ordered
/// arguments, hence bitwise symmetric; it is the unique SPD solution `X` of
/// the Riccati equation `X C2^-1 X = C1`.
pub fn geomean2(c1: &SpdMatrix, c2: &SpdMatrix) -> Result<SpdMatrix> {
    check_same_dim(c1, c2)?;
    let (a, b) = canonical(c1, c2);
    let r = a.sqrt()?;
    let w = a.inv_sqrt()?;
    let inner = b.congruence(w.matrix())?.sqrt()?;
    inner.congruence(r.matrix())
}

/// Riemannian exponential map at `base`:
/// `Base^1/2 exp(Base^-1/2 S Base^-1/2) Base^1/2` for a symmetric tangent `S`.
pub fn exp_map(base: &SpdMatrix, tangent: &SymmetricMatrix) -> Result<SpdMatrix> {
    if base.dim() != tangent.dim() {
        return Err(Error::DimensionMismatch {
            expected: base.dim(),
            found: tangent.dim(),
        });
    }
    let r = base.sqrt()?;
    let w = base.inv_sqrt()?;
    let inner = tangent.congruence(w.matrix())?;
    let e = inner.exp()?;
    e.congruence(r.matrix())
}

/// Riemannian logarithm map at `base`, the inverse of [`exp_map`]:
/// `Base^1/2 ln(Base^-1/2 Target Base^-1/2) Base^1/2`.
pub fn log_map(base: &SpdMatrix, target: &SpdMatrix) -> Result<SymmetricMatrix> {
    check_same_dim(base, target)?;
    let r = base.sqrt()?;
    let w = base.inv_sqrt()?;
    let inner = target.congruence(w.matrix())?;
    inner.log()?.congruence(r.matrix())
}
