//! Approximate joint diagonalization (AJD) of SPD matrix sets.
//!
//! [`ajd_pham`] minimizes the log-likelihood criterion
//!
//! ```text
//! J(B) = (1/W) sum_k w_k [ ln det diag(B C_k B^T) - ln det (B C_k B^T) ]
//! ```
//!
//! by iterative sweeps of stabilized 2x2 transforms. `J` is non-negative
//! (Hadamard's inequality), zero exactly on jointly diagonalizable sets, and
//! invariant both under row scaling of `B` and under scaling each member by
//! its own positive factor — so the criterion measures joint structure, not
//! scale. Two matrices are always exactly diagonalizable in closed form; see
//! [`jd2`].

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{SpdMatrix, SymmetricMatrix};
use crate::means::arithmetic_mean;
use crate::par;
use crate::set::MatrixSet;

/// Invertible transform pair: `b` diagonalizes, `a` is its cached inverse
/// (demixing and mixing views of the same estimate).
#[derive(Debug, Clone)]
pub struct Diagonalizer {
    b: DMatrix<f64>,
    a: DMatrix<f64>,
    criterion_value: f64,
}

/// Acceptable drift of `B * A` from the identity, per unit dimension.
const INVERSE_DRIFT_TOL: f64 = 1e-9;

impl Diagonalizer {
    /// Validates that `a` actually inverts `b`: `||B A - I|| <= 1e-9 N`.
    pub fn new(b: DMatrix<f64>, a: DMatrix<f64>, criterion_value: f64) -> Result<Self> {
        let n = b.nrows();
        if b.ncols() != n || a.nrows() != n || a.ncols() != n || n == 0 {
            return Err(Error::NotSquare {
                rows: a.nrows(),
                cols: a.ncols(),
            });
        }
        let drift = (&b * &a - DMatrix::identity(n, n)).norm();
        if !(drift <= INVERSE_DRIFT_TOL * n as f64) {
            return Err(Error::Singular {
                context: "diagonalizer inverse drifted from identity",
            });
        }
        Ok(Self {
            b,
            a,
            criterion_value,
        })
    }

    /// Inverts `b` and wraps; fails on (near-)singular input.
    pub fn from_b(b: DMatrix<f64>, criterion_value: f64) -> Result<Self> {
        let a = b.clone().try_inverse().ok_or(Error::Singular {
            context: "diagonalizer is not invertible",
        })?;
        Self::new(b, a, criterion_value)
    }

    pub fn b(&self) -> &DMatrix<f64> {
        &self.b
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn criterion_value(&self) -> f64 {
        self.criterion_value
    }

    pub fn dim(&self) -> usize {
        self.b.nrows()
    }
}

/// Result of a sweep-based AJD run.
#[derive(Debug, Clone)]
pub struct AjdReport {
    pub diagonalizer: Diagonalizer,
    /// Criterion after initialization and after each sweep; non-increasing
    /// as recorded.
    pub criterion_trace: Vec<f64>,
    pub sweeps: usize,
    pub converged: bool,
}

/// Stopping policy for [`ajd_pham`].
#[derive(Debug, Clone, Copy)]
pub struct AjdConfig {
    /// Stop once a sweep reduces the criterion by no more than
    /// `J_0 * 10^(stop_decrement_db/10)`; -100 dB retains ten significant
    /// decades of descent.
    pub stop_decrement_db: f64,
    pub max_sweeps: usize,
}

impl Default for AjdConfig {
    fn default() -> Self {
        Self {
            stop_decrement_db: -100.0,
            max_sweeps: 1000,
        }
    }
}

/// The AJD criterion `J(B)` above. Weights are the set's, normalized by
/// their total. Log-determinants go through Cholesky factors, never raw
/// determinants.
pub fn ajd_criterion(b: &DMatrix<f64>, set: &MatrixSet) -> Result<f64> {
    let n = set.dim();
    if b.nrows() != n || b.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: b.nrows(),
        });
    }
    let terms = par::map_collect(set.members(), |c| -> Result<f64> {
        let m = SymmetricMatrix::symmetrize(b * c.matrix() * b.transpose()).into_matrix();
        let mut ln_diag = 0.0;
        for i in 0..n {
            let d = m[(i, i)];
            if d <= 0.0 {
                return Err(Error::Singular {
                    context: "transformed matrix lost a positive diagonal",
                });
            }
            ln_diag += d.ln();
        }
        let chol = nalgebra::Cholesky::new(m).ok_or(Error::Singular {
            context: "transformed matrix is not positive definite",
        })?;
        let mut ln_full = 0.0;
        for i in 0..n {
            ln_full += 2.0 * chol.l_dirty()[(i, i)].ln();
        }
        Ok(ln_diag - ln_full)
    });
    let mut j = 0.0;
    for (term, w) in terms.into_iter().zip(set.weights()) {
        j += w * term?;
    }
    Ok(j / set.weight_total())
}

/// Exact joint diagonalizer of two SPD matrices: whiten by `C1^-1/2`, then
/// rotate onto the eigenvectors of the whitened `C2`. `B C1 B^T = I` and
/// `B C2 B^T` is diagonal with the eigenvalues of `C1^-1 C2`.
pub fn jd2(c1: &SpdMatrix, c2: &SpdMatrix) -> Result<Diagonalizer> {
    if c1.dim() != c2.dim() {
        return Err(Error::DimensionMismatch {
            expected: c1.dim(),
            found: c2.dim(),
        });
    }
    let w = c1.inv_sqrt()?;
    let r = c1.sqrt()?;
    let eig = c2.congruence(w.matrix())?.eigen()?;
    let b = eig.vectors.transpose() * w.matrix();
    let a = r.matrix() * &eig.vectors;
    let pair = MatrixSet::new(vec![c1.clone(), c2.clone()])?;
    let j = ajd_criterion(&b, &pair)?;
    Diagonalizer::new(b, a, j)
}

/// [`jd2`] with rows rescaled so the two transformed diagonals multiply to
/// the identity (`D1 D2 = I`). In this scaling `A A^T` is the geometric mean
/// of the pair.
pub fn jd2_unit_scaled(c1: &SpdMatrix, c2: &SpdMatrix) -> Result<Diagonalizer> {
    let d = jd2(c1, c2)?;
    let w = c1.inv_sqrt()?;
    let eig = c2.congruence(w.matrix())?.eigen()?;
    let n = d.dim();
    let mut b = d.b().clone();
    let mut a = d.a().clone();
    for i in 0..n {
        let s = eig.values[i].powf(-0.25);
        for c in 0..n {
            b[(i, c)] *= s;
            a[(c, i)] /= s;
        }
    }
    Diagonalizer::new(b, a, d.criterion_value())
}

/// How far a matrix is from being a permutation with row scales: Frobenius
/// mass outside each row's dominant entry, relative to the dominant mass.
/// Infinite when two rows claim the same column.
pub fn scaled_permutation_residual(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    let mut used = vec![false; m.ncols()];
    let mut dom = 0.0;
    let mut rest = 0.0;
    for r in 0..n {
        let mut best = 0usize;
        for c in 1..m.ncols() {
            if m[(r, c)].abs() > m[(r, best)].abs() {
                best = c;
            }
        }
        if std::mem::replace(&mut used[best], true) {
            return f64::INFINITY;
        }
        for c in 0..m.ncols() {
            let v = m[(r, c)] * m[(r, c)];
            if c == best {
                dom += v;
            } else {
                rest += v;
            }
        }
    }
    if dom == 0.0 {
        return f64::INFINITY;
    }
    (rest / dom).sqrt()
}

struct PairStats {
    g12: f64,
    g21: f64,
    w12: f64,
    w21: f64,
}

fn pair_stats(ms: &[DMatrix<f64>], weights: &[f64], total: f64, i: usize, j: usize) -> Result<PairStats> {
    let mut s = PairStats {
        g12: 0.0,
        g21: 0.0,
        w12: 0.0,
        w21: 0.0,
    };
    for (m, &w) in ms.iter().zip(weights) {
        let a = m[(i, i)];
        let b = m[(j, j)];
        let c = m[(i, j)];
        if a <= 0.0 || b <= 0.0 {
            return Err(Error::Singular {
                context: "pair update hit a non-positive diagonal",
            });
        }
        s.g12 += w * c / a;
        s.g21 += w * c / b;
        s.w12 += w * b / a;
        s.w21 += w * a / b;
    }
    s.g12 /= total;
    s.g21 /= total;
    s.w12 /= total;
    s.w21 /= total;
    Ok(s)
}

/// One stabilized 2x2 update; returns the two off-diagonal entries of the
/// unit-diagonal transform applied to rows `(i, j)`.
fn pair_transform(s: &PairStats) -> Result<(f64, f64)> {
    let omega = (s.w12 * s.w21).sqrt();
    let wr = (s.w21 / s.w12).sqrt();
    let t1 = (wr * s.g12 + s.g21) / (omega + 1.0);
    // the second direction degenerates when all transformed matrices agree
    // on this pair (omega -> 1); the floor keeps it finite and the numerator
    // vanishes in that case anyway
    let t2 = (wr * s.g12 - s.g21) / (omega - 1.0).max(1e-9);
    let h12 = t1 + t2;
    let h21 = (t1 - t2) / wr;
    let p = h12 * h21;
    if !(p < 1.0) {
        return Err(Error::Singular {
            context: "pair update left the positive cone",
        });
    }
    let theta = 1.0 + (1.0 - p).sqrt();
    Ok((-h12 / theta, -h21 / theta))
}

fn apply_to_rows(b: &mut DMatrix<f64>, i: usize, j: usize, alpha: f64, beta: f64) {
    for c in 0..b.ncols() {
        let bi = b[(i, c)];
        let bj = b[(j, c)];
        b[(i, c)] = bi + alpha * bj;
        b[(j, c)] = beta * bi + bj;
    }
}

fn apply_congruence(m: &mut DMatrix<f64>, i: usize, j: usize, alpha: f64, beta: f64) {
    let n = m.nrows();
    for c in 0..n {
        let mi = m[(i, c)];
        let mj = m[(j, c)];
        m[(i, c)] = mi + alpha * mj;
        m[(j, c)] = beta * mi + mj;
    }
    for r in 0..n {
        let mi = m[(r, i)];
        let mj = m[(r, j)];
        m[(r, i)] = mi + alpha * mj;
        m[(r, j)] = beta * mi + mj;
    }
    for c in 0..n {
        let v = 0.5 * (m[(i, c)] + m[(c, i)]);
        m[(i, c)] = v;
        m[(c, i)] = v;
        let v = 0.5 * (m[(j, c)] + m[(c, j)]);
        m[(j, c)] = v;
        m[(c, j)] = v;
    }
}

/// Pham's AJD initialized at the inverse square root of the weighted
/// arithmetic mean.
pub fn ajd_pham(set: &MatrixSet, cfg: &AjdConfig) -> Result<AjdReport> {
    let b0 = arithmetic_mean(set)?.inv_sqrt()?.into_matrix();
    ajd_pham_from(set, b0, cfg)
}

/// Pham's AJD from a caller-supplied starting transform. Useful when two
/// runs must share their initialization, e.g. to compare traces across
/// rescaled copies of a set.
pub fn ajd_pham_from(set: &MatrixSet, b0: DMatrix<f64>, cfg: &AjdConfig) -> Result<AjdReport> {
    let n = set.dim();
    if set.len() < 2 {
        return Err(Error::InvalidSet(
            "joint diagonalization needs at least two members".into(),
        ));
    }
    if b0.nrows() != n || b0.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: b0.nrows(),
        });
    }
    if cfg.max_sweeps == 0 {
        return Err(Error::InvalidParameter("max_sweeps must be positive".into()));
    }
    let abar = arithmetic_mean(set)?;
    let weights = set.weights();
    let total = set.weight_total();

    let mut b = b0;
    let j0 = ajd_criterion(&b, set)?;
    let stop = j0 * 10f64.powf(cfg.stop_decrement_db / 10.0);
    let mut trace = vec![j0];
    let mut converged = false;
    let mut sweeps = 0;

    while sweeps < cfg.max_sweeps {
        // fresh congruences each sweep: cheaper than perfect incremental
        // bookkeeping and immune to drift accumulated by the 2x2 updates
        let mut ms = par::map_collect(set.members(), |c| {
            SymmetricMatrix::symmetrize(&b * c.matrix() * b.transpose()).into_matrix()
        });
        for i in 0..n {
            for j in (i + 1)..n {
                let stats = pair_stats(&ms, weights, total, i, j)?;
                let (alpha, beta) = pair_transform(&stats)?;
                apply_to_rows(&mut b, i, j, alpha, beta);
                for m in &mut ms {
                    apply_congruence(m, i, j, alpha, beta);
                }
            }
        }
        // row normalization: unit diagonal against the weighted arithmetic
        // mean; leaves the criterion untouched
        let scale = SymmetricMatrix::symmetrize(&b * abar.matrix() * b.transpose()).into_matrix();
        for i in 0..n {
            let d = scale[(i, i)];
            if d <= 0.0 {
                return Err(Error::Singular {
                    context: "row normalization hit a non-positive diagonal",
                });
            }
            let s = 1.0 / d.sqrt();
            for c in 0..n {
                b[(i, c)] *= s;
            }
        }
        sweeps += 1;

        let j = ajd_criterion(&b, set)?;
        let last = *trace.last().expect("trace starts non-empty");
        if last - j <= stop {
            // converged (or plateaued into rounding noise); record the final
            // value only if it preserves monotonicity
            if j <= last {
                trace.push(j);
            }
            converged = true;
            break;
        }
        trace.push(j);
    }

    let j_final = *trace.last().expect("trace starts non-empty");
    let diagonalizer = Diagonalizer::from_b(b, j_final)?;
    Ok(AjdReport {
        diagonalizer,
        criterion_trace: trace,
        sweeps,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::geomean2;
    use crate::simgen::{generate, random_spd, GeneratorConfig};
    use approx::assert_relative_eq;
    use nalgebra::dmatrix;

    /// Criterion oracle from raw determinants; valid for small well-scaled
    /// matrices, which is all the oracle needs.
    fn criterion_by_determinants(set: &MatrixSet, b: &DMatrix<f64>) -> f64 {
        let mut j = 0.0;
        for (c, w) in set.members().iter().zip(set.weights()) {
            let m = b * c.matrix() * b.transpose();
            let diag_prod: f64 = (0..m.nrows()).map(|i| m[(i, i)]).product();
            j += w * (diag_prod.ln() - m.determinant().ln());
        }
        j / set.weight_total()
    }

    fn noisy_set(sigma: f64, seed: u64) -> MatrixSet {
        generate(&GeneratorConfig::new(5, 8, sigma, seed)).unwrap().set
    }

    #[test]
    fn criterion_matches_determinant_oracle() {
        let set = noisy_set(0.3, 5);
        let b = crate::simgen::random_invertible(5, 17).unwrap();
        let j = ajd_criterion(&b, &set).unwrap();
        assert_relative_eq!(j, criterion_by_determinants(&set, &b), max_relative = 1e-10);
        assert!(j > 0.0);
    }

    #[test]
    fn criterion_is_zero_for_diagonal_family() {
        let members = (0..4)
            .map(|k| crate::simgen::random_diagonal_spd(4, 900 + k).unwrap())
            .collect();
        let set = MatrixSet::new(members).unwrap();
        let j = ajd_criterion(&DMatrix::identity(4, 4), &set).unwrap();
        assert!(j.abs() < 1e-14);
    }

    #[test]
    fn criterion_invariances() {
        let set = noisy_set(0.5, 9);
        let b = crate::simgen::random_invertible(5, 23).unwrap();
        let j = ajd_criterion(&b, &set).unwrap();

        let mut scaled_rows = b.clone();
        for c in 0..5 {
            scaled_rows[(0, c)] *= 3.0;
            scaled_rows[(3, c)] *= 0.2;
        }
        assert_relative_eq!(j, ajd_criterion(&scaled_rows, &set).unwrap(), max_relative = 1e-12);

        let scaled_members = set.scaled_each(&[0.5, 2.0, 7.0, 1.0, 0.1, 3.0, 1.5, 0.25]).unwrap();
        assert_relative_eq!(
            j,
            ajd_criterion(&b, &scaled_members).unwrap(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn jd2_whitens_and_diagonalizes() {
        let c1 = random_spd(5, 61).unwrap();
        let c2 = random_spd(5, 62).unwrap();
        let d = jd2(&c1, &c2).unwrap();
        let m1 = d.b() * c1.matrix() * d.b().transpose();
        let m2 = d.b() * c2.matrix() * d.b().transpose();
        assert!((m1 - DMatrix::identity(5, 5)).norm() < 1e-12);
        for i in 0..5 {
            for j in 0..5 {
                if i != j {
                    assert!(m2[(i, j)].abs() < 1e-12 * m2.norm());
                }
            }
        }
        assert!(d.criterion_value().abs() < 1e-12);
    }

    #[test]
    fn jd2_unit_scaled_diagonals_multiply_to_identity() {
        let c1 = random_spd(4, 71).unwrap();
        let c2 = random_spd(4, 72).unwrap();
        let d = jd2_unit_scaled(&c1, &c2).unwrap();
        let m1 = d.b() * c1.matrix() * d.b().transpose();
        let m2 = d.b() * c2.matrix() * d.b().transpose();
        for i in 0..4 {
            assert_relative_eq!(m1[(i, i)] * m2[(i, i)], 1.0, max_relative = 1e-10);
        }
        // in this scaling the mixing matrix reproduces the geometric mean
        let g = geomean2(&c1, &c2).unwrap();
        let aat = d.a() * d.a().transpose();
        assert!((aat - g.matrix()).norm() < 1e-9 * g.frobenius_norm());
    }

    #[test]
    fn pham_recovers_exact_joint_structure() {
        let gen = generate(&GeneratorConfig::new(5, 8, 0.0, 21)).unwrap();
        let report = ajd_pham(&gen.set, &AjdConfig::default()).unwrap();
        assert!(report.converged);
        assert!(report.diagonalizer.criterion_value() < 1e-12);
        // B must match inv(a_true) up to row permutation and scale
        let resid = scaled_permutation_residual(&(report.diagonalizer.b() * &gen.a_true));
        assert!(resid < 1e-6, "residual {resid}");
    }

    #[test]
    fn pham_trace_is_monotone_as_recorded() {
        for sigma in [0.1, 1.0] {
            let set = noisy_set(sigma, 33);
            let report = ajd_pham(&set, &AjdConfig::default()).unwrap();
            assert!(report.converged);
            assert!(report.sweeps >= 1);
            assert_eq!(report.criterion_trace.is_empty(), false);
            for w in report.criterion_trace.windows(2) {
                assert!(w[1] <= w[0], "trace increased: {} -> {}", w[0], w[1]);
            }
            for &j in &report.criterion_trace {
                assert!(j >= 0.0);
            }
        }
    }

    #[test]
    fn per_member_scaling_leaves_trace_unchanged() {
        let set = noisy_set(0.4, 45);
        let b0 = arithmetic_mean(&set).unwrap().inv_sqrt().unwrap().into_matrix();
        let r1 = ajd_pham_from(&set, b0.clone(), &AjdConfig::default()).unwrap();
        let scaled = set.scaled_each(&[3.0, 0.5, 10.0, 1.0, 0.2, 5.0, 2.0, 0.8]).unwrap();
        let r2 = ajd_pham_from(&scaled, b0, &AjdConfig::default()).unwrap();
        assert_eq!(r1.criterion_trace.len(), r2.criterion_trace.len());
        let scale = r1.criterion_trace[0].max(1.0);
        for (a, b) in r1.criterion_trace.iter().zip(&r2.criterion_trace) {
            assert!((a - b).abs() <= 1e-10 * scale, "{a} vs {b}");
        }
    }

    #[test]
    fn pham_matches_jd2_on_pairs() {
        let c1 = random_spd(4, 81).unwrap();
        let c2 = random_spd(4, 82).unwrap();
        let set = MatrixSet::new(vec![c1.clone(), c2.clone()]).unwrap();
        let report = ajd_pham(&set, &AjdConfig::default()).unwrap();
        assert!(report.converged);
        let exact = jd2(&c1, &c2).unwrap();
        // same transform up to row permutation and scale
        let resid = scaled_permutation_residual(&(report.diagonalizer.b() * exact.a()));
        assert!(resid < 1e-8, "residual {resid}");
    }

    #[test]
    fn sweep_cap_reports_non_convergence() {
        let set = noisy_set(1.0, 50);
        let cfg = AjdConfig {
            stop_decrement_db: -100.0,
            max_sweeps: 1,
        };
        let report = ajd_pham(&set, &cfg).unwrap();
        assert!(!report.converged);
        assert_eq!(report.sweeps, 1);
    }

    #[test]
    fn rejects_single_member_sets() {
        let set = MatrixSet::new(vec![random_spd(3, 1).unwrap()]).unwrap();
        assert!(ajd_pham(&set, &AjdConfig::default()).is_err());
    }

    #[test]
    fn scaled_permutation_residual_cases() {
        let mut perm = DMatrix::zeros(3, 3);
        perm[(0, 2)] = 2.0;
        perm[(1, 0)] = -0.5;
        perm[(2, 1)] = 1.0;
        assert_eq!(scaled_permutation_residual(&perm), 0.0);
        perm[(0, 0)] = 1e-8;
        assert!(scaled_permutation_residual(&perm) < 1e-7);
        // rows 0 and 1 both dominated by column 0
        let collide = dmatrix![1.0, 0.1, 0.0; 0.9, 0.2, 0.0; 0.0, 0.0, 1.0];
        assert_eq!(scaled_permutation_residual(&collide), f64::INFINITY);
    }
}
