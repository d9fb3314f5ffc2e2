//! Synthetic SPD matrix sets with a known joint structure.
//!
//! Each generated member has the form `C_k = 10 (A D_k A^T + S_k)` with one
//! shared invertible mixing matrix `A`, per-member positive diagonals `D_k`
//! and per-member noise `S_k = Q Q^T / N` whose entries scale with `sigma`.
//! At `sigma = 0` the set is exactly jointly diagonalizable by `A^-1`, and
//! increasing `sigma` moves it away from that ideal in a controlled way.
//!
//! Every draw is tied to a `(seed, stream)` pair of a counter-based ChaCha
//! generator, so member `k` sees the same randomness regardless of how many
//! redraws earlier members needed: generation is reproducible member by
//! member, not just run by run.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};
use crate::linalg::{SpdMatrix, SymmetricMatrix};
use crate::set::MatrixSet;

/// Smallest acceptable singular-value ratio for a raw Gaussian mixing
/// matrix; anything worse is redrawn so the set stays numerically SPD.
const MIN_MIXING_SV_RATIO: f64 = 1e-3;

/// Parameters of [`generate`].
#[derive(Debug, Clone)]
pub struct GeneratorConfig {
    /// Matrix dimension `N >= 2`.
    pub dim: usize,
    /// Number of members `K >= 2`.
    pub count: usize,
    /// Noise scale `sigma >= 0`; `0` gives an exactly jointly
    /// diagonalizable set.
    pub sigma: f64,
    /// Lower clamp on the diagonal source values, keeping every `D_k`
    /// safely positive definite.
    pub eig_floor: f64,
    /// When set, the mixing matrix is constructed with exactly this
    /// 2-norm condition number instead of being drawn raw.
    pub cond_target: Option<f64>,
    pub seed: u64,
}

impl GeneratorConfig {
    pub fn new(dim: usize, count: usize, sigma: f64, seed: u64) -> Self {
        Self {
            dim,
            count,
            sigma,
            eig_floor: 1e-4,
            cond_target: None,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.dim < 2 {
            return Err(Error::InvalidParameter(format!(
                "dimension must be at least 2, got {}",
                self.dim
            )));
        }
        if self.count < 2 {
            return Err(Error::InvalidParameter(format!(
                "count must be at least 2, got {}",
                self.count
            )));
        }
        if !self.sigma.is_finite() || self.sigma < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "sigma must be finite and non-negative, got {}",
                self.sigma
            )));
        }
        if !self.eig_floor.is_finite() || self.eig_floor <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "eig_floor must be finite and positive, got {}",
                self.eig_floor
            )));
        }
        if let Some(c) = self.cond_target {
            if !c.is_finite() || c < 1.0 {
                return Err(Error::InvalidParameter(format!(
                    "cond_target must be finite and at least 1, got {c}"
                )));
            }
        }
        Ok(())
    }
}

/// A generated set together with the ground truth that produced it: each
/// member reconstructs as `10 (a_true d_true[k] a_true^T + sigma_noise[k])`
/// to within rounding.
#[derive(Debug, Clone)]
pub struct GeneratedSet {
    pub set: MatrixSet,
    /// Shared mixing matrix; `a_true^-1` jointly diagonalizes the set when
    /// the noise matrices vanish.
    pub a_true: DMatrix<f64>,
    /// True diagonals, one vector per member.
    pub d_true: Vec<DVector<f64>>,
    /// Realized noise matrices, one per member; all zero at `sigma = 0`.
    pub sigma_noise: Vec<SymmetricMatrix>,
    /// Number of redraws taken (ill-conditioned mixing matrices, members
    /// that failed validation); zero on typical runs.
    pub regenerated: usize,
}

impl GeneratedSet {
    /// Mean over members of `||10 S_k||_F / ||C_k||_F`: how much of each
    /// member is noise. Grows with the generator's `sigma`.
    pub fn noise_ratio(&self) -> f64 {
        let k = self.set.len() as f64;
        self.set
            .members()
            .iter()
            .zip(&self.sigma_noise)
            .map(|(c, s)| 10.0 * s.frobenius_norm() / c.frobenius_norm())
            .sum::<f64>()
            / k
    }
}

// Stream id layout: role in the top byte, member index below. Every
// consumer of randomness gets its own stream off the one user seed.
const ROLE_MIXING: u64 = 0;
const ROLE_DIAG: u64 = 1;
const ROLE_NOISE: u64 = 2;
const ROLE_AUX: u64 = 3;

fn stream_rng(seed: u64, role: u64, k: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream((role << 56) | k);
    rng
}

/// SplitMix64 finalizer; decorrelates derived seeds from the user seed.
pub(crate) fn mix_seed(seed: u64, salt: u64) -> u64 {
    let mut z = seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Box-Muller transform; `1 - u` keeps the logarithm away from zero.
fn standard_normal<R: Rng>(rng: &mut R) -> f64 {
    let u1 = 1.0 - rng.random::<f64>();
    let u2 = rng.random::<f64>();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Column-major fill, in a fixed order so results never depend on iterator
/// internals.
fn gaussian_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(rows, cols);
    for j in 0..cols {
        for i in 0..rows {
            m[(i, j)] = standard_normal(rng);
        }
    }
    m
}

fn sv_ratio(m: &DMatrix<f64>) -> f64 {
    let sv = m.singular_values();
    let max = sv.iter().cloned().fold(0.0f64, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if max > 0.0 {
        min / max
    } else {
        0.0
    }
}

/// Orthogonal factor of a QR decomposition with the signs fixed so the
/// triangular factor has a positive diagonal; unique for a full-rank input.
fn qr_orthogonal(m: DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    let qr = m.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            for i in 0..n {
                q[(i, j)] = -q[(i, j)];
            }
        }
    }
    q
}

/// Invertible matrix with 2-norm condition number exactly `kappa`:
/// `A = U diag(s) V^T` with `U`, `V` random orthogonal and singular values
/// log-spaced from 1 down to `1/kappa`.
pub fn generate_conditioned_mixing(n: usize, kappa: f64, seed: u64) -> Result<DMatrix<f64>> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "dimension must be at least 2, got {n}"
        )));
    }
    if !kappa.is_finite() || kappa < 1.0 {
        return Err(Error::InvalidParameter(format!(
            "condition target must be finite and at least 1, got {kappa}"
        )));
    }
    let mut rng = stream_rng(seed, ROLE_MIXING, 0);
    let u = qr_orthogonal(gaussian_matrix(&mut rng, n, n));
    let v = qr_orthogonal(gaussian_matrix(&mut rng, n, n));
    let s = DVector::from_fn(n, |i, _| kappa.powf(-(i as f64) / (n as f64 - 1.0)));
    Ok(u * DMatrix::from_diagonal(&s) * v.transpose())
}

fn draw_mixing(cfg: &GeneratorConfig, regenerated: &mut usize) -> Result<DMatrix<f64>> {
    let n = cfg.dim;
    match cfg.cond_target {
        Some(kappa) => generate_conditioned_mixing(n, kappa, cfg.seed),
        None => {
            let mut rng = stream_rng(cfg.seed, ROLE_MIXING, 0);
            for _ in 0..1000 {
                let a = gaussian_matrix(&mut rng, n, n);
                if sv_ratio(&a) >= MIN_MIXING_SV_RATIO {
                    return Ok(a);
                }
                *regenerated += 1;
            }
            Err(Error::Singular {
                context: "mixing matrix redraw limit reached",
            })
        }
    }
}

fn member_parts<R: Rng>(
    cfg: &GeneratorConfig,
    diag_rng: &mut R,
    noise_rng: &mut R,
) -> (DVector<f64>, SymmetricMatrix) {
    let n = cfg.dim;
    let d = DVector::from_fn(n, |_, _| {
        let g = standard_normal(diag_rng);
        (g * g).max(cfg.eig_floor)
    });
    let noise = if cfg.sigma > 0.0 {
        let q = gaussian_matrix(noise_rng, n, n) * cfg.sigma;
        SymmetricMatrix::symmetrize(&q * q.transpose() / n as f64)
    } else {
        SymmetricMatrix::zeros(n)
    };
    (d, noise)
}

fn assemble_member(a: &DMatrix<f64>, d: &DVector<f64>, noise: &SymmetricMatrix) -> Result<SpdMatrix> {
    let core = a * DMatrix::from_diagonal(d) * a.transpose();
    SpdMatrix::new((core + noise.matrix()) * 10.0)
}

/// Draws a full set per the model above. Fails only on invalid parameters
/// or if redraw limits are exhausted, which a finite `sigma` and the
/// default `eig_floor` make practically unreachable.
pub fn generate(cfg: &GeneratorConfig) -> Result<GeneratedSet> {
    cfg.validate()?;
    let mut regenerated = 0usize;
    let a = draw_mixing(cfg, &mut regenerated)?;

    let mut members = Vec::with_capacity(cfg.count);
    let mut d_true = Vec::with_capacity(cfg.count);
    let mut sigma_noise = Vec::with_capacity(cfg.count);
    for k in 0..cfg.count {
        // Retries move to fresh streams (attempt in the high half of the
        // stream id) so they neither disturb nor reuse other members' draws.
        let mut last = None;
        for attempt in 0..33u64 {
            if attempt > 0 {
                regenerated += 1;
            }
            let sub = (attempt << 32) | k as u64;
            let mut diag_rng = stream_rng(cfg.seed, ROLE_DIAG, sub);
            let mut noise_rng = stream_rng(cfg.seed, ROLE_NOISE, sub);
            let (d, noise) = member_parts(cfg, &mut diag_rng, &mut noise_rng);
            match assemble_member(&a, &d, &noise) {
                Ok(c) => {
                    members.push(c);
                    d_true.push(d);
                    sigma_noise.push(noise);
                    last = None;
                    break;
                }
                Err(e) => last = Some(e),
            }
        }
        if let Some(e) = last {
            return Err(e);
        }
    }

    Ok(GeneratedSet {
        set: MatrixSet::new(members)?,
        a_true: a,
        d_true,
        sigma_noise,
        regenerated,
    })
}

/// Well-conditioned random SPD test matrix: `G G^T / n + I/2`.
pub fn random_spd(dim: usize, seed: u64) -> Result<SpdMatrix> {
    let mut rng = stream_rng(mix_seed(seed, 0xA1), ROLE_AUX, 0);
    let g = gaussian_matrix(&mut rng, dim, dim);
    SpdMatrix::new(&g * g.transpose() / dim as f64 + DMatrix::identity(dim, dim) * 0.5)
}

/// Random symmetric (generally indefinite) test matrix with unit-scale
/// entries.
pub fn random_symmetric(dim: usize, seed: u64) -> Result<SymmetricMatrix> {
    let mut rng = stream_rng(mix_seed(seed, 0xB2), ROLE_AUX, 0);
    SymmetricMatrix::new(gaussian_matrix(&mut rng, dim, dim))
}

/// Random invertible test matrix; redraws the rare near-singular sample.
pub fn random_invertible(dim: usize, seed: u64) -> Result<DMatrix<f64>> {
    let mut rng = stream_rng(mix_seed(seed, 0xC3), ROLE_AUX, 0);
    for _ in 0..1000 {
        let a = gaussian_matrix(&mut rng, dim, dim);
        if sv_ratio(&a) >= MIN_MIXING_SV_RATIO {
            return Ok(a);
        }
    }
    Err(Error::Singular {
        context: "invertible test matrix redraw limit reached",
    })
}

/// Random orthogonal test matrix (QR of a Gaussian, signs fixed).
pub fn random_orthogonal(dim: usize, seed: u64) -> Result<DMatrix<f64>> {
    let mut rng = stream_rng(mix_seed(seed, 0xD4), ROLE_AUX, 0);
    Ok(qr_orthogonal(gaussian_matrix(&mut rng, dim, dim)))
}

/// Random diagonal SPD matrix with log-normal entries; handy for commuting
/// families.
pub fn random_diagonal_spd(dim: usize, seed: u64) -> Result<SpdMatrix> {
    let mut rng = stream_rng(mix_seed(seed, 0xE5), ROLE_AUX, 0);
    let d: Vec<f64> = (0..dim).map(|_| standard_normal(&mut rng).exp()).collect();
    SpdMatrix::from_diagonal(&d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn config_validation() {
        assert!(generate(&GeneratorConfig::new(1, 5, 0.1, 0)).is_err());
        assert!(generate(&GeneratorConfig::new(4, 1, 0.1, 0)).is_err());
        assert!(generate(&GeneratorConfig::new(4, 5, -0.1, 0)).is_err());
        let mut cfg = GeneratorConfig::new(4, 5, 0.1, 0);
        cfg.cond_target = Some(0.5);
        assert!(generate(&cfg).is_err());
        cfg.cond_target = Some(1.0);
        assert!(generate(&cfg).is_ok());
    }

    #[test]
    fn same_seed_reproduces_exactly() {
        let cfg = GeneratorConfig::new(6, 8, 0.3, 42);
        let g1 = generate(&cfg).unwrap();
        let g2 = generate(&cfg).unwrap();
        assert_eq!(g1.a_true, g2.a_true);
        for k in 0..8 {
            assert_eq!(g1.set.members()[k].matrix(), g2.set.members()[k].matrix());
            assert_eq!(g1.d_true[k], g2.d_true[k]);
        }
    }

    #[test]
    fn different_seeds_differ() {
        let g1 = generate(&GeneratorConfig::new(4, 4, 0.2, 1)).unwrap();
        let g2 = generate(&GeneratorConfig::new(4, 4, 0.2, 2)).unwrap();
        assert_ne!(g1.set.members()[0].matrix(), g2.set.members()[0].matrix());
    }

    #[test]
    fn members_reconstruct_from_ground_truth() {
        let g = generate(&GeneratorConfig::new(5, 6, 0.4, 13)).unwrap();
        for k in 0..6 {
            let rebuilt = (&g.a_true * DMatrix::from_diagonal(&g.d_true[k]) * g.a_true.transpose()
                + g.sigma_noise[k].matrix())
                * 10.0;
            let c = g.set.members()[k].matrix();
            assert!((rebuilt - c).norm() <= 1e-12 * c.norm());
        }
    }

    #[test]
    fn zero_sigma_is_exactly_jointly_diagonalizable() {
        let g = generate(&GeneratorConfig::new(5, 6, 0.0, 7)).unwrap();
        assert!(g.sigma_noise.iter().all(|s| s.frobenius_norm() == 0.0));
        let b = g.a_true.clone().try_inverse().unwrap();
        for (k, c) in g.set.members().iter().enumerate() {
            let d = &b * c.matrix() * b.transpose() / 10.0;
            for i in 0..5 {
                assert_relative_eq!(d[(i, i)], g.d_true[k][i], max_relative = 1e-8);
                for j in 0..5 {
                    if i != j {
                        assert!(d[(i, j)].abs() < 1e-8 * d.norm());
                    }
                }
            }
        }
    }

    #[test]
    fn eig_floor_clamps_diagonals() {
        let mut cfg = GeneratorConfig::new(4, 50, 0.0, 11);
        cfg.eig_floor = 0.5;
        let g = generate(&cfg).unwrap();
        for d in &g.d_true {
            assert!(d.iter().all(|&x| x >= 0.5));
        }
    }

    #[test]
    fn cond_target_is_exact() {
        let mut cfg = GeneratorConfig::new(6, 4, 0.1, 3);
        cfg.cond_target = Some(25.0);
        let g = generate(&cfg).unwrap();
        let sv = g.a_true.singular_values();
        let max = sv.iter().cloned().fold(0.0f64, f64::max);
        let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
        assert_relative_eq!(max / min, 25.0, max_relative = 1e-10);
    }

    #[test]
    fn conditioned_mixing_construction() {
        // kappa = 1 collapses to an orthogonal matrix
        let a = generate_conditioned_mixing(6, 1.0, 9).unwrap();
        assert!((a.transpose() * &a - DMatrix::identity(6, 6)).norm() < 1e-12);

        for kappa in [2.0, 10.0, 50.0] {
            let a = generate_conditioned_mixing(6, kappa, 9).unwrap();
            let sv = a.singular_values();
            let max = sv.iter().cloned().fold(0.0f64, f64::max);
            let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
            assert_relative_eq!(max / min, kappa, max_relative = 1e-10);
        }
        assert!(generate_conditioned_mixing(6, 0.9, 9).is_err());
    }

    #[test]
    fn noise_ratio_grows_with_sigma() {
        let mut previous = 0.0;
        for sigma in [0.01, 0.1, 1.0] {
            let mut total = 0.0;
            for seed in 0..20 {
                total += generate(&GeneratorConfig::new(10, 20, sigma, seed))
                    .unwrap()
                    .noise_ratio();
            }
            let mean = total / 20.0;
            assert!(mean > previous, "sigma {sigma}: {mean} <= {previous}");
            previous = mean;
        }
    }

    #[test]
    fn helpers_are_deterministic_and_well_formed() {
        let a = random_spd(5, 19).unwrap();
        let b = random_spd(5, 19).unwrap();
        assert_eq!(a.matrix(), b.matrix());

        let q = random_orthogonal(5, 19).unwrap();
        let qq = q.transpose() * &q;
        assert!((qq - DMatrix::identity(5, 5)).norm() < 1e-12);

        let f = random_invertible(5, 19).unwrap();
        assert!(f.determinant().abs() > 1e-6);

        let d = random_diagonal_spd(5, 19).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                if i != j {
                    assert_eq!(d.matrix()[(i, j)], 0.0);
                }
            }
        }
        assert_ne!(
            random_symmetric(4, 1).unwrap().matrix(),
            random_symmetric(4, 2).unwrap().matrix()
        );
    }
}
