//! Randomized property suite shared by `cargo test` and the CLI.
//!
//! Each property draws fresh instances per trial from a seeded stream and
//! checks one algebraic identity of the library. One outcome is reported per
//! property; a property marked `expected_fail` documents an identity that
//! does *not* hold (it passes only if trials actually falsify it).

use nalgebra::DMatrix;

use crate::ajd::{
    ajd_criterion, ajd_pham, ajd_pham_from, jd2, scaled_permutation_residual, AjdConfig,
};
use crate::error::Result;
use crate::geometry::{fi_distance, geodesic, geomean2, le_distance, GeodesicParam};
use crate::linalg::SpdMatrix;
use crate::means::{
    ale_mean, ale_mean_with, arithmetic_mean, bhat_mean, fi_mean_gd, fi_mean_mm, harmonic_mean,
    le_mean, SolverConfig, SolverReport,
};
use crate::par;
use crate::set::MatrixSet;
use crate::simgen::{
    generate, mix_seed, random_diagonal_spd, random_invertible, random_orthogonal, random_spd,
    GeneratorConfig,
};

/// Result of running one property over many random trials.
#[derive(Debug, Clone)]
pub struct PropertyOutcome {
    pub name: &'static str,
    pub trials: usize,
    pub failures: usize,
    /// This identity is known not to hold; trials are expected to break it.
    pub expected_fail: bool,
}

impl PropertyOutcome {
    pub fn passed(&self) -> bool {
        if self.expected_fail {
            self.failures > 0
        } else {
            self.failures == 0
        }
    }
}

struct Prop {
    name: &'static str,
    salt: u64,
    expected_fail: bool,
    check: fn(u64) -> Result<bool>,
}

const fn prop(name: &'static str, salt: u64, check: fn(u64) -> Result<bool>) -> Prop {
    Prop {
        name,
        salt,
        expected_fail: false,
        check,
    }
}

const fn antiprop(name: &'static str, salt: u64, check: fn(u64) -> Result<bool>) -> Prop {
    Prop {
        name,
        salt,
        expected_fail: true,
        check,
    }
}

/// Runs every property for `trials` trials each. Trial outcomes other than
/// `Ok(true)` count as failures.
pub fn run_all(seed: u64, trials: usize) -> Vec<PropertyOutcome> {
    PROPS
        .iter()
        .map(|p| {
            let oks = par::map_range(trials, |t| {
                let trial_seed = mix_seed(seed, p.salt.wrapping_add((t as u64) << 20));
                matches!((p.check)(trial_seed), Ok(true))
            });
            PropertyOutcome {
                name: p.name,
                trials,
                failures: oks.iter().filter(|ok| !**ok).count(),
                expected_fail: p.expected_fail,
            }
        })
        .collect()
}

const PROPS: &[Prop] = &[
    prop("fi-distance-positivity", 0x0A, fi_positivity),
    prop("fi-distance-symmetry", 0x01, fi_symmetry),
    prop("fi-distance-congruence-invariance", 0x02, fi_congruence),
    prop("fi-distance-similarity-invariance", 0x0B, fi_similarity),
    prop("fi-distance-inversion-invariance", 0x03, fi_inversion),
    prop("fi-distance-scale-invariance", 0x04, fi_scale),
    prop("fi-dominates-le-distance", 0x05, fi_dominates_le),
    prop("geodesic-arc-proportionality", 0x06, geodesic_arc),
    prop("geodesic-contraction", 0x0C, geodesic_contraction),
    prop("geomean2-argument-symmetry", 0x07, geomean2_symmetry),
    prop("ajd-criterion-nonnegative", 0x10, ajd_nonnegative),
    prop("ajd-trace-monotone", 0x11, ajd_monotone),
    prop("ajd-member-scaling-equivariance", 0x12, ajd_scaling),
    prop("ajd-pair-matches-closed-form", 0x13, ajd_pair),
    prop("mean-permutation-invariance", 0x20, mean_permutation),
    prop("mean-congruence-equivariance", 0x21, mean_congruence),
    prop("le-mean-rotation-equivariance", 0x22, le_rotation),
    antiprop("le-mean-general-congruence", 0x23, le_general_congruence),
    prop("mean-joint-homogeneity", 0x24, mean_homogeneity),
    prop("mean-determinant-identity", 0x25, mean_determinant),
    prop("mean-self-duality", 0x26, mean_self_duality),
    prop("mean-commuting-collapse", 0x27, mean_commuting),
    prop("fi-mean-minimizes-dispersion", 0x28, fi_dispersion),
    prop("fi-mean-variance-inequality", 0x2A, fi_variance_inequality),
    prop("ale-reference-scale-invariance", 0x29, ale_alpha),
];

// -- trial instance helpers --------------------------------------------------

fn spd_pair(seed: u64) -> Result<(SpdMatrix, SpdMatrix)> {
    let n = 2 + (seed % 5) as usize; // 2..=6
    Ok((
        random_spd(n, mix_seed(seed, 0xAA))?,
        random_spd(n, mix_seed(seed, 0xBB))?,
    ))
}

fn noisy_set(seed: u64) -> Result<MatrixSet> {
    let n = 3 + (seed % 3) as usize; // 3..=5
    let k = 4 + ((seed >> 8) % 5) as usize; // 4..=8
    let sigma = [0.05, 0.2, 0.5][((seed >> 16) % 3) as usize];
    Ok(generate(&GeneratorConfig::new(n, k, sigma, seed))?.set)
}

/// Moderate noise keeps every estimator well inside its convergence basin.
fn mild_set(seed: u64) -> Result<MatrixSet> {
    let n = 3 + (seed % 3) as usize;
    let k = 4 + ((seed >> 8) % 5) as usize;
    let sigma = [0.05, 0.2][((seed >> 16) % 2) as usize];
    Ok(generate(&GeneratorConfig::new(n, k, sigma, seed))?.set)
}

fn tight() -> SolverConfig {
    SolverConfig {
        epsilon: 1e-10,
        max_iter: 1000,
        initial_step: 1.0,
    }
}

fn same_matrix(a: &SpdMatrix, b: &SpdMatrix, tol: f64) -> Result<bool> {
    Ok(fi_distance(a, b)? <= tol)
}

fn converged(r: &SolverReport) -> bool {
    r.converged
}

// -- geometry ----------------------------------------------------------------

fn fi_positivity(seed: u64) -> Result<bool> {
    let (c1, c2) = spd_pair(seed)?;
    Ok(fi_distance(&c1, &c1)? <= 1e-12 && fi_distance(&c1, &c2)? > 1e-12)
}

fn fi_symmetry(seed: u64) -> Result<bool> {
    let (c1, c2) = spd_pair(seed)?;
    Ok(fi_distance(&c1, &c2)?.to_bits() == fi_distance(&c2, &c1)?.to_bits())
}

fn fi_congruence(seed: u64) -> Result<bool> {
    let (c1, c2) = spd_pair(seed)?;
    let f = random_invertible(c1.dim(), mix_seed(seed, 0xCC))?;
    let d = fi_distance(&c1, &c2)?;
    let dt = fi_distance(&c1.congruence(&f)?, &c2.congruence(&f)?)?;
    Ok((d - dt).abs() <= 1e-8 * d.max(1.0))
}

/// Similarity by an orthogonal matrix keeps both arguments on the manifold,
/// which is the slice of the similarity invariance this API can express.
fn fi_similarity(seed: u64) -> Result<bool> {
    let (c1, c2) = spd_pair(seed)?;
    let u = random_orthogonal(c1.dim(), mix_seed(seed, 0xCE))?;
    let ut = u.transpose();
    let d = fi_distance(&c1, &c2)?;
    let ds = fi_distance(&c1.congruence(&ut)?, &c2.congruence(&ut)?)?;
    Ok((d - ds).abs() <= 1e-8 * d.max(1.0))
}

fn fi_inversion(seed: u64) -> Result<bool> {
    let (c1, c2) = spd_pair(seed)?;
    let d = fi_distance(&c1, &c2)?;
    let di = fi_distance(&c1.inverse()?, &c2.inverse()?)?;
    Ok((d - di).abs() <= 1e-8 * d.max(1.0))
}

fn fi_scale(seed: u64) -> Result<bool> {
    let (c1, c2) = spd_pair(seed)?;
    let a = 10f64.powi((seed % 7) as i32 - 3);
    let d = fi_distance(&c1, &c2)?;
    let ds = fi_distance(&c1.scale(a)?, &c2.scale(a)?)?;
    Ok((d - ds).abs() <= 1e-8 * d.max(1.0))
}

fn fi_dominates_le(seed: u64) -> Result<bool> {
    let (c1, c2) = spd_pair(seed)?;
    Ok(fi_distance(&c1, &c2)? >= le_distance(&c1, &c2)? - 1e-10)
}

fn geodesic_arc(seed: u64) -> Result<bool> {
    let (c1, c2) = spd_pair(seed)?;
    let beta = ((seed >> 4) % 101) as f64 / 100.0;
    let point = geodesic(&c1, &c2, GeodesicParam::new(beta)?)?;
    let whole = fi_distance(&c1, &c2)?;
    let part = fi_distance(&c1, &point)?;
    Ok((part - beta * whole).abs() <= 1e-8 * whole.max(1.0))
}

/// Geodesics from a shared origin contract: two points can never end up
/// farther apart at arc fraction β than β times their full separation.
fn geodesic_contraction(seed: u64) -> Result<bool> {
    let (omega, phi) = spd_pair(seed)?;
    let xi = random_spd(omega.dim(), mix_seed(seed, 0xCF))?;
    let beta = ((seed >> 4) % 101) as f64 / 100.0;
    let p1 = geodesic(&omega, &phi, GeodesicParam::new(beta)?)?;
    let p2 = geodesic(&omega, &xi, GeodesicParam::new(beta)?)?;
    Ok(fi_distance(&p1, &p2)? <= beta * fi_distance(&phi, &xi)? + 1e-10)
}

fn geomean2_symmetry(seed: u64) -> Result<bool> {
    let (c1, c2) = spd_pair(seed)?;
    let g12 = geomean2(&c1, &c2)?;
    let g21 = geomean2(&c2, &c1)?;
    let bits_equal = g12
        .matrix()
        .iter()
        .zip(g21.matrix().iter())
        .all(|(a, b)| a.to_bits() == b.to_bits());
    Ok(bits_equal)
}

// -- joint diagonalization ----------------------------------------------------

fn ajd_nonnegative(seed: u64) -> Result<bool> {
    let set = noisy_set(seed)?;
    let b = random_invertible(set.dim(), mix_seed(seed, 0xDD))?;
    Ok(ajd_criterion(&b, &set)? >= 0.0)
}

fn ajd_monotone(seed: u64) -> Result<bool> {
    let set = noisy_set(seed)?;
    let report = ajd_pham(&set, &AjdConfig::default())?;
    Ok(report
        .criterion_trace
        .windows(2)
        .all(|w| w[1] <= w[0]))
}

fn ajd_scaling(seed: u64) -> Result<bool> {
    let set = noisy_set(seed)?;
    let factors: Vec<f64> = (0..set.len())
        .map(|k| 10f64.powi((mix_seed(seed, 0xE0 + k as u64) % 5) as i32 - 2))
        .collect();
    let scaled = set.scaled_each(&factors)?;
    let b0 = arithmetic_mean(&set)?.inv_sqrt()?.into_matrix();
    let cfg = AjdConfig::default();
    let r1 = ajd_pham_from(&set, b0.clone(), &cfg)?;
    let r2 = ajd_pham_from(&scaled, b0, &cfg)?;
    // the stop fires on a rounding-scale decrement comparison, so the two
    // runs may legitimately record one sweep more or less than each other;
    // the equivariance claim lives in the shared prefix
    let t1 = &r1.criterion_trace;
    let t2 = &r2.criterion_trace;
    if t1.len().abs_diff(t2.len()) > 1 || t1.len().min(t2.len()) < 2 {
        return Ok(false);
    }
    Ok(t1
        .iter()
        .zip(t2.iter())
        .all(|(a, b)| (a - b).abs() <= 1e-10 * a.max(1.0)))
}

fn ajd_pair(seed: u64) -> Result<bool> {
    let (c1, c2) = spd_pair(seed)?;
    let set = MatrixSet::new(vec![c1.clone(), c2.clone()])?;
    let report = ajd_pham(&set, &AjdConfig::default())?;
    let exact = jd2(&c1, &c2)?;
    Ok(report.converged
        && scaled_permutation_residual(&(report.diagonalizer.b() * exact.a())) < 1e-8)
}

// -- means ---------------------------------------------------------------------

fn mean_permutation(seed: u64) -> Result<bool> {
    let set = noisy_set(seed)?;
    let mut perm: Vec<usize> = (0..set.len()).collect();
    // Fisher-Yates driven by the trial seed
    for i in (1..perm.len()).rev() {
        perm.swap(i, (mix_seed(seed, 0xF0 + i as u64) % (i as u64 + 1)) as usize);
    }
    let shuffled = set.reordered(&perm)?;
    let cfg = tight();
    // ALE is looser: its estimate is only pinned down to the internal
    // diagonalization depth, so summation-order noise surfaces around 1e-8
    for (tol, a, b) in [
        (1e-8, fi_mean_gd(&set, &cfg)?, fi_mean_gd(&shuffled, &cfg)?),
        (1e-8, fi_mean_mm(&set, &cfg)?, fi_mean_mm(&shuffled, &cfg)?),
        (1e-8, bhat_mean(&set, &cfg)?, bhat_mean(&shuffled, &cfg)?),
        (1e-6, ale_mean(&set, &cfg)?, ale_mean(&shuffled, &cfg)?),
    ] {
        if !(converged(&a) && converged(&b) && same_matrix(&a.mean, &b.mean, tol)?) {
            return Ok(false);
        }
    }
    Ok(true)
}

fn congruence_check(
    set: &MatrixSet,
    f: &DMatrix<f64>,
    solve: fn(&MatrixSet, &SolverConfig) -> Result<SolverReport>,
    tol: f64,
) -> Result<bool> {
    // congruence can inflate the set's conditioning well past what a 1e-10
    // stop can reach; 1e-7 is attainable on both sides and the comparison
    // below is an order looser
    let cfg = SolverConfig {
        epsilon: 1e-7,
        max_iter: 1000,
        initial_step: 1.0,
    };
    let direct = solve(set, &cfg)?;
    let moved = solve(&set.congruence_all(f)?, &cfg)?;
    Ok(converged(&direct)
        && converged(&moved)
        && same_matrix(&direct.mean.congruence(f)?, &moved.mean, tol)?)
}

fn mean_congruence(seed: u64) -> Result<bool> {
    let set = mild_set(seed)?;
    let f = random_invertible(set.dim(), mix_seed(seed, 0xC1))?;
    for solve in [
        fi_mean_gd as fn(&MatrixSet, &SolverConfig) -> Result<SolverReport>,
        fi_mean_mm,
        bhat_mean,
    ] {
        if !congruence_check(&set, &f, solve, 1e-6)? {
            return Ok(false);
        }
    }
    // ALE minimizes a non-convex diagonalization criterion, so the two
    // frames are only guaranteed to land on corresponding optima when the
    // family is exactly diagonalizable (global optimum, unique up to row
    // scale and permutation — both of which cancel in the mean)
    let n = 3 + (seed % 3) as usize;
    let k = 4 + ((seed >> 8) % 5) as usize;
    let exact = generate(&GeneratorConfig::new(n, k, 0.0, seed))?.set;
    let f = random_invertible(exact.dim(), mix_seed(seed, 0xC7))?;
    congruence_check(&exact, &f, ale_mean, 1e-6)
}

fn le_rotation(seed: u64) -> Result<bool> {
    let set = noisy_set(seed)?;
    let u = random_orthogonal(set.dim(), mix_seed(seed, 0xC2))?;
    let direct = le_mean(&set)?;
    let moved = le_mean(&set.congruence_all(&u)?)?;
    same_matrix(&direct.congruence(&u)?, &moved, 1e-8)
}

fn le_general_congruence(seed: u64) -> Result<bool> {
    let set = noisy_set(seed)?;
    let f = random_invertible(set.dim(), mix_seed(seed, 0xC3))?;
    let direct = le_mean(&set)?;
    let moved = le_mean(&set.congruence_all(&f)?)?;
    same_matrix(&direct.congruence(&f)?, &moved, 1e-6)
}

/// Scaling member k by a_k scales the mean by the geometric mean of the a_k.
fn mean_homogeneity(seed: u64) -> Result<bool> {
    let set = noisy_set(seed)?;
    let factors: Vec<f64> = (0..set.len())
        .map(|k| 10f64.powi((mix_seed(seed, 0xD0 + k as u64) % 5) as i32 - 2))
        .collect();
    let scaled = set.scaled_each(&factors)?;
    let s = (factors.iter().map(|a| a.ln()).sum::<f64>() / factors.len() as f64).exp();
    let cfg = tight();
    let pairs = [
        (fi_mean_gd(&set, &cfg)?.mean, fi_mean_gd(&scaled, &cfg)?.mean),
        (fi_mean_mm(&set, &cfg)?.mean, fi_mean_mm(&scaled, &cfg)?.mean),
        (le_mean(&set)?, le_mean(&scaled)?),
    ];
    for (g, gs) in pairs {
        if !same_matrix(&g.scale(s)?, &gs, 1e-7)? {
            return Ok(false);
        }
    }
    // as with congruence, ALE needs an exactly diagonalizable family so the
    // two runs resolve the same diagonalization optimum
    let n = 3 + (seed % 3) as usize;
    let k = 4 + ((seed >> 8) % 5) as usize;
    let exact = generate(&GeneratorConfig::new(n, k, 0.0, seed))?.set;
    let factors: Vec<f64> = (0..exact.len())
        .map(|j| 10f64.powi((mix_seed(seed, 0xD0 + j as u64) % 5) as i32 - 2))
        .collect();
    let s = (factors.iter().map(|a| a.ln()).sum::<f64>() / factors.len() as f64).exp();
    let g = ale_mean(&exact, &cfg)?.mean;
    let gs = ale_mean(&exact.scaled_each(&factors)?, &cfg)?.mean;
    same_matrix(&g.scale(s)?, &gs, 1e-7)
}

fn det_matches(set: &MatrixSet, mean: &SpdMatrix, tol: f64) -> Result<bool> {
    let mut target = 0.0;
    for c in set.members() {
        target += c.ln_det()?;
    }
    target /= set.len() as f64;
    Ok(((mean.ln_det()? - target).exp() - 1.0).abs() <= tol)
}

fn mean_determinant(seed: u64) -> Result<bool> {
    let set = noisy_set(seed)?;
    let cfg = tight();
    Ok(det_matches(&set, &fi_mean_gd(&set, &cfg)?.mean, 1e-7)?
        && det_matches(&set, &fi_mean_mm(&set, &cfg)?.mean, 1e-7)?
        && det_matches(&set, &le_mean(&set)?, 1e-7)?
        && det_matches(&set, &ale_mean(&set, &cfg)?.mean, 1e-7)?)
}

fn mean_self_duality(seed: u64) -> Result<bool> {
    let set = noisy_set(seed)?;
    let inv = set.inverses()?;
    let cfg = tight();
    let fi_ok = same_matrix(
        &fi_mean_mm(&set, &cfg)?.mean,
        &fi_mean_mm(&inv, &cfg)?.mean.inverse()?,
        1e-7,
    )?;
    let le_ok = same_matrix(&le_mean(&set)?, &le_mean(&inv)?.inverse()?, 1e-7)?;
    // ALE: duality holds where it reduces to the two-matrix geometric mean
    let (c1, c2) = spd_pair(mix_seed(seed, 0xC4))?;
    let pair = MatrixSet::new(vec![c1.clone(), c2.clone()])?;
    let pair_inv = pair.inverses()?;
    let ale_ok = same_matrix(
        &ale_mean(&pair, &cfg)?.mean,
        &ale_mean(&pair_inv, &cfg)?.mean.inverse()?,
        1e-7,
    )?;
    Ok(fi_ok && le_ok && ale_ok)
}

fn mean_commuting(seed: u64) -> Result<bool> {
    let n = 3 + (seed % 3) as usize;
    let k = 4 + ((seed >> 8) % 4) as usize;
    let u = random_orthogonal(n, mix_seed(seed, 0xC5))?;
    let mut members = Vec::with_capacity(k);
    let mut mean_log = nalgebra::DVector::<f64>::zeros(n);
    for j in 0..k {
        let d = random_diagonal_spd(n, mix_seed(seed, 0xC6 + j as u64))?;
        for i in 0..n {
            mean_log[i] += d.matrix()[(i, i)].ln();
        }
        members.push(d.congruence(&u)?);
    }
    let closed = SpdMatrix::from_diagonal(
        &(0..n).map(|i| (mean_log[i] / k as f64).exp()).collect::<Vec<_>>(),
    )?
    .congruence(&u)?;
    let set = MatrixSet::new(members)?;
    let cfg = tight();
    Ok(same_matrix(&fi_mean_gd(&set, &cfg)?.mean, &closed, 1e-8)?
        && same_matrix(&fi_mean_mm(&set, &cfg)?.mean, &closed, 1e-8)?
        && same_matrix(&le_mean(&set)?, &closed, 1e-8)?
        && same_matrix(&ale_mean(&set, &cfg)?.mean, &closed, 1e-8)?)
}

fn dispersion(set: &MatrixSet, m: &SpdMatrix) -> Result<f64> {
    let mut total = 0.0;
    for c in set.members() {
        total += fi_distance(c, m)?.powi(2);
    }
    Ok(total)
}

fn fi_dispersion(seed: u64) -> Result<bool> {
    let set = noisy_set(seed)?;
    let cfg = tight();
    let fi = fi_mean_mm(&set, &cfg)?.mean;
    let best = dispersion(&set, &fi)?;
    for other in [
        arithmetic_mean(&set)?,
        harmonic_mean(&set)?,
        le_mean(&set)?,
        bhat_mean(&set, &cfg)?.mean,
        ale_mean(&set, &cfg)?.mean,
    ] {
        if best > dispersion(&set, &other)? + 1e-9 {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Variance inequality: for any reference point, the squared distance from
/// the mean is bounded by the mean excess dispersion around that point.
fn fi_variance_inequality(seed: u64) -> Result<bool> {
    let set = noisy_set(seed)?;
    let omega = random_spd(set.dim(), mix_seed(seed, 0xD9))?;
    let g = fi_mean_mm(&set, &tight())?.mean;
    let mut excess = 0.0;
    for c in set.members() {
        excess += fi_distance(c, &omega)?.powi(2) - fi_distance(c, &g)?.powi(2);
    }
    excess /= set.len() as f64;
    Ok(fi_distance(&g, &omega)?.powi(2) <= excess + 1e-9)
}

fn ale_alpha(seed: u64) -> Result<bool> {
    let set = noisy_set(seed)?;
    let cfg = tight();
    let base = ale_mean_with(&set, &cfg, 1.0)?;
    let scaled = ale_mean_with(&set, &cfg, 4.0)?;
    same_matrix(&base.report.mean, &scaled.report.mean, 1e-8)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn outcome_pass_logic() {
        let ok = PropertyOutcome {
            name: "x",
            trials: 10,
            failures: 0,
            expected_fail: false,
        };
        assert!(ok.passed());
        let broken = PropertyOutcome { failures: 1, ..ok.clone() };
        assert!(!broken.passed());
        let anti = PropertyOutcome {
            expected_fail: true,
            ..ok.clone()
        };
        assert!(!anti.passed(), "an expected failure that never fails is a failure");
        let anti_hit = PropertyOutcome {
            expected_fail: true,
            failures: 7,
            ..ok
        };
        assert!(anti_hit.passed());
    }

    #[test]
    fn short_run_passes_everything() {
        for outcome in run_all(2024, 8) {
            assert!(
                outcome.passed(),
                "{}: {}/{} trials failed (expected_fail={})",
                outcome.name,
                outcome.failures,
                outcome.trials,
                outcome.expected_fail
            );
        }
    }

    #[test]
    fn runs_are_reproducible() {
        let a = run_all(7, 4);
        let b = run_all(7, 4);
        for (x, y) in a.iter().zip(b.iter()) {
            assert_eq!(x.name, y.name);
            assert_eq!(x.failures, y.failures);
        }
    }
}
