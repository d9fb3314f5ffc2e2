//! Mean estimators for SPD matrix sets.
//!
//! Closed forms: [`arithmetic_mean`], [`harmonic_mean`], [`le_mean`].
//! Iterative solvers, all reporting their own stopping criterion per
//! iteration: [`fi_mean_gd`] (gradient descent with an adaptive step),
//! [`fi_mean_mm`] (majorization-minimization), [`bhat_mean`] (fixed point),
//! [`ale_mean`] (joint diagonalization followed by diagonal scaling) and
//! [`fi_mean_sqrt_iter`] (multiplicative square-root iterations). The
//! iterative estimators of the Fisher-information mean all converge to the
//! unique zero of `sum_k ln(M^-1/2 C_k M^-1/2)`; see
//! [`fi_fixed_point_residual`].
//!
//! Means are uniformly weighted: set weights influence joint
//! diagonalization, not averaging.

use std::collections::VecDeque;

use nalgebra::DMatrix;

use crate::ajd::{self, AjdConfig, Diagonalizer};
use crate::error::{Error, Result};
use crate::geometry::fi_distance;
use crate::linalg::{SpdMatrix, SymmetricMatrix};
use crate::par;
use crate::set::MatrixSet;

/// Tolerances and iteration budget shared by the iterative solvers.
#[derive(Debug, Clone, Copy)]
pub struct SolverConfig {
    pub epsilon: f64,
    pub max_iter: usize,
    /// Starting step size `v` for the adaptive-step solvers.
    pub initial_step: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            epsilon: 1e-9,
            max_iter: 500,
            initial_step: 1.0,
        }
    }
}

impl SolverConfig {
    fn validate(&self) -> Result<()> {
        if !self.epsilon.is_finite() || self.epsilon <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "epsilon must be finite and positive, got {}",
                self.epsilon
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidParameter("max_iter must be positive".into()));
        }
        if !self.initial_step.is_finite() || self.initial_step <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "initial_step must be finite and positive, got {}",
                self.initial_step
            )));
        }
        Ok(())
    }
}

/// Outcome of an iterative mean computation. `criterion_trace` holds the
/// solver's own stopping criterion, one value per iteration;
/// `final_residual` is its last value, so `converged` implies
/// `final_residual <= epsilon`.
#[derive(Debug, Clone)]
pub struct SolverReport {
    pub mean: SpdMatrix,
    pub iterations: usize,
    pub converged: bool,
    pub criterion_trace: Vec<f64>,
    pub final_residual: f64,
}

/// `(1/K) sum C_k`.
pub fn arithmetic_mean(set: &MatrixSet) -> Result<SpdMatrix> {
    let mut acc = set.members()[0].clone();
    for c in &set.members()[1..] {
        acc = acc.add(c)?;
    }
    acc.scale(1.0 / set.len() as f64)
}

/// `((1/K) sum C_k^-1)^-1`.
pub fn harmonic_mean(set: &MatrixSet) -> Result<SpdMatrix> {
    arithmetic_mean(&set.inverses()?)?.inverse()
}

fn average_syms(terms: Vec<Result<SymmetricMatrix>>, dim: usize) -> Result<SymmetricMatrix> {
    let k = terms.len();
    let mut acc = SymmetricMatrix::zeros(dim);
    for t in terms {
        acc = acc.add(&t?)?;
    }
    Ok(acc.scale(1.0 / k as f64))
}

/// `exp((1/K) sum ln C_k)`: the log-Euclidean mean.
pub fn le_mean(set: &MatrixSet) -> Result<SpdMatrix> {
    let logs = par::map_collect(set.members(), |c| c.log());
    average_syms(logs, set.dim())?.exp()
}

/// `(1/K) sum ln(M^-1/2 C_k M^-1/2)`: the Fisher gradient direction at `M`,
/// expressed in the whitened frame. Zero exactly at the FI mean.
fn tangent_mean(set: &MatrixSet, m: &SpdMatrix) -> Result<SymmetricMatrix> {
    let w = m.inv_sqrt()?;
    let logs = par::map_collect(set.members(), |c| c.congruence(w.matrix())?.log());
    average_syms(logs, set.dim())
}

/// Norm of the FI fixed-point defect `||(1/K) sum ln(M^-1/2 C_k M^-1/2)||_F`;
/// every estimator of the FI mean should drive this to zero.
pub fn fi_fixed_point_residual(set: &MatrixSet, m: &SpdMatrix) -> Result<f64> {
    Ok(tangent_mean(set, m)?.frobenius_norm())
}

/// `(1/K) sum ln(B C_k B^T)` for an arbitrary invertible `B`.
fn whitened_log_mean(set: &MatrixSet, b: &DMatrix<f64>) -> Result<SymmetricMatrix> {
    let logs = par::map_collect(set.members(), |c| {
        SpdMatrix::from_sym_unchecked(SymmetricMatrix::symmetrize(
            b * c.matrix() * b.transpose(),
        ))
        .log()
    });
    average_syms(logs, set.dim())
}

/// Fisher-information mean by Riemannian gradient descent with the adaptive
/// step schedule: a step is accepted while `v * ||gradient||` keeps
/// decreasing; otherwise `v` is halved. Starts at the arithmetic mean.
pub fn fi_mean_gd(set: &MatrixSet, cfg: &SolverConfig) -> Result<SolverReport> {
    fi_mean_gd_from(set, cfg, &arithmetic_mean(set)?)
}

/// [`fi_mean_gd`] from a caller-supplied starting point.
pub fn fi_mean_gd_from(set: &MatrixSet, cfg: &SolverConfig, warm: &SpdMatrix) -> Result<SolverReport> {
    cfg.validate()?;
    check_warm(set, warm)?;
    let mut m = warm.clone();
    let mut v = cfg.initial_step;
    let mut tau = f64::INFINITY;
    let mut trace = Vec::new();
    let mut converged = false;
    let mut iterations = 0;

    while iterations < cfg.max_iter {
        iterations += 1;
        let s = tangent_mean(set, &m)?;
        let g = s.frobenius_norm();
        trace.push(g);
        if g < cfg.epsilon {
            converged = true;
            break;
        }
        let h = v * g;
        if h < tau {
            let r = m.sqrt()?;
            m = s.scale(v).exp()?.congruence(r.matrix())?;
            v *= 0.95;
            tau = h;
        } else {
            v *= 0.5;
        }
        if v < cfg.epsilon {
            // the step size collapsed before the gradient went below
            // epsilon: stuck, not converged
            break;
        }
    }
    let final_residual = trace.last().copied().unwrap_or(f64::INFINITY);
    Ok(SolverReport {
        mean: m,
        iterations,
        converged,
        criterion_trace: trace,
        final_residual,
    })
}

/// Fisher-information mean by majorization-minimization: each iteration
/// maps the members through a pair of matrix functions of
/// `ln(C_k^-1/2 M C_k^-1/2)` and solves the resulting Riccati equation in
/// closed form. Starts at the arithmetic mean; monotone and usually much
/// faster than gradient descent per iteration count.
pub fn fi_mean_mm(set: &MatrixSet, cfg: &SolverConfig) -> Result<SolverReport> {
    fi_mean_mm_from(set, cfg, &arithmetic_mean(set)?)
}

/// [`fi_mean_mm`] from a caller-supplied starting point.
pub fn fi_mean_mm_from(set: &MatrixSet, cfg: &SolverConfig, warm: &SpdMatrix) -> Result<SolverReport> {
    cfg.validate()?;
    check_warm(set, warm)?;
    let dim = set.dim();
    let roots = par::map_collect(set.members(), |c| Ok((c.sqrt()?, c.inv_sqrt()?)))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;

    let mut m = warm.clone();
    let mut trace = Vec::new();
    let mut converged = false;
    let mut iterations = 0;

    while iterations < cfg.max_iter {
        iterations += 1;
        let parts = par::map_range(set.len(), |k| -> Result<(SymmetricMatrix, SymmetricMatrix)> {
            let (rk, wk) = &roots[k];
            let eig = m.congruence(wk.matrix())?.eigen()?;
            // phi-(mu) = (sqrt(psi^2+1) - psi) e^psi and
            // phi+(mu) = (sqrt(psi^2+1) + psi) e^-psi with psi = ln mu,
            // each written in the branch that avoids cancellation
            let f1 = eig.assemble(|mu| {
                let psi = mu.ln();
                let r = psi.hypot(1.0);
                if psi >= 0.0 {
                    mu / (r + psi)
                } else {
                    (r - psi) * mu
                }
            });
            let f2 = eig.assemble(|mu| {
                let psi = mu.ln();
                let r = psi.hypot(1.0);
                if psi <= 0.0 {
                    1.0 / (mu * (r - psi))
                } else {
                    (r + psi) / mu
                }
            });
            Ok((f1.congruence(rk.matrix())?, f2.congruence(wk.matrix())?))
        });
        let mut acc1 = SymmetricMatrix::zeros(dim);
        let mut acc2 = SymmetricMatrix::zeros(dim);
        for part in parts {
            let (t1, t2) = part?;
            acc1 = acc1.add(&t1)?;
            acc2 = acc2.add(&t2)?;
        }
        let scale = 1.0 / set.len() as f64;
        // both sides must be SPD for the closed-form solve; validate rather
        // than assume
        let phi1 = SpdMatrix::from_symmetric(acc1.scale(scale))?;
        let phi2 = SpdMatrix::from_symmetric(acc2.scale(scale))?;

        // M = Phi1^1/2 (Phi1^1/2 Phi2 Phi1^1/2)^-1/2 Phi1^1/2 solves
        // M Phi2 M = Phi1
        let r1 = phi1.sqrt()?;
        let m_new = phi2
            .congruence(r1.matrix())?
            .inv_sqrt()?
            .congruence(r1.matrix())?;

        let d = fi_distance(&m_new, &m)?;
        trace.push(d);
        m = m_new;
        if d < cfg.epsilon && fi_fixed_point_residual(set, &m)? < 10.0 * cfg.epsilon {
            converged = true;
            break;
        }
    }
    let final_residual = trace.last().copied().unwrap_or(f64::INFINITY);
    Ok(SolverReport {
        mean: m,
        iterations,
        converged,
        criterion_trace: trace,
        final_residual,
    })
}

/// Bhattacharyya mean: fixed-point iteration
/// `M <- [(1/K) sum ((C_k + M)/2)^-1]^-1` from the arithmetic mean, stopped
/// when successive iterates are closer than `epsilon` in Fisher distance.
pub fn bhat_mean(set: &MatrixSet, cfg: &SolverConfig) -> Result<SolverReport> {
    bhat_mean_from(set, cfg, &arithmetic_mean(set)?)
}

/// [`bhat_mean`] from a caller-supplied starting point.
pub fn bhat_mean_from(set: &MatrixSet, cfg: &SolverConfig, warm: &SpdMatrix) -> Result<SolverReport> {
    cfg.validate()?;
    check_warm(set, warm)?;
    let mut m = warm.clone();
    let mut trace = Vec::new();
    let mut converged = false;
    let mut iterations = 0;

    while iterations < cfg.max_iter {
        iterations += 1;
        let invs = par::map_collect(set.members(), |c| {
            Ok(c.add(&m)?.scale(0.5)?.inverse()?.sym().clone())
        });
        let m_new = SpdMatrix::from_symmetric(average_syms(invs, set.dim())?)?.inverse()?;
        let d = fi_distance(&m_new, &m)?;
        trace.push(d);
        m = m_new;
        if d < cfg.epsilon {
            converged = true;
            break;
        }
    }
    let final_residual = trace.last().copied().unwrap_or(f64::INFINITY);
    Ok(SolverReport {
        mean: m,
        iterations,
        converged,
        criterion_trace: trace,
        final_residual,
    })
}

/// Defect of the Bhattacharyya stationarity condition,
/// `||(2/K) sum (M + C_k)^-1 - M^-1||_F`; zero exactly at the fixed point.
pub fn bhat_fixed_point_residual(set: &MatrixSet, m: &SpdMatrix) -> Result<f64> {
    let invs = par::map_collect(set.members(), |c| Ok(c.add(m)?.inverse()?.sym().clone()));
    let avg = average_syms(invs, set.dim())?.scale(2.0);
    Ok(avg.sub(m.inverse()?.sym())?.frobenius_norm())
}

/// An [`ale_mean`] result bundled with the whitening transform that
/// produced it; `diagonalizer.b()` satisfies `diag(B G B^T) = I` at the
/// default scaling.
#[derive(Debug, Clone)]
pub struct AleOutcome {
    pub report: SolverReport,
    pub diagonalizer: Diagonalizer,
}

/// Joint diagonalization inside the ALE mean runs deeper than the default
/// AJD stop: the scaling loop and the congruence-invariance guarantees
/// consume more accuracy than a -100 dB solution provides.
const ALE_AJD_STOP_DB: f64 = -160.0;

/// Approximate-joint-diagonalization mean: diagonalize, average the
/// transformed logs, map back. Equals the FI mean exactly when the set is
/// jointly diagonalizable and stays within a few percent of it otherwise,
/// at a fraction of the iteration cost.
pub fn ale_mean(set: &MatrixSet, cfg: &SolverConfig) -> Result<SolverReport> {
    Ok(ale_mean_with(set, cfg, 1.0)?.report)
}

/// [`ale_mean`] with the scaling target `alpha` exposed: the loop drives
/// `diag[exp((1/K) sum ln(B C_k B^T))]` to `alpha I`. The returned mean is
/// independent of `alpha`; only the whitener's scale changes.
pub fn ale_mean_with(set: &MatrixSet, cfg: &SolverConfig, alpha: f64) -> Result<AleOutcome> {
    cfg.validate()?;
    if !alpha.is_finite() || alpha <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "alpha must be finite and positive, got {alpha}"
        )));
    }
    let n = set.dim();
    let (mut b, ajd_ok) = if set.len() == 1 {
        (set.members()[0].inv_sqrt()?.into_matrix(), true)
    } else {
        let report = ajd::ajd_pham(
            set,
            &AjdConfig {
                stop_decrement_db: ALE_AJD_STOP_DB,
                ..AjdConfig::default()
            },
        )?;
        (report.diagonalizer.b().clone(), report.converged)
    };

    let mut trace = Vec::new();
    let mut scaling_ok = false;
    let mut iterations = 0;
    while iterations < cfg.max_iter {
        iterations += 1;
        let e = whitened_log_mean(set, &b)?.exp()?;
        let mut d2 = 0.0;
        for i in 0..n {
            let delta = e.matrix()[(i, i)] / alpha;
            d2 += delta.ln().powi(2);
            let s = 1.0 / delta.sqrt();
            for c in 0..n {
                b[(i, c)] *= s;
            }
        }
        let d = d2.sqrt() / n as f64;
        trace.push(d);
        if d <= cfg.epsilon {
            scaling_ok = true;
            break;
        }
    }

    let e = whitened_log_mean(set, &b)?.exp()?;
    let a = b.clone().try_inverse().ok_or(Error::Singular {
        context: "whitening transform is not invertible",
    })?;
    let mean = e.congruence(&a)?;
    let criterion = ajd::ajd_criterion(&b, set)?;
    let diagonalizer = Diagonalizer::new(b, a, criterion)?;
    let final_residual = trace.last().copied().unwrap_or(f64::INFINITY);
    Ok(AleOutcome {
        report: SolverReport {
            mean,
            iterations,
            converged: ajd_ok && scaling_ok,
            criterion_trace: trace,
            final_residual,
        },
        diagonalizer,
    })
}

/// Which square root of the FI mean the multiplicative iteration tracks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SqrtMode {
    /// Iterate `B <- exp(-(v/2) L) B`; the mean is `(B^T B)^-1`.
    InverseSqrt,
    /// Iterate `A <- A exp((v/2) L)`; the mean is `A A^T`.
    Sqrt,
}

/// How many consecutive accepted steps may increase the gradient norm
/// before the iteration is declared divergent.
const SQRT_ITER_GROWTH_LIMIT: usize = 10;

/// Fisher-information mean via multiplicative updates of a square-root
/// factor, with the same adaptive step schedule as [`fi_mean_gd`]. Both
/// factors are maintained; `mode` selects which one produces the mean.
pub fn fi_mean_sqrt_iter(set: &MatrixSet, cfg: &SolverConfig, mode: SqrtMode) -> Result<SolverReport> {
    cfg.validate()?;
    let am = arithmetic_mean(set)?;
    let mut b = am.inv_sqrt()?.into_matrix();
    let mut a = am.sqrt()?.into_matrix();
    let mut v = cfg.initial_step;
    let mut tau = f64::INFINITY;
    let mut trace = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    let mut growth = 0usize;
    let mut last_accepted = f64::INFINITY;

    while iterations < cfg.max_iter {
        iterations += 1;
        let l = whitened_log_mean(set, &b)?;
        let g = l.frobenius_norm();
        trace.push(g);
        if g < cfg.epsilon {
            converged = true;
            break;
        }
        let h = v * g;
        if h < tau {
            if g > last_accepted {
                growth += 1;
                if growth >= SQRT_ITER_GROWTH_LIMIT {
                    break;
                }
            } else {
                growth = 0;
            }
            last_accepted = g;
            let eig = l.eigen()?;
            let shrink = eig.assemble(|w| (-0.5 * v * w).exp());
            let grow = eig.assemble(|w| (0.5 * v * w).exp());
            b = shrink.matrix() * &b;
            a = &a * grow.matrix();
            v *= 0.95;
            tau = h;
        } else {
            v *= 0.5;
        }
        if v < cfg.epsilon {
            break;
        }
    }

    let mean = match mode {
        SqrtMode::InverseSqrt => SpdMatrix::new(b.transpose() * &b)?.inverse()?,
        SqrtMode::Sqrt => SpdMatrix::new(&a * a.transpose())?,
    };
    let final_residual = trace.last().copied().unwrap_or(f64::INFINITY);
    Ok(SolverReport {
        mean,
        iterations,
        converged,
        criterion_trace: trace,
        final_residual,
    })
}

fn check_warm(set: &MatrixSet, warm: &SpdMatrix) -> Result<()> {
    if warm.dim() != set.dim() {
        return Err(Error::DimensionMismatch {
            expected: set.dim(),
            found: warm.dim(),
        });
    }
    Ok(())
}

/// Default number of refinement sweeps per buffer push.
pub const BUFFER_DEFAULT_SWEEPS: usize = 2;

/// Online ALE mean over a sliding window: a circular buffer of members with
/// a cached whitener that is warm-started on every push, so keeping the
/// running mean current costs a couple of sweeps instead of a full solve.
#[derive(Debug, Clone)]
pub struct AleBuffer {
    capacity: usize,
    members: VecDeque<SpdMatrix>,
    weights: VecDeque<f64>,
    current: Option<(Diagonalizer, SpdMatrix)>,
}

impl AleBuffer {
    pub fn new(capacity: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::InvalidParameter("capacity must be positive".into()));
        }
        Ok(Self {
            capacity,
            members: VecDeque::with_capacity(capacity),
            weights: VecDeque::with_capacity(capacity),
            current: None,
        })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// The cached mean; `None` only before the first push.
    pub fn current_mean(&self) -> Option<&SpdMatrix> {
        self.current.as_ref().map(|(_, m)| m)
    }

    /// The cached whitening transform paired with the mean.
    pub fn current_diagonalizer(&self) -> Option<&Diagonalizer> {
        self.current.as_ref().map(|(d, _)| d)
    }

    /// Pushes with the default sweep budget.
    pub fn push(&mut self, c: SpdMatrix) -> Result<()> {
        self.push_with(c, BUFFER_DEFAULT_SWEEPS)
    }

    /// Evicts the oldest member if full, inserts `c` (unit weight), then
    /// refreshes the cache: `n_sweeps` diagonalization sweeps warm-started
    /// from the cached whitener followed by `n_sweeps` scaling iterations.
    pub fn push_with(&mut self, c: SpdMatrix, n_sweeps: usize) -> Result<()> {
        self.push_weighted(c, 1.0, n_sweeps)
    }

    pub fn push_weighted(&mut self, c: SpdMatrix, weight: f64, n_sweeps: usize) -> Result<()> {
        if let Some(front) = self.members.front() {
            if front.dim() != c.dim() {
                return Err(Error::DimensionMismatch {
                    expected: front.dim(),
                    found: c.dim(),
                });
            }
        }
        if n_sweeps == 0 {
            return Err(Error::InvalidParameter("n_sweeps must be positive".into()));
        }
        if self.members.len() == self.capacity {
            self.members.pop_front();
            self.weights.pop_front();
        }
        self.members.push_back(c);
        self.weights.push_back(weight);
        self.refresh(n_sweeps)
    }

    fn refresh(&mut self, n_sweeps: usize) -> Result<()> {
        let n = self.members[0].dim();
        if self.members.len() == 1 {
            let c = &self.members[0];
            let b = c.inv_sqrt()?.into_matrix();
            let a = c.sqrt()?.into_matrix();
            self.current = Some((Diagonalizer::new(b, a, 0.0)?, c.clone()));
            return Ok(());
        }
        let set = MatrixSet::with_weights(
            self.members.iter().cloned().collect(),
            self.weights.iter().copied().collect(),
        )?;
        let warm = match &self.current {
            Some((d, _)) => d.b().clone(),
            None => arithmetic_mean(&set)?.inv_sqrt()?.into_matrix(),
        };
        // a deliberately unreachable decrement threshold: the push budget is
        // n_sweeps flat, except when the criterion plateaus early
        let report = ajd::ajd_pham_from(
            &set,
            warm,
            &AjdConfig {
                stop_decrement_db: -1000.0,
                max_sweeps: n_sweeps,
            },
        )?;
        let mut b = report.diagonalizer.b().clone();
        for _ in 0..n_sweeps {
            let e = whitened_log_mean(&set, &b)?.exp()?;
            for i in 0..n {
                let s = 1.0 / e.matrix()[(i, i)].sqrt();
                for col in 0..n {
                    b[(i, col)] *= s;
                }
            }
        }
        let e = whitened_log_mean(&set, &b)?.exp()?;
        let a = b.clone().try_inverse().ok_or(Error::Singular {
            context: "buffered whitening transform is not invertible",
        })?;
        let mean = e.congruence(&a)?;
        let criterion = ajd::ajd_criterion(&b, &set)?;
        self.current = Some((Diagonalizer::new(b, a, criterion)?, mean));
        Ok(())
    }
}
