//! Weighted collections of same-size SPD matrices, the common input of the
//! joint-diagonalization routines and every mean estimator.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::SpdMatrix;

/// A set `{C_1, ..., C_K}` of SPD matrices sharing one dimension, with a
/// strictly positive weight per member. Weights default to uniform; they are
/// stored as given and normalized by consumers where a convex combination is
/// needed.
#[derive(Debug, Clone)]
pub struct MatrixSet {
    members: Vec<SpdMatrix>,
    weights: Vec<f64>,
}

impl MatrixSet {
    /// Uniformly weighted set. At least one member; all members must share
    /// the dimension of the first.
    pub fn new(members: Vec<SpdMatrix>) -> Result<Self> {
        let weights = vec![1.0; members.len()];
        Self::with_weights(members, weights)
    }

    pub fn with_weights(members: Vec<SpdMatrix>, weights: Vec<f64>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::InvalidSet("set has no members".into()));
        }
        let dim = members[0].dim();
        if let Some(k) = members.iter().position(|c| c.dim() != dim) {
            return Err(Error::InvalidSet(format!(
                "member {k} has dimension {} but member 0 has {dim}",
                members[k].dim()
            )));
        }
        if weights.len() != members.len() {
            return Err(Error::InvalidSet(format!(
                "{} members but {} weights",
                members.len(),
                weights.len()
            )));
        }
        if let Some(k) = weights.iter().position(|w| !w.is_finite() || *w <= 0.0) {
            return Err(Error::InvalidSet(format!(
                "weight {k} is {}; weights must be finite and positive",
                weights[k]
            )));
        }
        Ok(Self { members, weights })
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction requires at least one member
    }

    pub fn dim(&self) -> usize {
        self.members[0].dim()
    }

    pub fn members(&self) -> &[SpdMatrix] {
        &self.members
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight_total(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Applies `C_k -> F C_k F^T` to every member, keeping weights.
    pub fn congruence_all(&self, f: &DMatrix<f64>) -> Result<MatrixSet> {
        let members = self
            .members
            .iter()
            .map(|c| c.congruence(f))
            .collect::<Result<Vec<_>>>()?;
        Ok(MatrixSet {
            members,
            weights: self.weights.clone(),
        })
    }

    /// Scales every member by one positive factor.
    pub fn scaled(&self, a: f64) -> Result<MatrixSet> {
        self.scaled_each(&vec![a; self.len()])
    }

    /// Scales member `k` by `factors[k]`.
    pub fn scaled_each(&self, factors: &[f64]) -> Result<MatrixSet> {
        if factors.len() != self.len() {
            return Err(Error::InvalidSet(format!(
                "{} members but {} scale factors",
                self.len(),
                factors.len()
            )));
        }
        let members = self
            .members
            .iter()
            .zip(factors)
            .map(|(c, &a)| c.scale(a))
            .collect::<Result<Vec<_>>>()?;
        Ok(MatrixSet {
            members,
            weights: self.weights.clone(),
        })
    }

    /// Set of member inverses, keeping weights.
    pub fn inverses(&self) -> Result<MatrixSet> {
        let members = self
            .members
            .iter()
            .map(|c| c.inverse())
            .collect::<Result<Vec<_>>>()?;
        Ok(MatrixSet {
            members,
            weights: self.weights.clone(),
        })
    }

    /// Reorders members (and weights) by a permutation of `0..K`.
    pub fn reordered(&self, perm: &[usize]) -> Result<MatrixSet> {
        let k = self.len();
        let mut seen = vec![false; k];
        if perm.len() != k || perm.iter().any(|&p| p >= k || std::mem::replace(&mut seen[p], true))
        {
            return Err(Error::InvalidSet(format!(
                "not a permutation of 0..{k}: {perm:?}"
            )));
        }
        let members = perm.iter().map(|&p| self.members[p].clone()).collect();
        let weights = perm.iter().map(|&p| self.weights[p]).collect();
        Ok(MatrixSet { members, weights })
    }
}
