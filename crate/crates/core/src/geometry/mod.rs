//! Distances from sampled elements to double cosets and conjugacy classes.
//!
//! Unitary families only get certified upper bounds: every
//! [`DistanceEstimate`] carries the `K_N` elements that realize its bound, so
//! the bound can be re-evaluated independently with [`DistanceEstimate::evaluate`].
//! Symmetric families get exact membership by backtracking.

mod assignment;
mod conjugacy;
mod procrustes;
mod reduce;
mod spectral;
mod symmetric;

use serde::{Deserialize, Serialize};

use crate::blockmat::{operator_norm, BlockMatrix};
use crate::cosets::{CosetTarget, KElement};
use crate::error::{CosetError, Result};
use crate::scalar::Real;

pub use assignment::max_weight_assignment;
pub use conjugacy::dist_conjugacy;
pub use procrustes::dist_double_coset;
pub use reduce::dist_to_product;
pub use spectral::{colligation_char_function, eigenvalues, matched_spectral_distance};
pub use symmetric::{sym_corner_invariant, sym_membership};

/// Solver knobs shared by the alternating minimizations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistanceOptions {
    pub max_iters: usize,
    /// Stop once one sweep improves the Frobenius objective by less than this.
    pub tol: f64,
    /// Random starts in addition to the identity start.
    pub restarts: usize,
    /// Seed for the random starts; restart `i` uses stream `i`.
    pub seed: u64,
}

impl Default for DistanceOptions {
    fn default() -> Self {
        Self {
            max_iters: 200,
            tol: 1e-12,
            restarts: 4,
            seed: 0,
        }
    }
}

/// The `K_N` elements realizing a distance bound, stored as `(k+N)`-blocks.
#[derive(Debug, Clone, PartialEq)]
pub enum Witness<T: Real> {
    /// `x ≈ embed_k(left) · r · embed_k(right)`.
    DoubleCoset {
        left: KElement<T>,
        right: KElement<T>,
    },
    /// `x ≈ W r W⁻¹` with `W = embed_k(conjugator)`.
    Conjugation { conjugator: KElement<T> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistanceEstimate<T: Real> {
    /// Operator-norm distance realized by `witness`.
    pub upper_bound: T,
    pub iterations: usize,
    pub converged: bool,
    pub witness: Witness<T>,
}

impl<T: Real> DistanceEstimate<T> {
    /// Recomputes `‖x − k₁ r k₂‖` (or `‖x − W r W⁻¹‖`) from the witness.
    pub fn evaluate(&self, x: &BlockMatrix<T>, target: &CosetTarget<T>) -> Result<T> {
        check_dims(x, target)?;
        let spec = target.family.spec;
        let r = &target.representative;
        let aligned = match &self.witness {
            Witness::DoubleCoset { left, right } => {
                left.embed(spec)?.mul(r)?.mul(&right.embed(spec)?)?
            }
            Witness::Conjugation { conjugator } => {
                let w = conjugator.embed(spec)?;
                w.mul(r)?.mul(&w.adjoint())?
            }
        };
        Ok(operator_norm(&(x.entries() - aligned.entries())))
    }

    /// `true` when the re-evaluated distance matches `upper_bound` within `tol`.
    pub fn verify(&self, x: &BlockMatrix<T>, target: &CosetTarget<T>, tol: T) -> Result<bool> {
        let d = self.evaluate(x, target)?;
        Ok((d - self.upper_bound).abs() <= tol)
    }
}

fn check_dims<T: Real>(x: &BlockMatrix<T>, target: &CosetTarget<T>) -> Result<()> {
    if x.dim() != target.dim() {
        return Err(CosetError::DimensionMismatch {
            expected: target.dim(),
            actual: x.dim(),
        });
    }
    Ok(())
}
