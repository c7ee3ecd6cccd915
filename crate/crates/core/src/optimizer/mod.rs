//! Multi-restart direct search over isometries.
//!
//! Each restart walks the isometry manifold by coordinate descent: sweeps
//! over all row pairs `(i, j)` and, for each pair, a line search over the
//! Givens angle in two phase directions. Global sweeps use a coarse grid
//! followed by golden-section refinement; in between, local sweeps take a
//! single parabolic step per direction until they stall. Only the two
//! affected branch terms are re-evaluated per trial point. Restart 0 starts from the padded identity
//! (the spectral decomposition, or the computational-basis measurement);
//! restart `k >= 1` starts from a Haar-random isometry drawn from ChaCha20
//! seeded with `seed` on stream `k`, so a larger restart count always
//! contains the smaller one.

use serde::{Deserialize, Serialize};

use crate::ensemble::Isometry;
use crate::error::{QpolyError, Result};

mod roof;
mod search;
pub mod unitary;

pub use roof::{
    optimize_rank1_measurement, optimize_rank1_measurement_with, optimize_roof, MeasurementSearch,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Min,
    Max,
}

impl Sense {
    pub fn flipped(self) -> Self {
        match self {
            Sense::Min => Sense::Max,
            Sense::Max => Sense::Min,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub restarts: usize,
    /// Trial points per restart; one trial re-evaluates two branch terms.
    pub max_evals_per_restart: usize,
    /// A restart stops after two consecutive sweeps each improving the
    /// objective by less than this.
    pub tol: f64,
    /// Number of branches / outcomes; defaults to `rank^2`.
    pub branch_count: Option<usize>,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            restarts: 8,
            max_evals_per_restart: 200_000,
            tol: 1e-6,
            branch_count: None,
            seed: 0,
        }
    }
}

impl OptimizerConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(QpolyError::InvalidConfig(
                "restarts must be positive".into(),
            ));
        }
        if self.max_evals_per_restart == 0 {
            return Err(QpolyError::InvalidConfig(
                "max_evals_per_restart must be positive".into(),
            ));
        }
        if !(self.tol > 0.0 && self.tol < 1e-2) {
            return Err(QpolyError::InvalidConfig(format!(
                "tol {} outside (0, 1e-2)",
                self.tol
            )));
        }
        if self.branch_count == Some(0) {
            return Err(QpolyError::InvalidConfig(
                "branch_count must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Same seed stream with `factor` times the restarts and evaluations.
    pub fn escalated(&self, factor: usize) -> Self {
        Self {
            restarts: self.restarts * factor,
            max_evals_per_restart: self.max_evals_per_restart * factor,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationResult {
    /// Best objective value found, in bits.
    pub value: f64,
    pub best_isometry: Isometry,
    pub evals_used: usize,
    /// Whether the restart that produced `value` met the stopping tolerance
    /// before exhausting its budget.
    pub converged: bool,
    pub sense: Sense,
}
