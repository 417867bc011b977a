// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("field length {found} does not match grid size {expected}")]
    GridMismatch { expected: usize, found: usize },

    #[error("invalid cutoffs: {0}")]
    InvalidCutoff(String),

    #[error("invalid evolution config: {0}")]
    InvalidConfig(String),

    #[error("blow-up at step {step} (t = {time}): {reason}")]
    BlowUp { step: usize, time: f64, reason: String },

    #[error("Picard iteration not contracting: ratio {ratio:.4} at iteration {iteration}")]
    NotContracting { iteration: usize, ratio: f64 },

    #[error("Picard iteration did not reach tolerance {tol:e} in {iterations} iterations")]
    PicardNoConvergence { iterations: usize, tol: f64 },

    #[error("time mesh mismatch: {0}")]
    MeshMismatch(String),

    #[error("Fock model dimension {dim} exceeds limit {limit}")]
    DimensionOverflow { dim: usize, limit: usize },

    #[error("truncation margin violated: {0}")]
    TruncationMargin(String),

    #[error("invalid Fock model: {0}")]
    InvalidModel(String),

    #[error("exponential series did not converge: {0}")]
    ExpNonConvergence(String),

    #[error("non-monotone errors: {0}")]
    NonMonotone(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, LabError>;
