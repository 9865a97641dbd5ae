//! Error type shared by the kernel, the model zoo and the diagnostics.

use thiserror::Error;

/// Everything that can go wrong in the laboratory.
///
/// Numerical guards (`GridTooCoarse`, `PhaseUnderResolved`, `DegenerateGap`,
/// convergence and matching failures) are kept distinct from input
/// validation so that callers can map them to different exit paths.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LabError {
    #[error("matrix is not Hermitian: max |H - H^dag| = {defect:.3e} exceeds {limit:.1e}")]
    NonHermitian { defect: f64, limit: f64 },

    #[error("eigensolver did not converge within {sweeps} sweeps (off-diagonal residual {off_diagonal:.3e})")]
    NoConvergence { sweeps: usize, off_diagonal: f64 },

    #[error("eigenpath matching is ambiguous for level {level}: best |overlap| {best:.9} ties runner-up {runner_up:.9} within {tie_tol:.1e}")]
    DegenerateMatchAmbiguity {
        level: usize,
        best: f64,
        runner_up: f64,
        tie_tol: f64,
    },

    #[error("invalid model parameters: {reason}")]
    InvalidParams { reason: String },

    #[error("dimension mismatch: {left} vs {right}")]
    DimMismatch { left: usize, right: usize },

    #[error("state vector is not normalized: |norm - 1| = {defect:.3e}")]
    NotNormalized { defect: f64 },

    #[error("time grid too coarse: per-step phase |H| dt = {phase:.4e} at t = {at_time:.6e} exceeds {limit}; use at least {suggested_steps} steps")]
    GridTooCoarse {
        phase: f64,
        at_time: f64,
        limit: f64,
        suggested_steps: usize,
    },

    #[error("levels {n} and {m} are degenerate at t = {at_time:.6e}: |gap| = {gap:.3e} below {limit:.1e}")]
    DegenerateGap {
        n: usize,
        m: usize,
        at_time: f64,
        gap: f64,
        limit: f64,
    },

    #[error("oscillatory phase under-resolved: |gap| dt = {phase:.4e} at t = {at_time:.6e} exceeds {limit}; use at least {suggested_steps} steps")]
    PhaseUnderResolved {
        phase: f64,
        at_time: f64,
        limit: f64,
        suggested_steps: usize,
    },

    #[error("time grids do not match: {reason}")]
    GridMismatch { reason: String },
}

impl LabError {
    /// True for failures of a numerical guard on an otherwise valid input,
    /// as opposed to malformed input.
    pub fn is_numerical_guard(&self) -> bool {
        matches!(
            self,
            LabError::GridTooCoarse { .. }
                | LabError::PhaseUnderResolved { .. }
                | LabError::DegenerateGap { .. }
                | LabError::NoConvergence { .. }
                | LabError::DegenerateMatchAmbiguity { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, LabError>;
