use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Matrix shapes are inconsistent with each other or with the channel.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A factorization that requires positive definiteness hit a pivot <= 0.
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    /// An iterative factorization failed to converge.
    #[error("factorization did not converge: {0}")]
    ConvergenceFailure(String),

    /// A factor that must be inverted is singular to working precision.
    #[error("singular factor: {0}")]
    SingularFactor(String),

    /// Exhaustive order enumeration is gated on a small user count.
    #[error("too many users for exhaustive enumeration: {count} (max {max})")]
    TooManyUsers { count: usize, max: usize },

    /// The per-block concave subproblem failed to reach its residual target.
    #[error("subproblem stalled after {iters} iterations (residual {residual:.3e})")]
    SubproblemDivergence { iters: usize, residual: f64 },

    /// The power-price bracket could not be made to straddle the budget.
    #[error("price bracket exhausted: power {power:.6} at lambda_max {lambda_max:.4} still exceeds the budget")]
    BoundsExhausted { lambda_max: f64, power: f64 },

    /// Zero-forcing requires a nontrivial eavesdropper null space.
    #[error("eavesdropper null space is empty; zero-forcing is infeasible")]
    EmptyNullSpace,

    /// A region sweep produced no converged samples to close over.
    #[error("no converged samples in sweep")]
    NoConvergedSamples,

    /// Invalid constructor input (weights, permutations, powers, entries).
    #[error("invalid input: {0}")]
    InvalidInput(String),
}
