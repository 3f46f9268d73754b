//! Error type shared across the crate.

use thiserror::Error;

/// Crate-wide error enum. Variants that correspond to violated mathematical
/// preconditions carry the offending quantities so diagnostics can name the
/// inequality that failed.
#[derive(Debug, Error)]
pub enum Error {
    /// Vectors from different spaces (or mismatched dimensions) were combined.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// A vector with NaN or infinite entries was constructed or produced.
    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    /// The admissibility inequality 2*M2*||v||*c*(1+c) < 1 failed.
    #[error("admissibility violated: 2*M2*||v||*c*(1+c) = {product:.6} >= 1")]
    Admissibility { product: f64 },

    /// A certified-mode precondition failed; the message names the inequality.
    #[error("certified-mode precondition violated: {0}")]
    Precondition(String),

    /// An iterate left the working ball in certified mode.
    #[error("iterate {iteration} left the ball: ||z|| = {norm:.6e} > R = {radius:.6e}")]
    BallExit {
        iteration: usize,
        norm: f64,
        radius: f64,
    },

    /// The shifted linear solve did not reach its tolerance.
    #[error(
        "linear solve did not converge: residual {achieved:.3e} > tolerance {tolerance:.3e} after {iterations} iterations"
    )]
    LinearSolve {
        achieved: f64,
        tolerance: f64,
        iterations: usize,
    },

    /// Bisection was called without a sign change on the bracket.
    #[error("no sign change on bracket [{lo}, {hi}]: f(lo)*f(hi) = {product:.3e} >= 0")]
    Bracket { lo: f64, hi: f64, product: f64 },

    /// The Newton oracle hit a numerically singular Jacobian.
    #[error("singular Jacobian encountered at Newton iteration {iteration}")]
    SingularJacobian { iteration: usize },

    /// Rate fitting needs at least 3 strictly positive samples.
    #[error("rate fit needs >= 3 positive pairs, got {positive}")]
    NoFit { positive: usize },

    /// Bad argument outside the precondition categories above.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Configuration file is syntactically or semantically invalid.
    #[error("config error: {0}")]
    Config(String),

    /// An oracle could not run or its guard tripped.
    #[error("oracle failure: {0}")]
    Oracle(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code mapping used by the CLI.
    /// 0 success, 1 precondition violation, 2 low-confidence estimate,
    /// 3 oracle failure, 4 I/O or config parse error.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Admissibility { .. }
            | Error::Precondition(_)
            | Error::BallExit { .. }
            | Error::InvalidInput(_)
            | Error::Shape(_)
            | Error::NonFinite(_)
            | Error::LinearSolve { .. }
            | Error::NoFit { .. } => 1,
            Error::Bracket { .. } | Error::SingularJacobian { .. } | Error::Oracle(_) => 3,
            Error::Config(_) | Error::Io(_) => 4,
        }
    }
}
