use thiserror::Error;

pub type Result<T> = std::result::Result<T, FrameError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FrameError {
    /// Input violates a documented precondition.
    #[error("validation error: {0}")]
    Validation(String),

    /// A shift sits inside (or numerically on) the spectrum of the matrix.
    #[error("singular resolvent: shift {shift} is within {gap:e} of the spectrum")]
    Singular { shift: f64, gap: f64 },

    /// No quantization trial met the requested operator-norm deviation.
    #[error("quantization failed: best deviation {best_deviation:e} does not beat {eps_quant:e}")]
    Quantization { best_deviation: f64, eps_quant: f64 },

    /// The grid search could not reach the requested cover tolerance.
    #[error("cover failure: {0}")]
    Cover(String),

    /// An internal invariant was broken. Signals a bug, never bad input.
    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

impl FrameError {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        FrameError::Validation(msg.into())
    }

    pub(crate) fn invariant(msg: impl Into<String>) -> Self {
        FrameError::Invariant(msg.into())
    }
}
