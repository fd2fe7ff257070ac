use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("quadrature did not converge: error {error:.3e} above tolerance {tolerance:.3e} after {subdivisions} subdivisions")]
    NonConvergence {
        error: f64,
        tolerance: f64,
        subdivisions: usize,
    },
    #[error(
        "eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:.3e})"
    )]
    EigenNonConvergence { sweeps: usize, off_norm: f64 },
    #[error("Im(tau) must be positive, got {0}")]
    InvalidTau(f64),
    #[error("theta series needs more than {cap} terms for the requested tolerance")]
    TailBoundFailure { cap: usize },
    #[error("Weyl shift needs Im(w) in (pi/alpha)Z, got Im(w) = {im}")]
    InvalidShift { im: f64 },
    #[error("point set has {0} points, at least 2 required")]
    TooFewPoints(usize),
    #[error("no window radius fits inside the data extent [{lo}, {hi}]")]
    NoAdmissibleWindow { lo: f64, hi: f64 },
    #[error("two-sided indexing is ambiguous: {0}")]
    IndexingAmbiguity(String),
    #[error("product truncation tail bound violated at Im(z) = {y}: {detail}")]
    TailBoundViolation { y: f64, detail: String },
    #[error("denominator G_n(z_n) vanishes or underflows at node {index}")]
    ZeroDenominator { index: i64 },
    #[error("reconstruction needs alpha < beta, got alpha = {alpha}, beta = {beta}")]
    AlphaBetaOrder { alpha: f64, beta: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid point-set descriptor: {0}")]
    Descriptor(String),
}
