use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("outside the domain of the closed form: {0}")]
    Domain(String),
    #[error("degenerate model (beta = {beta:e}): the exceptional points sit on the real axis")]
    DegenerateModel { beta: f64 },
    #[error("lambda = {lambda} lies within {distance:e} of an exceptional point")]
    DefectivePoint { lambda: String, distance: f64 },
    #[error("branch tracking step too large: change {step:.3e} exceeds {limit:.3e}")]
    UnwrapAmbiguity { step: f64, limit: f64 },
    #[error("invalid path: {0}")]
    InvalidPath(String),
    #[error("exceptional point search did not converge after {iterations} iterations")]
    SearchFailure { iterations: usize },
    #[error("eigenvalue continuation is ambiguous at step {step} (candidates {gap:e} apart)")]
    NearEp { step: usize, gap: f64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
