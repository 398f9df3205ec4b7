use thiserror::Error;

/// Errors surfaced by the library. Every constructor validates its domain
/// up front so the numerical routines can stay infallible.
#[derive(Debug, Error)]
pub enum Error {
    #[error("fidelity {0} outside [0.25, 1]")]
    FidelityOutOfRange(f64),
    #[error("state vector is not normalized (|c0|^2 + |c1|^2 = {0})")]
    NotNormalized(f64),
    #[error("basis vectors are not orthogonal (|<a|b>| = {0:.3e})")]
    NotOrthogonal(f64),
    #[error("matrix is not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),
    #[error("matrix trace is {0}, expected 1")]
    BadTrace(f64),
    #[error("matrix is not positive semidefinite (eigenvalue {0:.3e})")]
    NotPositiveSemidefinite(f64),
    #[error("invalid Bell-diagonal coefficients: {0}")]
    InvalidCoefficients(String),
    #[error("invalid probability distribution: {0}")]
    InvalidDistribution(String),
    #[error("outcome probability {0:.3e} is too small to condition on")]
    ZeroProbabilityOutcome(f64),
    #[error("eta {0} outside the open interval (0, 0.25)")]
    EtaOutOfRange(f64),
    #[error("gamma {gamma} outside [{min}, 0.5]")]
    GammaOutOfRange { gamma: f64, min: f64 },
    #[error("basis is not one of the four CHSH bases")]
    BasisNotInQuartet,
    #[error("basis indices must be distinct and in {{1, 2}}")]
    BadBasisIndex,
    #[error("grid_steps {0} is below the minimum of 8")]
    GridTooCoarse(usize),
    #[error("post-selected state has off-Bell-diagonal residual {0:.3e}")]
    NonBellDiagonalResidual(f64),
    #[error("distillation depth {0} exceeds the cap of {1}")]
    DepthTooLarge(u32, u32),
    #[error("rate curve vanishes at its local maximum; kappa bounds are undefined")]
    DegenerateRateCurve,
    #[error("scaled eta {eta} left (0, 0.25) at k = {k}")]
    ScaledEtaOutOfRange { eta: f64, k: u32 },
}

pub type Result<T> = std::result::Result<T, Error>;
