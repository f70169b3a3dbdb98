use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("unstable theta: ‖θ‖₁ = {norm} must be < 1")]
    UnstableTheta { norm: f64 },

    #[error("unstable rho: |ρ| = {abs} must be < 1")]
    UnstableRho { abs: f64 },

    #[error("theta must not be the zero vector")]
    ZeroTheta,

    #[error("noise variance must be positive and finite, got {0}")]
    BadVariance(f64),

    #[error("matrix B is singular (condition estimate {condition:e})")]
    SingularB { condition: f64 },

    #[error("Toeplitz matrix is not positive definite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error("fixed-point iteration did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("singular design matrix: {0}")]
    SingularDesign(String),

    #[error("degenerate residuals: sum of squares is zero")]
    DegenerateResiduals,

    #[error("estimated last AR coefficient is numerically zero ({0:e})")]
    NearZeroThetaP(f64),

    #[error("sample Toeplitz autocovariance matrix is singular")]
    SingularToeplitz,

    #[error("h-test inapplicable: 1 - n·V(θ̂₁) = {radicand} is not positive")]
    InapplicableH { radicand: f64 },

    #[error("auxiliary regression is singular")]
    SingularAuxiliaryRegression,

    #[error("argument outside domain: {0}")]
    DomainError(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    /// Stable machine-readable name of the error variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::UnstableTheta { .. } => "UnstableTheta",
            Error::UnstableRho { .. } => "UnstableRho",
            Error::ZeroTheta => "ZeroTheta",
            Error::BadVariance(_) => "BadVariance",
            Error::SingularB { .. } => "SingularB",
            Error::NotPositiveDefinite { .. } => "NotPositiveDefinite",
            Error::NoConvergence { .. } => "NoConvergence",
            Error::SingularDesign(_) => "SingularDesign",
            Error::DegenerateResiduals => "DegenerateResiduals",
            Error::NearZeroThetaP(_) => "NearZeroThetaP",
            Error::SingularToeplitz => "SingularToeplitz",
            Error::InapplicableH { .. } => "InapplicableH",
            Error::SingularAuxiliaryRegression => "SingularAuxiliaryRegression",
            Error::DomainError(_) => "DomainError",
            Error::InvalidInput(_) => "InvalidInput",
        }
    }
}
