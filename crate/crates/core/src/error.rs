use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is singular (|det| = {det:e}, threshold {threshold:e})")]
    SingularMatrix { det: f64, threshold: f64 },

    #[error("invalid stochastic matrix: {0}")]
    InvalidStochasticMatrix(String),

    #[error("invalid probability table: {0}")]
    InvalidProbability(String),

    #[error("Hermite matrix R is not symmetric (max |R - R^T| = {0:e})")]
    AsymmetricR(f64),

    #[error("Hermite order {order} exceeds the configured maximum {max}")]
    OrderOverflow { order: usize, max: usize },

    #[error("numerically negative probability {0:e}")]
    NumericalNegativity(f64),

    #[error("Hermite value has a non-negligible imaginary part ({im:e} vs real {re:e})")]
    ComplexResidue { re: f64, im: f64 },

    #[error("state is not a finite superposition of coherent states")]
    UnsupportedState,

    #[error("degenerate Gaussian: I - 2M is singular (coherent or vacuum-like state with nonzero mean)")]
    DegenerateGaussian,

    #[error("non-physical Gaussian state: {0}")]
    NonPhysicalSpec(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("truncation deficit {deficit:e} exceeds tolerance {eps:e}")]
    TailTooLarge { deficit: f64, eps: f64 },

    #[error("Bell number {0} exceeds the Cirelson bound 2*sqrt(2)")]
    InvalidBellNumber(f64),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("all {starts} optimizer starts failed; first error: {first}")]
    AllStartsFailed { starts: usize, first: Box<Error> },

    #[error("invalid state description: {0}")]
    StateFile(String),
}

impl Error {
    /// Stable machine-readable name of the error case.
    pub fn code(&self) -> &'static str {
        match self {
            Error::SingularMatrix { .. } => "SingularMatrix",
            Error::InvalidStochasticMatrix(_) => "InvalidStochasticMatrix",
            Error::InvalidProbability(_) => "InvalidProbability",
            Error::AsymmetricR(_) => "AsymmetricR",
            Error::OrderOverflow { .. } => "OrderOverflow",
            Error::NumericalNegativity(_) => "NumericalNegativity",
            Error::ComplexResidue { .. } => "ComplexResidue",
            Error::UnsupportedState => "UnsupportedState",
            Error::DegenerateGaussian => "DegenerateGaussian",
            Error::NonPhysicalSpec(_) => "NonPhysicalSpec",
            Error::InvalidParameter(_) => "InvalidParameter",
            Error::TailTooLarge { .. } => "TailTooLarge",
            Error::InvalidBellNumber(_) => "InvalidBellNumber",
            Error::InvalidConfig(_) => "InvalidConfig",
            Error::AllStartsFailed { .. } => "AllStartsFailed",
            Error::StateFile(_) => "StateFile",
        }
    }

    /// Errors caused by malformed input rather than by evaluation.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter(_)
                | Error::InvalidConfig(_)
                | Error::StateFile(_)
                | Error::NonPhysicalSpec(_)
                | Error::InvalidStochasticMatrix(_)
                | Error::InvalidProbability(_)
        )
    }
}
