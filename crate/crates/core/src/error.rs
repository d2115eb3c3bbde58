use thiserror::Error;

/// Errors produced by the simulation engine and the protocols built on it.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("the Pauli convention is only defined for spin 1/2, got spin {twice_spin}/2")]
    Convention { twice_spin: u32 },

    #[error("invalid spin quantum number 2s = {0}; spin must be a positive half-integer")]
    InvalidSpin(u32),

    #[error("register with {factors} factors of dimension {local_dim} exceeds the dense budget of {cap} total dimension")]
    RegisterTooLarge {
        factors: usize,
        local_dim: usize,
        cap: usize,
    },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("factor index {index} out of range for a register with {factors} factors")]
    FactorOutOfRange { index: usize, factors: usize },

    #[error("operator is not Hermitian (max deviation {deviation:e})")]
    NonHermitian { deviation: f64 },

    #[error("state is not normalized (norm {norm})")]
    NotNormalized { norm: f64 },

    #[error("value {value} is not in the spectrum of the measured observable")]
    NotInSpectrum { value: f64 },

    #[error("measurement branch has probability {probability:e}, at or below the collapse threshold")]
    ZeroProbabilityBranch { probability: f64 },

    #[error("probability {value:e} lies outside the clamping window")]
    ProbabilityOutOfRange { value: f64 },

    #[error("axis vector {0:?} is not a unit vector")]
    NonUnitAxis([f64; 3]),

    #[error("coupling strength is zero; the estimator divides by it, use the exact oracle instead")]
    ZeroCoupling,

    #[error("rotation angle {theta} has vanishing sine; the rotation protocol cannot be inverted")]
    DegenerateAngle { theta: f64 },

    #[error("times are not ordered: {0}")]
    UnorderedTimes(String),

    #[error("invalid query: {0}")]
    InvalidQuery(String),

    #[error("exact correlation has magnitude {magnitude:e}; relative errors are undefined")]
    Normalization { magnitude: f64 },

    #[error("the coupling does not isolate a single component (factor {factor})")]
    DegenerateFactor { factor: String },

    #[error("ancilla state has <S^a> = {expectation:e}; a background correction requires the exact oracle")]
    UnbalancedAncilla { expectation: f64 },

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("numerical self-check failed: {0}")]
    Tolerance(String),
}

/// Coarse classification used by drivers to map failures onto exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Malformed input: bad dimensions, unknown values, invalid arguments.
    Input,
    /// Valid input that hits a physics-domain singularity.
    Domain,
    /// An internal consistency check exceeded its tolerance.
    Numerical,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::ZeroProbabilityBranch { .. }
            | Error::ZeroCoupling
            | Error::DegenerateAngle { .. }
            | Error::Normalization { .. }
            | Error::DegenerateFactor { .. }
            | Error::UnbalancedAncilla { .. } => ErrorKind::Domain,
            Error::Tolerance(_) | Error::ProbabilityOutOfRange { .. } => ErrorKind::Numerical,
            _ => ErrorKind::Input,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
