use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid Fock space: {0}")]
    InvalidSpace(String),

    #[error("mode {mode} does not exist in a {modes}-mode space")]
    InvalidMode { mode: &'static str, modes: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("generator is not anti-Hermitian (max deviation {deviation:.3e})")]
    NotAntiHermitian { deviation: f64 },

    #[error("matrix is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix exponential failed its accuracy target (unitarity defect {defect:.3e})")]
    ExpmAccuracy { defect: f64 },

    #[error("density matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("density matrix trace {trace} outside (0, 1]")]
    InvalidTrace { trace: f64 },

    #[error("cutoff d={dim} too small: population {population:.3e} would fall outside the space")]
    CutoffTooSmall { dim: usize, population: f64 },

    #[error("truncation inadequate: mode {mode} needs about {required:.1} levels, cutoff is {dim}")]
    TruncationInadequate {
        mode: &'static str,
        required: f64,
        dim: usize,
    },

    #[error("unphysical covariance matrix: {0}")]
    UnphysicalCovariance(String),

    #[error("invalid state parameters: {0}")]
    InvalidSpec(String),

    #[error("manifold N={n} out of range (0..={max})")]
    ManifoldOutOfRange { n: usize, max: usize },

    #[error("rotation axis must be a unit vector (norm {norm})")]
    NonUnitAxis { norm: f64 },

    #[error("dataset needs at least {required} samples, found {found}")]
    InsufficientSamples { required: usize, found: usize },

    #[error("dataset column {column} has zero variance")]
    DegenerateDataset { column: usize },

    #[error("estimate is too far from physical to repair (min symplectic eigenvalue {min_symplectic:.6})")]
    UnrepairableEstimate { min_symplectic: f64 },

    #[error("bootstrap failed: {0}")]
    Bootstrap(String),

    #[error("measurement probabilities sum to {total}, below the allowed {required}")]
    ProbabilityDeficit { total: f64, required: f64 },

    #[error("count records are inconsistent: {0}")]
    InvalidCounts(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("malformed file: {0}")]
    Format(String),
}

impl Error {
    /// True when the error stems from user-supplied parameters rather than
    /// from a numerical contract failing.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidSpace(_)
                | Error::InvalidMode { .. }
                | Error::InvalidSpec(_)
                | Error::ManifoldOutOfRange { .. }
                | Error::NonUnitAxis { .. }
                | Error::Format(_)
        )
    }
}
