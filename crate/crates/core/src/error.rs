use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("unknown subsystem label `{0}`")]
    UnknownLabel(String),

    #[error("duplicate subsystem label `{0}`")]
    DuplicateLabel(String),

    #[error("labels {0:?} are not a permutation of the layout")]
    NotAPermutation(Vec<String>),

    #[error("matrix is not Hermitian: max |M - M^dag| = {0:.3e}")]
    NotHermitian(f64),

    #[error("matrix is not positive semidefinite: min eigenvalue = {0:.3e}")]
    NotPositive(f64),

    #[error("state is not normalized: |norm - 1| = {0:.3e}")]
    NotNormalized(f64),

    #[error("operator support has rank {found}, need at most {max}")]
    RankTooHigh { found: usize, max: usize },

    #[error("eigensolver did not converge within {0} sweeps")]
    NoConvergence(usize),

    #[error("invalid {field}: {message}")]
    InvalidInput {
        field: &'static str,
        message: String,
    },
}

impl Error {
    pub(crate) fn invalid(field: &'static str, message: impl Into<String>) -> Self {
        Error::InvalidInput {
            field,
            message: message.into(),
        }
    }
}
