use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{routine} did not converge within {iterations} iterations")]
    NonConvergence {
        routine: &'static str,
        iterations: usize,
    },

    #[error("matrix is not Hermitian (max |m - m^dagger| = {residual:e})")]
    NotHermitian { residual: f64 },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("state is not normalized (norm = {norm})")]
    NotNormalized { norm: f64 },

    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),

    #[error("density matrix is not physical: {0}")]
    NonPhysical(String),

    #[error("negative radicand {0:e} in I-concurrence")]
    NegativeRadicand(f64),

    #[error("rank {rank} exceeds the full-tensor bound of {max}; use the quasi-pure estimate (tau-a) instead")]
    RankTooLarge { rank: usize, max: usize },

    #[error("quasi-pure matrix undefined: dominant eigenvector has vanishing tau (A = {0:e})")]
    DegenerateKappa(f64),

    #[error("exchange symmetry broken (residual {0:e})")]
    BrokenSymmetry(f64),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
