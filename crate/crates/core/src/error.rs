use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is not Hermitian (max |a - a^dagger| = {0:e})")]
    NotHermitian(f64),

    #[error("matrix is not unitary (||U^dagger U - I||_F = {0:e})")]
    NotUnitary(f64),

    #[error("not a density matrix: {0}")]
    InvalidDensityMatrix(String),

    #[error("Kraus set is incomplete (||sum M^dagger M - I||_F = {0:e})")]
    IncompleteKraus(f64),

    #[error("Gram-Schmidt completion broke down at column {0}")]
    GramSchmidtBreakdown(usize),

    #[error("matrix is singular")]
    Singular,

    #[error("eigensolver did not converge after {0} sweeps")]
    EigNoConvergence(usize),

    #[error("optimizer did not converge: best residual {best:e} after {attempts} attempts")]
    NoConvergence { best: f64, attempts: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{stage} failed at t = {t}: {source}")]
    Stage {
        stage: &'static str,
        t: f64,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
