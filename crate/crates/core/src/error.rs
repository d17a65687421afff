use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid pattern spec: {0}")]
    InvalidSpec(String),

    #[error("generator {generator} is not defined for a {dim}-dimensional label lattice")]
    UnsupportedGenerator { generator: String, dim: usize },

    #[error("consistency relations violated: residual {residual:e} exceeds {tolerance:e}")]
    Consistency { residual: f64, tolerance: f64 },

    #[error("window error: {0}")]
    Window(String),

    #[error("frequency {alpha} is incommensurate with size {size} along axis {axis}")]
    Incommensurate { alpha: String, size: usize, axis: usize },

    #[error("pattern is not Delone: minimal separation {r_min:e}")]
    NotDelone { r_min: f64 },

    #[error("empty restriction: {0}")]
    EmptyRestriction(String),

    #[error("eigensolver failed: {0}")]
    Solver(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("a {0}x{0} matrix has no pfaffian")]
    OddPfaffian(usize),

    #[error("no label within tolerance {tol:e} of IDS {ids} (best residual {best:e})")]
    NoLabel { ids: f64, tol: f64, best: f64 },

    #[error("gap track too short: {0} points, need at least 3")]
    TrackTooShort(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by numerical breakdown rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Solver(_) | Error::Consistency { .. } | Error::NotDelone { .. }
        )
    }
}
