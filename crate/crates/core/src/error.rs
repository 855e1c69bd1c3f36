use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A relation's preparation assumption does not hold for the given state.
    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("projection onto the {0} subspace annihilates the state")]
    DegenerateProjection(&'static str),

    /// The wavefunction has non-negligible support on the outermost grid layer.
    #[error("boundary decay violated on [{x_min}, {x_max}]: edge/peak amplitude ratio {ratio:.3e} exceeds {limit:.0e}")]
    BoundaryDecay {
        x_min: f64,
        x_max: f64,
        ratio: f64,
        limit: f64,
    },

    /// An invariant that holds for every valid engine output was violated.
    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
