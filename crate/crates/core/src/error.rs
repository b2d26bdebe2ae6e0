use crate::index::ElementKey;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("oscillator length must be positive and finite, got {0}")]
    InvalidScale(f64),

    #[error("non-finite intermediate value in float evaluation of {key}; retry with the exact backend")]
    Overflow { key: ElementKey },

    #[error("recurrence neighbour (n_minus={n_minus}, n_plus={n_plus}) is not available")]
    MissingNeighbor { n_minus: u32, n_plus: u32 },

    #[error("key {key} does not have the {{0, n_plus}} shape required by the four-index recurrence")]
    ShapeMismatch { key: ElementKey },

    #[error("key {key} lies outside the basis cutoff")]
    OutOfCutoff { key: ElementKey },

    #[error("cutoff would enumerate {keys} canonical keys, above the limit of {limit}")]
    TooLarge { keys: u128, limit: u128 },

    #[error("quadrature did not converge: refinement changed the value by {estimate:e} (allowed {allowed:e})")]
    NonConvergence { estimate: f64, allowed: f64 },

    #[error("while evaluating {key}: {source}")]
    Key {
        key: ElementKey,
        #[source]
        source: Box<Error>,
    },

    #[error("bad magic bytes, not an OSCV tensor file")]
    BadMagic,

    #[error("unsupported format version {0}")]
    UnsupportedVersion(u16),

    #[error("file is truncated: {0}")]
    Truncated(String),

    #[error("content digest mismatch (expected {expected}, computed {computed})")]
    DigestMismatch { expected: String, computed: String },

    #[error("malformed tensor file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn at(self, key: ElementKey) -> Self {
        match self {
            e @ Error::Key { .. } => e,
            e => Error::Key {
                key,
                source: Box::new(e),
            },
        }
    }
}
