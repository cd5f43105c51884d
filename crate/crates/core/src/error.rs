use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported filter order {0} (supported: 1..=10)")]
    UnsupportedFilterOrder(usize),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("octave exhausted: {len} samples left, filter needs {taps}")]
    OctaveExhausted { len: usize, taps: usize },

    #[error("insufficient samples at octave {octave}: {available} border-free coefficients")]
    InsufficientSamples { octave: u32, available: usize },

    #[error("octave {0} not present")]
    MissingOctave(u32),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("parameter out of domain: {0}")]
    Domain(String),

    #[error("circulant embedding failed: minimum eigenvalue {min_eigenvalue:e} at size {size}")]
    EmbeddingFailed { size: usize, min_eigenvalue: f64 },

    #[error("matrix is not symmetric (relative asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("degenerate spectrum at octave {octave}: eigenvalue index {index} is {value:e}")]
    DegenerateSpectrum { octave: u32, index: usize, value: f64 },

    #[error("point {point}, replication {replication}: {source}")]
    Replication {
        point: usize,
        replication: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Errors caused by bad user input, as opposed to failures while running.
    pub fn is_validation(&self) -> bool {
        match self {
            Error::Replication { source, .. } => source.is_validation(),
            Error::UnsupportedFilterOrder(_)
            | Error::InvalidInput(_)
            | Error::Dimension(_)
            | Error::Domain(_)
            | Error::NotSymmetric(_) => true,
            Error::Json(e) => !e.is_io(),
            Error::Csv(e) => !matches!(e.kind(), csv::ErrorKind::Io(_)),
            _ => false,
        }
    }
}
