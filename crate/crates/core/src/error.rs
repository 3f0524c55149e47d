use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: non-numeric value {token:?}")]
    NonNumeric { line: usize, token: String },
    #[error("line {line}: non-finite value {token:?}")]
    NonFinite { line: usize, token: String },
    #[error("line {line}: row has no values")]
    EmptyRow { line: usize },
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("subsequence length {length} exceeds series length {series_len}")]
    LengthTooLong { length: usize, series_len: usize },
    #[error("shortest series has {min_len} points, need at least {required}")]
    DatasetTooShort { min_len: usize, required: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("projection needs at least {required} subsequences, got {actual}")]
    TooFewSamples { required: usize, actual: usize },
    #[error("every projected point lies at the origin")]
    DegenerateProjection,
    #[error("k = {k} exceeds the number of points ({n})")]
    TooManyClusters { k: usize, n: usize },
    #[error("label sequences differ in length ({left} vs {right})")]
    LabelLengthMismatch { left: usize, right: usize },
    #[error("unknown cluster id {cluster} (k = {k})")]
    UnknownCluster { cluster: usize, k: usize },
    #[error("eigendecomposition did not converge")]
    EigenFailure,
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}
