use thiserror::Error;

use crate::eta::EtaIndex;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("density evaluation failure at y = {y}")]
    DensityEvaluation { y: f64 },

    #[error("invalid error model: {0}")]
    InvalidModel(String),

    #[error("moment diverges for eta{index}")]
    MomentDiverges { index: EtaIndex },

    #[error("quadrature failed to converge (achieved bound {achieved:e})")]
    QuadratureNonConvergence { achieved: f64 },

    #[error("eta{index}: {source}")]
    EtaEntry {
        index: EtaIndex,
        #[source]
        source: Box<Error>,
    },

    #[error("eta{index} is not available in this table")]
    EtaUnavailable { index: EtaIndex },

    #[error("eta{index} has no exact value")]
    InexactEta { index: EtaIndex },

    #[error("eta table invariant violated: {0}")]
    EtaInvariant(String),

    #[error("singular information (delta = {delta:e})")]
    SingularInformation { delta: f64 },

    #[error("unknown pattern shape `{0}`")]
    UnknownPattern(String),

    #[error("invalid moments: {0}")]
    InvalidMoments(String),

    #[error("no benchmark solution at any k <= {k_max}")]
    NoBenchmark { k_max: u32 },

    #[error("csv line {line}: {message}")]
    Csv { line: u64, message: String },

    #[error("dataset is empty after cleaning")]
    EmptyDataset,

    #[error("singular covariance (condition {condition:e}); null directions {directions:?}")]
    SingularCovariance {
        condition: f64,
        directions: Vec<Vec<f64>>,
    },

    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),

    #[error("all replications failed")]
    AllReplicationsFailed,

    #[error("parse error at {line}:{column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures caused by bad input rather than by the numerics.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::InvalidModel(_)
                | Error::UnknownPattern(_)
                | Error::InvalidMoments(_)
                | Error::Csv { .. }
                | Error::EmptyDataset
                | Error::InvalidConfig(_)
                | Error::Parse { .. }
                | Error::InvalidArgument(_)
                | Error::Io(_)
        )
    }
}
