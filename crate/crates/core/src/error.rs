use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    MalformedRow { line: u64, message: String },

    #[error("missing required column `{0}`")]
    MissingColumn(String),

    #[error("vehicle {vehicle}: timestamps {first} and {second} are not on the 0.1 s grid")]
    Cadence {
        vehicle: String,
        first: f64,
        second: f64,
    },

    #[error("vehicle {vehicle}: duplicate sample at t = {time}")]
    DuplicateSample { vehicle: String, time: f64 },

    #[error("missing sample for vehicle {vehicle} at pair step t = {time}")]
    MissingSample { vehicle: String, time: f64 },

    #[error("degenerate clustering input: {0}")]
    DegenerateClustering(String),

    #[error("cannot identify intention cluster: no lane-change pairs")]
    NoLaneChangePairs,

    #[error("non-finite objective at weights ({gamma1}, {gamma2})")]
    NonFiniteObjective { gamma1: f64, gamma2: f64 },

    #[error("non-positive elapsed time between steps {from} and {to}")]
    NonPositiveElapsed { from: usize, to: usize },

    #[error("index {index} out of range for series of length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("process starts absorbed: initial evidence {initial} >= threshold {threshold}")]
    StartsAbsorbed { initial: f64, threshold: f64 },

    #[error("direction {0} is not available for this pair")]
    DirectionUnavailable(i8),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("non-finite log-likelihood: {0}")]
    NonFiniteLikelihood(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True when the error is caused by user-supplied input rather than a
    /// numerical or internal failure.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::MalformedRow { .. }
                | Error::MissingColumn(_)
                | Error::Cadence { .. }
                | Error::DuplicateSample { .. }
                | Error::DirectionUnavailable(_)
                | Error::InvalidParams(_)
                | Error::InvalidScenario(_)
                | Error::Io(_)
                | Error::Csv(_)
                | Error::Json(_)
        )
    }
}
