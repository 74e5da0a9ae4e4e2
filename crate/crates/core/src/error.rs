use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid american odds {0}: magnitude must be at least 100")]
    InvalidAmericanOdds(f64),
    #[error("invalid decimal odds {0}: must be greater than 1")]
    InvalidDecimalOdds(f64),
    #[error("probability {0} is outside [0, 1]")]
    InvalidProbability(f64),
    #[error("win and push probabilities sum to {0}, which exceeds 1")]
    ProbabilitySumExceedsOne(f64),
    #[error("standard deviation must be positive and finite, got {0}")]
    NonPositiveSd(f64),
    #[error("interval lower bound lies above its upper bound")]
    InvalidInterval,
    #[error("{0}")]
    Domain(String),
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error(
        "projected spread {0} is outside the model range of +/-{1} points; \
         projections this lopsided have too little historical data to be priced"
    )]
    OutOfModel(f64, i32),
    #[error("sportsbook line {0} is outside the supported range of +/-{1} points")]
    LineOutOfRange(f64, i32),
    #[error("column for projected margin {0} has zero total weight")]
    DegenerateColumn(i32),
    #[error("row {row}, column {column}: {message}")]
    Csv { row: u64, column: String, message: String },
    #[error("malformed table: {0}")]
    Table(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
