use chrono::NaiveDate;
use thiserror::Error;

/// Errors raised anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("year {0} is outside the supported Gregorian range 1583..=4099")]
    YearOutOfRange(i32),

    #[error("period index {index} is outside the series extent ({len} periods)")]
    PeriodOutOfRange { index: usize, len: usize },

    #[error("date {0} is outside the grid")]
    DateOutOfRange(NaiveDate),

    #[error("calendar config line {line}: {msg}")]
    CalendarConfig { line: usize, msg: String },

    #[error("no corresponding past special day for {date}: {reason}")]
    Rule { date: NaiveDate, reason: String },

    #[error("data error: {0}")]
    Data(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("forecast horizon {horizon} from origin {origin} is not covered: {msg}")]
    Horizon {
        origin: usize,
        horizon: usize,
        msg: String,
    },

    #[error("metric error: {0}")]
    Metric(String),

    #[error("benchmark has no qualifying historical day for {0}")]
    Benchmark(NaiveDate),

    #[error("config error: {0}")]
    Config(String),

    #[error("undefined correlation: {0}")]
    Correlation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
