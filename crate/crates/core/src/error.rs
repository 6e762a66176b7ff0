use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("unreadable source: {0}")]
    Csv(#[from] csv::Error),

    #[error("column `{0}` not found in input")]
    MissingColumn(String),

    #[error("no parseable rows ({skipped} malformed)")]
    NoRows { skipped: usize },

    #[error("timestamp column unparseable: none of {rows} rows had a valid timestamp")]
    TimestampColumn { rows: usize },

    #[error("interaction ({user}, {item}) has no rating but a rating range was given")]
    MissingRating { user: String, item: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("need at least 3 interactions to split, got {0}")]
    SplitTooSmall(usize),

    #[error("empty dataset")]
    EmptyDataset,

    #[error("empty timeline")]
    EmptyTimeline,

    #[error("no training pairs could be generated")]
    NoPairs,

    #[error("training diverged: {0}")]
    Divergence(String),

    #[error("empty history")]
    EmptyHistory,

    #[error("no evaluable users")]
    NoEvaluableUsers,

    #[error("unknown item `{0}`")]
    UnknownItem(String),

    #[error("malformed model file: {0}")]
    ModelFormat(String),
}
