use thiserror::Error;

/// A command failure tagged with a stable, machine-parseable category.
#[derive(Debug, Error)]
#[error("{category}: {message}")]
pub struct CliError {
    pub category: &'static str,
    pub message: String,
}

impl CliError {
    pub fn new(category: &'static str, message: impl Into<String>) -> Self {
        CliError {
            category,
            message: message.into(),
        }
    }

    pub fn config(message: impl Into<String>) -> Self {
        Self::new("config", message)
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

impl From<tempvec::Error> for CliError {
    fn from(e: tempvec::Error) -> Self {
        use tempvec::Error as E;
        let category = match &e {
            E::Io(_) => "io",
            E::Csv(_) | E::MissingColumn(_) | E::NoRows { .. } | E::TimestampColumn { .. } => {
                "input"
            }
            E::MissingRating { .. } => "input",
            E::Config(_) => "config",
            E::SplitTooSmall(_) | E::EmptyDataset => "empty-dataset",
            E::EmptyTimeline | E::NoPairs => "no-training-pairs",
            E::Divergence(_) => "divergence",
            E::EmptyHistory => "empty-history",
            E::NoEvaluableUsers => "no-evaluable-users",
            E::UnknownItem(_) => "vocabulary-mismatch",
            E::ModelFormat(_) => "model-format",
        };
        let message = match e {
            E::EmptyDataset => "empty after preprocessing".to_string(),
            other => other.to_string(),
        };
        CliError { category, message }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::new("io", e.to_string())
    }
}
