use std::path::PathBuf;

use thiserror::Error;

use crate::order::WordOrder;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("poisson rate must be positive, got {0}")]
    NonPositiveRate(f64),

    #[error("expected count must be positive, got {0}")]
    NonPositiveExpected(f64),

    #[error("cannot round negative value {0}")]
    NegativeValue(f64),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("design matrix is rank deficient; dependent columns: {}", .columns.join(", "))]
    SingularDesign { columns: Vec<String> },

    #[error("linear predictor overflow at observation {row} (V = {value:.3})")]
    Overflow { row: usize, value: f64 },

    #[error("covariance matrix is not positive semidefinite: {0}")]
    NotPsd(String),

    #[error("invalid word order {text:?}: {reason} at position {position}")]
    ParseOrder {
        text: String,
        position: usize,
        reason: String,
    },

    #[error("{source_name}: line {line}: {message}")]
    Format {
        source_name: String,
        line: usize,
        message: String,
    },

    #[error("{source_name}: missing orders: {}", display_orders(.missing))]
    MissingOrders {
        source_name: String,
        missing: Vec<WordOrder>,
    },

    #[error("{source_name}: duplicate order {order}")]
    DuplicateOrder {
        source_name: String,
        order: WordOrder,
    },

    #[error("{source_name}: order {order}: {column} is negative ({value})")]
    NegativeCount {
        source_name: String,
        order: WordOrder,
        column: String,
        value: f64,
    },

    #[error("{source_name}: order {order}: {column} = {value:?} is not 0 or 1")]
    NonBinary {
        source_name: String,
        order: WordOrder,
        column: String,
        value: String,
    },

    #[error("feature system {system}: {message}")]
    InvalidSystem { system: String, message: String },

    #[error("dependent variable mismatch: model fitted on {fitted}, requested {requested}")]
    DvMismatch { fitted: String, requested: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

fn display_orders(orders: &[WordOrder]) -> String {
    orders
        .iter()
        .map(|o| o.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

impl Error {
    /// True for errors that stem from numerical failure of a fit rather
    /// than malformed input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::SingularDesign { .. } | Error::Overflow { .. } | Error::NotPsd(_)
        )
    }
}
