use thiserror::Error;

use crate::pipeline::LifecycleState;
use crate::schema::Violation;
use crate::value::Value;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at {position}: {message}")]
    Parse { position: String, message: String },

    #[error("unsupported schema feature at {position}: {feature}")]
    UnsupportedFeature { position: String, feature: String },

    #[error("{what} would produce {count} entries, over the cap of {cap}")]
    Explosion { what: String, count: usize, cap: usize },

    #[error("schema is not normalizable: {0}")]
    NotNormalizable(String),

    #[error("operator `{0}` is already registered")]
    DuplicateOperator(String),

    #[error("unknown operator `{0}`")]
    UnknownOperator(String),

    #[error("invalid operator name `{0}`")]
    InvalidName(String),

    #[error("defaults of operator `{op}` violate its schema: {violation}")]
    InvalidDefaults { op: String, violation: Violation },

    #[error("hyperparameter schema of operator `{op}` has an unsupported shape: {message}")]
    InvalidShape { op: String, message: String },

    #[error("configuration of `{op}` violates its schema: {violation}")]
    SchemaViolation { op: String, violation: Violation },

    #[error("training failed: {0}")]
    Training(String),

    #[error("cannot {action} a {actual} pipeline; it must be at least {required}")]
    Lifecycle {
        action: &'static str,
        required: LifecycleState,
        actual: LifecycleState,
    },

    #[error("choice needs at least 2 alternatives, got {0}")]
    Arity(usize),

    #[error("mangled name `{0}` is produced twice")]
    NameCollision(String),

    #[error("operator `{0}` has an empty search space")]
    EmptyOperatorSpace(String),

    #[error("discriminant `{key}` has unknown value {value:?}")]
    UnknownDiscriminant { key: String, value: Option<Value> },

    #[error("point is missing hyperparameter `{0}`")]
    MissingHyperparameter(String),

    #[error("point has unexpected key `{0}`")]
    UnexpectedKey(String),

    #[error("configuration is not in the search space: {0}")]
    NotInSpace(String),

    #[error("search space is empty")]
    EmptySpace,

    #[error("configuration error: {0}")]
    Config(String),

    #[error("data error: {0}")]
    Data(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(position: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            position: position.into(),
            message: message.into(),
        }
    }

    pub(crate) fn unsupported(position: impl Into<String>, feature: impl Into<String>) -> Self {
        Error::UnsupportedFeature {
            position: position.into(),
            feature: feature.into(),
        }
    }

    pub(crate) fn from_json(err: serde_json::Error) -> Self {
        Error::parse(
            format!("line {}, column {}", err.line(), err.column()),
            err.to_string(),
        )
    }
}
