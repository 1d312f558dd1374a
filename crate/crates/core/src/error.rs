use std::io;

use thiserror::Error;

/// Errors produced anywhere in the toolkit.
///
/// Every variant maps onto a short machine-parsable class name (see
/// [`Error::class`]) that the command-line front end prints on failure.
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("input error: {0}")]
    Input(String),

    #[error("shape error: {0}")]
    Shape(String),

    #[error("learning error: {0}")]
    Learning(String),

    #[error("decoding error: {0}")]
    Decoding(String),

    #[error("training error: {0}")]
    Training(String),

    #[error("format error in {path}: {message}")]
    Format { path: String, message: String },

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
}

impl Error {
    pub fn class(&self) -> &'static str {
        match self {
            Error::Config(_) => "config",
            Error::Input(_) => "input",
            Error::Shape(_) => "shape",
            Error::Learning(_) => "learning",
            Error::Decoding(_) => "decoding",
            Error::Training(_) => "training",
            Error::Format { .. } => "format",
            Error::Stage { source, .. } => source.class(),
            Error::Io { .. } => "io",
        }
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    pub(crate) fn format(path: impl AsRef<std::path::Path>, message: impl Into<String>) -> Self {
        Error::Format {
            path: path.as_ref().display().to_string(),
            message: message.into(),
        }
    }

    pub(crate) fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
