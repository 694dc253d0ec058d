use std::path::PathBuf;

use thiserror::Error;

use crate::validate::Finding;

#[derive(Debug, Error)]
pub enum Error {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("failed to parse {path} at line {line}, column {column}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("scenario is invalid ({} finding(s)): {}", .0.len(), summarize(.0))]
    Invalid(Vec<Finding>),

    #[error("local energy or carbon cost is zero at node `{node}`, hour {hour}")]
    DegenerateNormalizer { node: String, hour: usize },

    #[error("{0} requires a positive baseline total")]
    ZeroBaseline(&'static str),

    #[error("trace has zero total energy")]
    ZeroEnergy,

    #[error("sweep multipliers must be strictly increasing, got {0} after {1}")]
    UnorderedMultipliers(f64, f64),

    #[error("invalid sweep spec: {0}")]
    InvalidSpec(String),

    #[error("failed to write {path}: {message}")]
    Output { path: PathBuf, message: String },
}

fn summarize(findings: &[Finding]) -> String {
    findings
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
