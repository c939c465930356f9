//! File formats and parallel drivers for the `bilinear-sysid` command-line tool.
//!
//! * [`config`]: line-oriented `key = value` experiment configuration.
//! * [`formats`]: system files, trajectory CSV, sweep rows CSV and BMSB reports.
//! * [`run`]: rayon-parallel sweeps and BMSB suites with deterministic output order.

pub mod config;
pub mod formats;
pub mod run;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Model(#[from] bilinear_sysid::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn parse_error(path: &str, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_owned(),
        line,
        message: message.into(),
    }
}
