use std::io;
use std::path::PathBuf;

use freysha_core::curves::ClassError;
use freysha_core::lseries::LSeriesError;
use freysha_core::sha::ShaError;
use freysha_core::triples::TripleError;

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const FAILURE: i32 = 1;
    pub const VALIDATION: i32 = 2;
    pub const RANK_SUSPECT: i32 = 3;
    pub const BUDGET: i32 = 4;
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Validation(String),
    #[error("invalid triple: {0}")]
    Triple(#[from] TripleError),
    #[error("invalid class: {0}")]
    Class(#[from] ClassError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    LSeries(#[from] LSeriesError),
    #[error(transparent)]
    Sha(#[from] ShaError),
    #[error("rank > 0 suspected: partial sums approach zero at n = {n} (L = {l})")]
    RankSuspect { n: u64, l: String },
    #[error("burden {burden} exceeds the budget {max}")]
    BudgetExceeded { burden: u64, max: u64 },
    #[error("stopped after the requested number of steps at n = {0}; resume from the checkpoint")]
    Interrupted(u64),
    #[error("no convergence within {0} terms")]
    NotConverged(u64),
}

impl Error {
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Validation(_) | Error::Triple(_) | Error::Class(_) => exit::VALIDATION,
            Error::LSeries(LSeriesError::Checkpoint(_) | LSeriesError::ClassMismatch { .. }) => {
                exit::VALIDATION
            }
            Error::RankSuspect { .. } | Error::Sha(ShaError::RankSuspect) => exit::RANK_SUSPECT,
            Error::BudgetExceeded { .. } => exit::BUDGET,
            _ => exit::FAILURE,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(io::Error) -> Error {
        let path = path.into();
        move |source| Error::Io { path, source }
    }

    pub(crate) fn json(path: impl Into<PathBuf>) -> impl FnOnce(serde_json::Error) -> Error {
        let path = path.into();
        move |source| Error::Json { path, source }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
