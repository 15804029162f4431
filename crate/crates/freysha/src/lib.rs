//! Files, checkpoints, screening and the command-line driver around
//! `freysha-core`.

pub mod batch;
pub mod error;
pub mod input;
pub mod output;
pub mod pipeline;
pub mod store;

pub use error::{exit, Error, Result};
pub use input::ClassSpec;
pub use output::{OutputFormat, ReportFilter, ReportRecord, SortKey, Table};
pub use pipeline::{
    refine, resume, resume_with, rough_estimate, run, run_many, scan, scan_triples,
    CandidateRecord, Journal, RunOptions, ScanConfig, ScanOutcome, StageEstimate, Status,
};
