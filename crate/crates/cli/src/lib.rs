//! Headless batch processing and evaluation.
//!
//! `run` applies one profile to every page of a book directory and writes
//! PageXML; `diff` scores a predicted PageXML file against ground truth.

pub mod diff;
pub mod run;

pub use diff::{diff_files, diff_pages, DiffReport, TypeScore};
pub use run::{run, PageOutcome, RunOptions, RunSummary};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] larex_core::Error),

    #[error("{0}")]
    Usage(String),

    #[error("image sizes differ: ground truth {gt:?}, prediction {pred:?}")]
    SizeMismatch { gt: (u32, u32), pred: (u32, u32) },

    #[error("cannot start worker pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
