//! HTTP service over a directory of books.
//!
//! Each subdirectory of the corpus root is a book of page images. The
//! service segments pages with the book profile (or a per-request override),
//! layers the page's persisted edit log on top, and writes PageXML on
//! request. Geometry is always in original image coordinates.

pub mod error;
pub mod jobs;
pub mod library;
pub mod routes;

pub use error::{Result, ServiceError};
pub use jobs::{JobManager, JobProgress, JobStatus};
pub use library::{Library, SegmentationResponse};
pub use routes::{router, AppState};
