//! Layout analysis and region extraction for scanned early printed books.
//!
//! A page runs through a rule-based connected-components pipeline:
//! binarize, mask to the region of interest, downscale, detect and erase
//! images, grow text blocks by dilation, then type each block from
//! declarative area/zone rules with a priority list and per-type occurrence
//! limits. Results can be corrected by replayable edits, split into text
//! lines, and written as PageXML.

// `!(x > 0.0)` style guards are used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod corrections;
pub mod error;
pub mod geometry;
pub mod imaging;
pub mod lineseg;
pub mod model;
pub mod pagexml;
pub mod pipeline;
pub mod profile;
pub mod synth;

pub use corrections::{Edit, EditLog, LoggedEdit};
pub use error::{Error, Result};
pub use geometry::{Point, Polygon, Rect, RotatedRect};
pub use imaging::{Raster, ScaleTransform};
pub use model::{MaxOccurrence, PriorityList, PriorityPosition, Region, RegionId, RegionType, TypeRule};
pub use pipeline::{PageSegmentation, SegmentationOutput, SegmentationProfile};
