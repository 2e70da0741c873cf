//! Persisted per-book segmentation settings (`larex-profile.json`).

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corrections::write_atomic;
use crate::error::{Error, FieldError, Result};
use crate::pipeline::SegmentationProfile;

pub const PROFILE_FILE: &str = "larex-profile.json";
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ProfileDocument {
    pub schema_version: u32,
    pub profile: SegmentationProfile,
}

impl ProfileDocument {
    pub fn new(profile: SegmentationProfile) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            profile,
        }
    }
}

/// Parse and validate a profile document.
pub fn from_json(text: &str) -> Result<SegmentationProfile> {
    let doc: ProfileDocument = serde_json::from_str(text)?;
    if doc.schema_version != SCHEMA_VERSION {
        return Err(Error::Validation(vec![FieldError::new(
            "schemaVersion",
            format!("unsupported version {}", doc.schema_version),
        )]));
    }
    doc.profile.validate()?;
    Ok(doc.profile)
}

pub fn to_json(profile: &SegmentationProfile) -> Result<String> {
    Ok(serde_json::to_string_pretty(&ProfileDocument::new(profile.clone()))?)
}

pub fn load(path: &Path) -> Result<SegmentationProfile> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    from_json(&text)
}

/// Validates before writing; an invalid profile never reaches disk.
pub fn save(profile: &SegmentationProfile, path: &Path) -> Result<()> {
    profile.validate()?;
    write_atomic(path, to_json(profile)?.as_bytes())
}

/// The book's profile, or the default one when the book has none.
pub fn load_for_book(book_dir: &Path) -> Result<SegmentationProfile> {
    let path = book_dir.join(PROFILE_FILE);
    if path.exists() {
        load(&path)
    } else {
        Ok(SegmentationProfile::default())
    }
}
