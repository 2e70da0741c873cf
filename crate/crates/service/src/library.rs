//! Books on disk and the per-page state derived from them.
//!
//! A book is a directory of page images under the corpus root. Profiles and
//! edit logs live beside the images; everything else is a cache that can be
//! rebuilt from those files.

use std::collections::hash_map::DefaultHasher;
use std::collections::HashMap;
use std::hash::{Hash, Hasher};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, MutexGuard};

use larex_core::corrections::{apply_edit, replay, EditContext};
use larex_core::lineseg::{segment_page_lines_cached, LineCache, LineSegmentationResult, ProjectionProfileSegmenter};
use larex_core::pagexml::{self, Metadata};
use larex_core::pipeline::{self, PageSegmentation};
use larex_core::{imaging, profile, Edit, EditLog, Raster, Region, SegmentationProfile};
use serde::{Deserialize, Serialize};

use crate::error::{Result, ServiceError};

const IMAGE_EXTENSIONS: [&str; 3] = ["png", "tif", "tiff"];
const CACHE_LIMIT: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BookInfo {
    pub id: String,
    pub page_count: usize,
    pub has_profile: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PageInfo {
    pub id: String,
    pub file: String,
    pub width: Option<u32>,
    pub height: Option<u32>,
    pub edit_count: usize,
    pub finalized: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SegmentationResponse {
    pub segmentation: PageSegmentation,
    /// Blocks too small for every rule, kept for display.
    pub unclassified: Vec<Region>,
    pub warnings: Vec<String>,
    pub edit_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FinalizeResponse {
    pub page_xml: PathBuf,
    pub lines_xml: Option<PathBuf>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ConsistencyReport {
    pub consistent: bool,
    pub edit_count: usize,
}

type PageKey = (String, String);

/// Pipeline output before edits.
struct Base {
    page: PageSegmentation,
    unclassified: Vec<Region>,
}

#[derive(Default)]
struct Caches {
    binaries: HashMap<(PageKey, Option<u8>), Arc<Raster>>,
    bases: HashMap<(PageKey, u64), Arc<Base>>,
    /// Last state handed out per page, with the profile that produced it.
    displayed: HashMap<PageKey, (SegmentationProfile, PageSegmentation)>,
}

pub struct Library {
    root: PathBuf,
    caches: Mutex<Caches>,
    page_locks: Mutex<HashMap<PageKey, Arc<Mutex<()>>>>,
    line_caches: Mutex<HashMap<String, Arc<LineCache>>>,
}

fn lock<T>(m: &Mutex<T>) -> MutexGuard<'_, T> {
    m.lock().unwrap_or_else(|e| e.into_inner())
}

fn profile_hash(p: &SegmentationProfile) -> u64 {
    let mut h = DefaultHasher::new();
    serde_json::to_string(p).unwrap_or_default().hash(&mut h);
    h.finish()
}

/// Ids come from URLs; refuse anything that could leave the corpus root.
fn check_id(kind: &str, id: &str) -> Result<()> {
    if id.is_empty() || id.starts_with('.') || id.contains(['/', '\\']) {
        return Err(ServiceError::BadRequest(format!("invalid {kind} id {id:?}")));
    }
    Ok(())
}

fn is_image(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| IMAGE_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()))
}

impl Library {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self {
            root: root.into(),
            caches: Mutex::default(),
            page_locks: Mutex::default(),
            line_caches: Mutex::default(),
        }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn book_dir(&self, book: &str) -> Result<PathBuf> {
        check_id("book", book)?;
        let dir = self.root.join(book);
        if !dir.is_dir() {
            return Err(ServiceError::NotFound(format!("book {book}")));
        }
        Ok(dir)
    }

    pub fn list_books(&self) -> Result<Vec<BookInfo>> {
        let entries = std::fs::read_dir(&self.root)
            .map_err(|_| ServiceError::NotFound(format!("corpus root {}", self.root.display())))?;
        let mut names: Vec<String> = entries
            .filter_map(|e| e.ok())
            .filter(|e| e.path().is_dir())
            .filter_map(|e| e.file_name().into_string().ok())
            .filter(|n| !n.starts_with('.'))
            .collect();
        names.sort();
        names
            .into_iter()
            .map(|id| {
                let dir = self.root.join(&id);
                Ok(BookInfo {
                    page_count: image_files(&dir)?.len(),
                    has_profile: dir.join(profile::PROFILE_FILE).exists(),
                    id,
                })
            })
            .collect()
    }

    /// Page images in file-name order; the page id is the file stem.
    pub fn page_files(&self, book: &str) -> Result<Vec<(String, PathBuf)>> {
        let dir = self.book_dir(book)?;
        Ok(image_files(&dir)?
            .into_iter()
            .map(|p| (stem(&p), p))
            .collect())
    }

    pub fn list_pages(&self, book: &str) -> Result<Vec<PageInfo>> {
        self.page_files(book)?
            .into_iter()
            .map(|(id, path)| {
                let dims = image::image_dimensions(&path).ok();
                let edit_count = EditLog::load_or_default(&EditLog::path_for(&path))
                    .map(|l| l.edits.len())
                    .unwrap_or(0);
                Ok(PageInfo {
                    file: path.file_name().unwrap_or_default().to_string_lossy().into_owned(),
                    width: dims.map(|d| d.0),
                    height: dims.map(|d| d.1),
                    edit_count,
                    finalized: pagexml::page_xml_path(&path, None).exists(),
                    id,
                })
            })
            .collect()
    }

    pub fn page_path(&self, book: &str, page: &str) -> Result<PathBuf> {
        check_id("page", page)?;
        self.page_files(book)?
            .into_iter()
            .find(|(id, _)| id == page)
            .map(|(_, p)| p)
            .ok_or_else(|| ServiceError::NotFound(format!("page {book}/{page}")))
    }

    pub fn profile(&self, book: &str) -> Result<SegmentationProfile> {
        Ok(profile::load_for_book(&self.book_dir(book)?)?)
    }

    /// Validate and persist; cached results under the old profile stay
    /// valid for their own key, but line results are dropped.
    pub fn save_profile(&self, book: &str, p: &SegmentationProfile) -> Result<()> {
        let dir = self.book_dir(book)?;
        profile::save(p, &dir.join(profile::PROFILE_FILE))?;
        lock(&self.line_caches).remove(book);
        Ok(())
    }

    pub fn line_cache(&self, book: &str) -> Arc<LineCache> {
        lock(&self.line_caches).entry(book.to_string()).or_default().clone()
    }

    fn page_lock(&self, book: &str, page: &str) -> Arc<Mutex<()>> {
        lock(&self.page_locks)
            .entry((book.to_string(), page.to_string()))
            .or_default()
            .clone()
    }

    fn binary(&self, key: &PageKey, path: &Path, threshold: Option<u8>) -> Result<Arc<Raster>> {
        let ck = (key.clone(), threshold);
        if let Some(r) = lock(&self.caches).binaries.get(&ck) {
            return Ok(r.clone());
        }
        let img = imaging::load_image(path)?;
        let r = Arc::new(imaging::binarize(&img, threshold)?);
        let mut c = lock(&self.caches);
        if c.binaries.len() >= CACHE_LIMIT {
            c.binaries.clear();
        }
        c.binaries.insert(ck, r.clone());
        Ok(r)
    }

    fn base(&self, key: &PageKey, path: &Path, p: &SegmentationProfile) -> Result<Arc<Base>> {
        p.validate()?;
        let ck = (key.clone(), profile_hash(p));
        if let Some(b) = lock(&self.caches).bases.get(&ck) {
            return Ok(b.clone());
        }
        let binary = self.binary(key, path, p.binarization_threshold)?;
        let out = pipeline::segment_binary(&binary, &key.1, p)?;
        let base = Arc::new(Base {
            page: out.page,
            unclassified: out.unclassified,
        });
        let mut c = lock(&self.caches);
        if c.bases.len() >= CACHE_LIMIT {
            c.bases.clear();
        }
        c.bases.insert(ck, base.clone());
        Ok(base)
    }

    /// Pipeline output under `p` with the page's edit log replayed on top.
    fn current(
        &self,
        key: &PageKey,
        path: &Path,
        p: &SegmentationProfile,
    ) -> Result<(Arc<Base>, EditLog, SegmentationResponse)> {
        let base = self.base(key, path, p)?;
        let log = EditLog::load_or_default(&EditLog::path_for(path))?;
        let ctx = EditContext::new(p, base.page.original_size);
        let out = replay(&base.page, &log, &ctx)?;
        let resp = SegmentationResponse {
            segmentation: out.page,
            unclassified: base.unclassified.clone(),
            warnings: out.warnings,
            edit_count: log.edits.len(),
        };
        Ok((base, log, resp))
    }

    fn remember(&self, key: PageKey, p: SegmentationProfile, seg: &PageSegmentation) {
        lock(&self.caches).displayed.insert(key, (p, seg.clone()));
    }

    /// Segment with the override (or the book profile) and replay the log.
    pub fn segmentation(
        &self,
        book: &str,
        page: &str,
        override_profile: Option<SegmentationProfile>,
    ) -> Result<SegmentationResponse> {
        let path = self.page_path(book, page)?;
        let key = (book.to_string(), page.to_string());
        let p = match override_profile {
            Some(p) => p,
            None => self.profile(book)?,
        };
        let (_, _, resp) = self.current(&key, &path, &p)?;
        self.remember(key, p, &resp.segmentation);
        Ok(resp)
    }

    pub fn edit_log(&self, book: &str, page: &str) -> Result<EditLog> {
        let path = self.page_path(book, page)?;
        Ok(EditLog::load_or_default(&EditLog::path_for(&path))?)
    }

    /// Apply `edit` to the current state under the book profile. The log is
    /// written before returning; a rejected edit leaves it untouched.
    pub fn apply_edit(&self, book: &str, page: &str, edit: Edit) -> Result<SegmentationResponse> {
        let path = self.page_path(book, page)?;
        let key = (book.to_string(), page.to_string());
        let guard = self.page_lock(book, page);
        let _held = lock(&guard);
        let p = self.profile(book)?;
        let (base, mut log, current) = self.current(&key, &path, &p)?;
        let ctx = EditContext::new(&p, base.page.original_size);
        let out = apply_edit(&current.segmentation, &edit, &ctx)?;
        log.push(edit);
        log.save(&EditLog::path_for(&path))?;
        let mut warnings = current.warnings;
        warnings.extend(out.warnings);
        let resp = SegmentationResponse {
            segmentation: out.page,
            unclassified: base.unclassified.clone(),
            warnings,
            edit_count: log.edits.len(),
        };
        self.remember(key, p, &resp.segmentation);
        Ok(resp)
    }

    /// Recompute the last state handed out for a page from files alone and
    /// compare.
    pub fn consistency(&self, book: &str, page: &str) -> Result<ConsistencyReport> {
        let path = self.page_path(book, page)?;
        let key = (book.to_string(), page.to_string());
        let shown = lock(&self.caches).displayed.get(&key).cloned();
        let Some((p, shown)) = shown else {
            return Err(ServiceError::NotFound(format!("no segmentation served for {book}/{page}")));
        };
        let binary = imaging::binarize(&imaging::load_image(&path)?, p.binarization_threshold)?;
        let fresh = pipeline::segment_binary(&binary, page, &p)?;
        let log = EditLog::load_or_default(&EditLog::path_for(&path))?;
        let ctx = EditContext::new(&p, fresh.page.original_size);
        let replayed = replay(&fresh.page, &log, &ctx)?.page;
        Ok(ConsistencyReport {
            consistent: replayed == shown,
            edit_count: log.edits.len(),
        })
    }

    /// Lines of every text region of the current state, through the book's
    /// line cache.
    pub fn lines(&self, book: &str, page: &str) -> Result<(PageSegmentation, LineSegmentationResult)> {
        let path = self.page_path(book, page)?;
        let key = (book.to_string(), page.to_string());
        let p = self.profile(book)?;
        let (_, _, resp) = self.current(&key, &path, &p)?;
        let binary = self.binary(&key, &path, p.binarization_threshold)?;
        let masked = match p.roi {
            Some(roi) => imaging::apply_roi(&binary, Some(roi.scaled(binary.width() as f64, binary.height() as f64)))?,
            None => (*binary).clone(),
        };
        let cache = self.line_cache(book);
        let (lines, _) =
            segment_page_lines_cached(&masked, &resp.segmentation, &p.lines, &ProjectionProfileSegmenter, &cache);
        Ok((resp.segmentation, lines))
    }

    /// Write `<stem>.lines.xml` beside the image.
    pub fn write_lines(&self, book: &str, page: &str) -> Result<PathBuf> {
        let path = self.page_path(book, page)?;
        let guard = self.page_lock(book, page);
        let _held = lock(&guard);
        let (seg, lines) = self.lines(book, page)?;
        let out = pagexml::lines_xml_path(&path, None);
        let (doc, _) = pagexml::to_document(&seg, &file_name(&path), Metadata::for_image(&path), Some(&lines));
        pagexml::write_document(&doc, &out)?;
        Ok(out)
    }

    /// Write the current state as `<stem>.xml`. The line file is refreshed
    /// too when `with_lines` is set or one already exists.
    pub fn finalize(&self, book: &str, page: &str, with_lines: bool) -> Result<FinalizeResponse> {
        let path = self.page_path(book, page)?;
        let key = (book.to_string(), page.to_string());
        let guard = self.page_lock(book, page);
        let _held = lock(&guard);
        let p = self.profile(book)?;
        let (_, _, resp) = self.current(&key, &path, &p)?;
        let meta = Metadata::for_image(&path);
        let (doc, mut warnings) = pagexml::to_document(&resp.segmentation, &file_name(&path), meta.clone(), None);
        let page_xml = pagexml::page_xml_path(&path, None);
        warnings.extend(pagexml::write_document(&doc, &page_xml)?);

        let lines_path = pagexml::lines_xml_path(&path, None);
        let lines_xml = if with_lines || lines_path.exists() {
            let (seg, lines) = self.lines(book, page)?;
            let (doc, w) = pagexml::to_document(&seg, &file_name(&path), meta, Some(&lines));
            warnings.extend(w);
            warnings.extend(pagexml::write_document(&doc, &lines_path)?);
            Some(lines_path)
        } else {
            None
        };
        Ok(FinalizeResponse {
            page_xml,
            lines_xml,
            warnings,
        })
    }
}

fn image_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let entries = std::fs::read_dir(dir).map_err(|e| larex_core::Error::Io {
        path: dir.to_path_buf(),
        source: e,
    })?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.is_file() && is_image(p))
        .collect();
    files.sort();
    Ok(files)
}

fn stem(p: &Path) -> String {
    p.file_stem().unwrap_or_default().to_string_lossy().into_owned()
}

fn file_name(p: &Path) -> String {
    p.file_name().unwrap_or_default().to_string_lossy().into_owned()
}
