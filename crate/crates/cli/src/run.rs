//! Batch segmentation of a book directory.
//!
//! Pages are images directly inside the books directory, plus images one
//! level down (each subdirectory being a book of its own). Output mirrors
//! that layout under the output directory. Pages are processed in parallel
//! but reported in path order, so the report is stable across runs.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use larex_core::corrections::{replay, EditContext};
use larex_core::lineseg::{segment_page_lines, ProjectionProfileSegmenter};
use larex_core::pagexml::{self, Metadata};
use larex_core::pipeline::{prepare_binary, segment_page};
use larex_core::{imaging, EditLog, SegmentationProfile};
use rayon::prelude::*;
use serde::Serialize;

use crate::{CliError, Result};

const IMAGE_EXTENSIONS: [&str; 3] = ["png", "tif", "tiff"];

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub books: PathBuf,
    pub profile: PathBuf,
    pub out: PathBuf,
    pub lines: bool,
    pub apply_edits: bool,
    pub strict: bool,
    pub jobs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum PageOutcome {
    Done {
        regions: BTreeMap<String, usize>,
        lines: Option<usize>,
        warnings: Vec<String>,
    },
    Failed(String),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PageReport {
    /// Relative to the books directory.
    pub page: String,
    pub outcome: PageOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RunSummary {
    pub pages: Vec<PageReport>,
    pub regions_by_type: BTreeMap<String, usize>,
}

impl RunSummary {
    pub fn failures(&self) -> usize {
        self.pages
            .iter()
            .filter(|p| matches!(p.outcome, PageOutcome::Failed(_)))
            .count()
    }

    /// Exit status under the given strictness.
    pub fn exit_code(&self, strict: bool) -> i32 {
        i32::from(strict && self.failures() > 0)
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for p in &self.pages {
            match &p.outcome {
                PageOutcome::Done {
                    regions,
                    lines,
                    warnings,
                } => {
                    let total: usize = regions.values().sum();
                    let _ = write!(s, "{}: {total} regions", p.page);
                    if !regions.is_empty() {
                        let _ = write!(s, " ({})", join_counts(regions));
                    }
                    if let Some(n) = lines {
                        let _ = write!(s, ", {n} lines");
                    }
                    s.push('\n');
                    for w in warnings {
                        let _ = writeln!(s, "  warning: {w}");
                    }
                }
                PageOutcome::Failed(e) => {
                    let _ = writeln!(s, "{}: FAILED: {e}", p.page);
                }
            }
        }
        let ok = self.pages.len() - self.failures();
        let _ = writeln!(
            s,
            "{} pages, {ok} written, {} failed",
            self.pages.len(),
            self.failures()
        );
        if !self.regions_by_type.is_empty() {
            let _ = writeln!(s, "regions: {}", join_counts(&self.regions_by_type));
        }
        s
    }
}

fn join_counts(m: &BTreeMap<String, usize>) -> String {
    m.iter().map(|(k, v)| format!("{k} {v}")).collect::<Vec<_>>().join(", ")
}

fn is_image(p: &Path) -> bool {
    p.is_file()
        && p.extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| IMAGE_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()))
}

fn sorted_entries(dir: &Path) -> Result<Vec<PathBuf>> {
    let rd = std::fs::read_dir(dir).map_err(|e| larex_core::Error::Io {
        path: dir.to_path_buf(),
        source: e,
    })?;
    let mut v: Vec<PathBuf> = rd.filter_map(|e| e.ok()).map(|e| e.path()).collect();
    v.sort();
    Ok(v)
}

/// Page images under `books`, as paths relative to it.
pub fn find_pages(books: &Path) -> Result<Vec<PathBuf>> {
    if !books.is_dir() {
        return Err(CliError::Usage(format!("{} is not a directory", books.display())));
    }
    let mut pages = Vec::new();
    for entry in sorted_entries(books)? {
        if is_image(&entry) {
            pages.push(entry);
        } else if entry.is_dir() {
            pages.extend(sorted_entries(&entry)?.into_iter().filter(|p| is_image(p)));
        }
    }
    Ok(pages
        .into_iter()
        .map(|p| p.strip_prefix(books).map(Path::to_path_buf).unwrap_or(p))
        .collect())
}

fn process_page(
    image_path: &Path,
    out_dir: &Path,
    profile: &SegmentationProfile,
    opts: &RunOptions,
) -> larex_core::Result<PageOutcome> {
    let image = imaging::load_image(image_path)?;
    let page_id = image_path.file_stem().unwrap_or_default().to_string_lossy().into_owned();
    let out = segment_page(&image, &page_id, profile)?;
    let mut warnings = Vec::new();
    let mut seg = out.page;
    if opts.apply_edits {
        let log_path = EditLog::path_for(image_path);
        if log_path.exists() {
            let log = EditLog::load(&log_path)?;
            let replayed = replay(&seg, &log, &EditContext::new(profile, seg.original_size))?;
            warnings.extend(replayed.warnings);
            seg = replayed.page;
        }
    }

    let file_name = image_path.file_name().unwrap_or_default().to_string_lossy().into_owned();
    let meta = Metadata::for_image(image_path);
    std::fs::create_dir_all(out_dir).map_err(|e| larex_core::Error::Io {
        path: out_dir.to_path_buf(),
        source: e,
    })?;
    let (doc, w) = pagexml::to_document(&seg, &file_name, meta.clone(), None);
    warnings.extend(w);
    warnings.extend(pagexml::write_document(&doc, &pagexml::page_xml_path(image_path, Some(out_dir)))?);

    let lines = if opts.lines {
        let binary = prepare_binary(&image, profile)?;
        let result = segment_page_lines(&binary, &seg, &profile.lines, &ProjectionProfileSegmenter);
        let (doc, w) = pagexml::to_document(&seg, &file_name, meta, Some(&result));
        warnings.extend(w);
        warnings.extend(pagexml::write_document(&doc, &pagexml::lines_xml_path(image_path, Some(out_dir)))?);
        Some(result.line_count())
    } else {
        None
    };
    Ok(PageOutcome::Done {
        regions: seg.count_by_type(),
        lines,
        warnings,
    })
}

/// Segment every page and write its PageXML. Per-page failures are reported
/// in the summary; only setup problems (bad profile, missing directory)
/// return an error.
pub fn run(opts: &RunOptions) -> Result<RunSummary> {
    let profile = larex_core::profile::load(&opts.profile)?;
    let pages = find_pages(&opts.books)?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(opts.jobs.max(1)).build()?;
    let reports: Vec<PageReport> = pool.install(|| {
        pages
            .par_iter()
            .map(|rel| {
                let out_dir = match rel.parent() {
                    Some(p) if !p.as_os_str().is_empty() => opts.out.join(p),
                    _ => opts.out.clone(),
                };
                let outcome = process_page(&opts.books.join(rel), &out_dir, &profile, opts)
                    .unwrap_or_else(|e| PageOutcome::Failed(e.to_string()));
                PageReport {
                    page: rel.to_string_lossy().replace('\\', "/"),
                    outcome,
                }
            })
            .collect()
    });
    let mut regions_by_type = BTreeMap::new();
    for r in &reports {
        if let PageOutcome::Done { regions, .. } = &r.outcome {
            for (k, v) in regions {
                *regions_by_type.entry(k.clone()).or_insert(0) += v;
            }
        }
    }
    Ok(RunSummary {
        pages: reports,
        regions_by_type,
    })
}
