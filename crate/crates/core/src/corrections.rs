//! User corrections on a page segmentation, as a replayable edit log.
//!
//! Edits operate in original image coordinates. Every edit is a pure
//! function from one segmentation to the next; a saved log replayed onto
//! the automatic result reproduces the corrected page.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{self, Point, Polygon, Rect};
use crate::imaging::{self, Raster, ScaleTransform};
use crate::model::{self, PriorityList, Region, RegionId, RegionType, TypeRule};
use crate::pipeline::{PageSegmentation, SegmentationProfile};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", rename_all_fields = "camelCase")]
pub enum Edit {
    /// Split a region along a drawn polyline.
    CutPolyline {
        region_id: RegionId,
        polyline: Vec<Point>,
    },
    /// Add a fixed rectangular region of the given type.
    FixRect { rect: Rect, new_type: RegionType },
    /// Add a fixed polygonal region of the given type.
    FixPolygon { polygon: Polygon, new_type: RegionType },
    Delete { target_region_ids: Vec<RegionId> },
    Retype {
        region_id: RegionId,
        new_type: RegionType,
    },
    /// Replace regions by the convex hull of their union.
    Merge {
        target_region_ids: Vec<RegionId>,
        new_type: RegionType,
    },
}

/// What edits need besides the segmentation itself: the rules to re-type
/// cut pieces, evaluated in the same working space the pipeline used.
#[derive(Debug, Clone)]
pub struct EditContext {
    pub rules: Vec<TypeRule>,
    pub priority: PriorityList,
    pub scale: ScaleTransform,
    pub working_size: (u32, u32),
}

impl EditContext {
    pub fn new(profile: &SegmentationProfile, original_size: (u32, u32)) -> Self {
        let (w, h, scale) = ScaleTransform::for_target(original_size.0, original_size.1, profile.target_height);
        Self {
            rules: profile.rules.clone(),
            priority: profile.priority.clone(),
            scale,
            working_size: (w, h),
        }
    }

    fn classify(&self, region: &Region) -> Option<RegionType> {
        let working = region.map_points(|p| self.scale.to_working(p));
        let candidates = model::candidate_types(&working, &self.rules, self.working_size);
        self.priority.best(&candidates).cloned()
    }
}

#[derive(Debug, Clone)]
pub struct EditOutcome {
    pub page: PageSegmentation,
    /// Edits that had no effect say why here.
    pub warnings: Vec<String>,
}

pub fn apply_edit(page: &PageSegmentation, edit: &Edit, ctx: &EditContext) -> Result<EditOutcome> {
    let mut page = page.clone();
    let mut warnings = Vec::new();
    match edit {
        Edit::CutPolyline { region_id, polyline } => {
            let idx = page.region_index(region_id)?;
            if polyline.len() < 2 {
                return Err(Error::invalid("cut polyline needs at least two points"));
            }
            let parent = page.regions[idx].clone();
            let parts = cut_region(&parent, polyline, page.original_size);
            if parts.len() < 2 {
                warnings.push(format!("cut does not split region {region_id}"));
            } else {
                let mut pieces = Vec::with_capacity(parts.len());
                for contour in parts {
                    let id = fresh_id_excluding(&page, &pieces);
                    let mut piece = Region::from_contour(id, contour);
                    piece.fixed = parent.fixed;
                    piece.assigned_type = if parent.fixed {
                        parent.assigned_type.clone()
                    } else {
                        ctx.classify(&piece).or_else(|| parent.assigned_type.clone())
                    };
                    pieces.push(piece);
                }
                page.regions.splice(idx..=idx, pieces);
            }
        }
        Edit::FixRect { rect, new_type } => {
            add_fixed(&mut page, rect.to_polygon(), new_type.clone())?;
        }
        Edit::FixPolygon { polygon, new_type } => {
            add_fixed(&mut page, polygon.clone(), new_type.clone())?;
        }
        Edit::Delete { target_region_ids } => {
            if target_region_ids.is_empty() {
                return Err(Error::invalid("delete needs at least one region id"));
            }
            for id in target_region_ids {
                page.region_index(id)?;
            }
            page.regions.retain(|r| !target_region_ids.contains(&r.id));
        }
        Edit::Retype { region_id, new_type } => {
            let idx = page.region_index(region_id)?;
            page.regions[idx].assigned_type = Some(new_type.clone());
        }
        Edit::Merge {
            target_region_ids,
            new_type,
        } => {
            let mut ids: Vec<&RegionId> = Vec::new();
            for id in target_region_ids {
                if !ids.contains(&id) {
                    ids.push(id);
                }
            }
            if ids.len() < 2 {
                return Err(Error::invalid("merge needs at least two distinct regions"));
            }
            let indices = ids
                .iter()
                .map(|id| page.region_index(id))
                .collect::<Result<Vec<_>>>()?;
            let points: Vec<Point> = indices
                .iter()
                .flat_map(|&i| page.regions[i].contour.points.iter().copied())
                .collect();
            let mut merged = Region::from_contour(page.fresh_id(), geometry::convex_hull(&points));
            merged.assigned_type = Some(new_type.clone());
            merged.fixed = indices.iter().any(|&i| page.regions[i].fixed);
            let at = indices[0];
            let mut out = Vec::with_capacity(page.regions.len());
            for (i, r) in page.regions.drain(..).enumerate() {
                if i == at {
                    out.push(merged.clone());
                } else if !indices.contains(&i) {
                    out.push(r);
                }
            }
            page.regions = out;
        }
    }
    page.refresh_reading_order();
    Ok(EditOutcome { page, warnings })
}

fn fresh_id_excluding(page: &PageSegmentation, pending: &[Region]) -> RegionId {
    let used = pending
        .iter()
        .filter_map(|r| r.id.as_str().strip_prefix('r')?.parse::<u64>().ok())
        .max();
    let base = page.fresh_id();
    let from_page: u64 = base.as_str()[1..].parse().unwrap_or(0);
    RegionId(format!("r{}", used.map_or(from_page, |u| from_page.max(u + 1))))
}

fn add_fixed(page: &mut PageSegmentation, polygon: Polygon, t: RegionType) -> Result<()> {
    if !(polygon.area() > 0.0) {
        return Err(Error::invalid("fixed region must have positive area"));
    }
    let mut region = Region::from_contour(page.fresh_id(), polygon);
    region.assigned_type = Some(t);
    region.fixed = true;
    suppress_covered(&mut page.regions, &region.contour);
    page.regions.push(region);
    Ok(())
}

/// Drop non-fixed regions whose bounding rectangle lies inside `fixed`.
fn suppress_covered(regions: &mut Vec<Region>, fixed: &Polygon) {
    regions.retain(|r| {
        if r.fixed {
            return true;
        }
        let b = r.rectangle;
        let corners = [
            Point::new(b.left, b.top),
            Point::new(b.right, b.top),
            Point::new(b.right, b.bottom),
            Point::new(b.left, b.bottom),
        ];
        !corners.iter().all(|&c| fixed.contains_closed(c))
    });
}

/// Put the fixed regions of a previous segmentation onto a fresh one,
/// suppressing automatic regions they cover.
pub fn carry_fixed_regions(fresh: &mut PageSegmentation, previous: &PageSegmentation) {
    for r in previous.regions.iter().filter(|r| r.fixed) {
        suppress_covered(&mut fresh.regions, &r.contour);
        let mut r = r.clone();
        if fresh.region(&r.id).is_some() {
            r.id = fresh.fresh_id();
        }
        fresh.regions.push(r);
    }
    fresh.refresh_reading_order();
}

/// Pixel parts of `region` after removing the pixels the polyline crosses.
/// Crossed pixels go back to an adjacent part; parts lying in a hole of
/// another part are absorbed by it. Contours are in page coordinates.
pub fn cut_region(region: &Region, polyline: &[Point], page_size: (u32, u32)) -> Vec<Polygon> {
    let b = region.rectangle;
    let x0 = b.left.floor().max(0.0) as i64;
    let y0 = b.top.floor().max(0.0) as i64;
    let x1 = (b.right.ceil() as i64).min(page_size.0 as i64);
    let y1 = (b.bottom.ceil() as i64).min(page_size.1 as i64);
    if x1 <= x0 || y1 <= y0 {
        return Vec::new();
    }
    let (w, h) = ((x1 - x0) as u32, (y1 - y0) as u32);
    let Ok(mut mask) = Raster::new(w, h) else {
        return Vec::new();
    };
    let local = region.contour.translate(-x0 as f64, -y0 as f64);
    local.fill_spans(w, h, |y, a, b| {
        for x in a..b {
            mask.set(x, y, true);
        }
    });

    let line: Vec<Point> = polyline.iter().map(|p| Point::new(p.x - x0 as f64, p.y - y0 as f64)).collect();
    let mut crossed = Vec::new();
    for (x, y) in geometry::rasterize_polyline(&line, Rect::new(0.0, 0.0, w as f64, h as f64)) {
        let (x, y) = (x as u32, y as u32);
        if mask.get(x, y) {
            mask.set(x, y, false);
            crossed.push((x, y));
        }
    }

    // Parts are 4-connected so that no part can slip diagonally through
    // another part's outline; each part is then either inside a hole of
    // another or fully outside it.
    let (mut labels, count) = imaging::label_components_4(&mask);
    if count < 2 {
        return if count == 1 && crossed.is_empty() {
            vec![region.contour.clone()]
        } else if count == 1 {
            vec![part_contour(&labels, 1, w, h, x0, y0)]
        } else {
            Vec::new()
        };
    }

    // Give crossed pixels back, each to the lowest-labelled 4-neighbouring part.
    let idx = |x: u32, y: u32| y as usize * w as usize + x as usize;
    let mut pending = crossed;
    loop {
        let mut assigned = Vec::new();
        for &(x, y) in &pending {
            let mut best = 0u32;
            for (dx, dy) in [(0i64, -1i64), (-1, 0), (1, 0), (0, 1)] {
                let (nx, ny) = (x as i64 + dx, y as i64 + dy);
                if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                    continue;
                }
                let l = labels[idx(nx as u32, ny as u32)];
                if l != 0 && (best == 0 || l < best) {
                    best = l;
                }
            }
            if best != 0 {
                assigned.push((x, y, best));
            }
        }
        if assigned.is_empty() {
            break;
        }
        for &(x, y, l) in &assigned {
            labels[idx(x, y)] = l;
        }
        pending.retain(|&(x, y)| labels[idx(x, y)] == 0);
    }
    // Crossed pixels with no part around them (the polyline covered a whole
    // sliver of the region) form parts of their own.
    let mut count = count;
    if !pending.is_empty() {
        let mut rest = Raster::new(w, h).expect("same size as mask");
        for &(x, y) in &pending {
            rest.set(x, y, true);
        }
        let (rest_labels, rest_count) = imaging::label_components_4(&rest);
        for (i, &l) in rest_labels.iter().enumerate() {
            if l != 0 {
                labels[i] = count + l;
            }
        }
        count += rest_count;
    }

    let mut contours: Vec<Option<Polygon>> = (1..=count)
        .map(|l| Some(part_contour(&labels, l, w, h, x0, y0)))
        .collect();
    // A part inside another part's outer contour sits in one of its holes.
    let first_pixel: Vec<Point> = (1..=count)
        .map(|l| {
            let i = labels.iter().position(|&v| v == l).unwrap_or(0);
            Point::new(
                (i % w as usize) as f64 + 0.5 + x0 as f64,
                (i / w as usize) as f64 + 0.5 + y0 as f64,
            )
        })
        .collect();
    for a in 0..count as usize {
        for b in 0..count as usize {
            if a == b || contours[b].is_none() {
                continue;
            }
            if contours[a].is_some()
                && contours[b].as_ref().is_some_and(|c| c.contains(first_pixel[a]))
            {
                contours[a] = None;
            }
        }
    }
    contours.into_iter().flatten().collect()
}

fn part_contour(labels: &[u32], label: u32, w: u32, h: u32, x0: i64, y0: i64) -> Polygon {
    let start = labels.iter().position(|&v| v == label).unwrap_or(0);
    let inside = |x: i64, y: i64| {
        x >= 0 && y >= 0 && x < w as i64 && y < h as i64 && labels[y as usize * w as usize + x as usize] == label
    };
    imaging::trace_outer_contour(inside, ((start % w as usize) as i64, (start / w as usize) as i64))
        .translate(x0 as f64, y0 as f64)
}

/// One entry in an edit log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoggedEdit {
    /// Milliseconds since the Unix epoch.
    pub timestamp: u64,
    pub edit: Edit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EditLog {
    pub version: u32,
    pub edits: Vec<LoggedEdit>,
}

impl Default for EditLog {
    fn default() -> Self {
        Self {
            version: 1,
            edits: Vec::new(),
        }
    }
}

pub fn now_millis() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map_or(0, |d| d.as_millis() as u64)
}

impl EditLog {
    pub fn push(&mut self, edit: Edit) {
        self.edits.push(LoggedEdit {
            timestamp: now_millis(),
            edit,
        });
    }

    /// `<dir>/<stem>.edits.json` next to the page image.
    pub fn path_for(image: &Path) -> PathBuf {
        sibling(image, "edits.json")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let log: EditLog = serde_json::from_str(&text)?;
        if log.version != 1 {
            return Err(Error::invalid(format!("unsupported edit log version {}", log.version)));
        }
        Ok(log)
    }

    /// Missing file means no edits yet.
    pub fn load_or_default(path: &Path) -> Result<Self> {
        if path.exists() {
            Self::load(path)
        } else {
            Ok(Self::default())
        }
    }

    /// Written to a temporary file and renamed so a crash never leaves a
    /// truncated log behind.
    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        write_atomic(path, text.as_bytes())
    }
}

pub(crate) fn sibling(image: &Path, suffix: &str) -> PathBuf {
    let stem = image.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    image.with_file_name(format!("{stem}.{suffix}"))
}

pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

/// Apply every logged edit in order. Failures carry the edit index.
pub fn replay(page: &PageSegmentation, log: &EditLog, ctx: &EditContext) -> Result<EditOutcome> {
    let mut current = page.clone();
    let mut warnings = Vec::new();
    for (index, logged) in log.edits.iter().enumerate() {
        let out = apply_edit(&current, &logged.edit, ctx).map_err(|e| Error::Edit {
            index,
            source: Box::new(e),
        })?;
        warnings.extend(out.warnings.into_iter().map(|w| format!("edit #{index}: {w}")));
        current = out.page;
    }
    Ok(EditOutcome {
        page: current,
        warnings,
    })
}
