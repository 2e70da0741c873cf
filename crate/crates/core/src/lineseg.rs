//! Text line segmentation inside regions: skew estimation by projection
//! profile variance, line bands from the deskewed profile, and helpers
//! that turn line picks into cut edits.

use std::collections::hash_map::DefaultHasher;
use std::collections::HashMap;
use std::hash::{Hash, Hasher};
use std::sync::RwLock;

use serde::{Deserialize, Serialize};

use crate::corrections::{apply_edit, Edit, EditContext};
use crate::error::{Error, FieldError, Result};
use crate::geometry::{Point, Polygon};
use crate::imaging::{self, Raster};
use crate::model::{Region, RegionId, RegionType};
use crate::pipeline::PageSegmentation;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct LineParams {
    /// Below this many ink pixels a region's skew is not estimated.
    pub min_skew_area: f64,
    pub max_skew_angle: f64,
    pub skew_step: f64,
    pub heading_height_factor: f64,
    pub heading_area_factor: f64,
}

impl Default for LineParams {
    fn default() -> Self {
        Self {
            min_skew_area: 1500.0,
            max_skew_angle: 10.0,
            skew_step: 0.1,
            heading_height_factor: 1.4,
            heading_area_factor: 1.4,
        }
    }
}

impl LineParams {
    pub fn validate(&self) -> Vec<FieldError> {
        let mut errs = Vec::new();
        if !(self.min_skew_area >= 0.0) {
            errs.push(FieldError::new("lines.minSkewArea", "must be >= 0"));
        }
        if !(self.max_skew_angle >= 0.0 && self.max_skew_angle <= 45.0) {
            errs.push(FieldError::new("lines.maxSkewAngle", "must be within [0, 45]"));
        }
        if !(self.skew_step > 0.0) {
            errs.push(FieldError::new("lines.skewStep", "must be > 0"));
        }
        for (name, v) in [
            ("lines.headingHeightFactor", self.heading_height_factor),
            ("lines.headingAreaFactor", self.heading_area_factor),
        ] {
            if !(v > 0.0) {
                errs.push(FieldError::new(name, "must be > 0"));
            }
        }
        errs
    }
}

/// Ink pixels of one region at original resolution, as pixel centers.
#[derive(Debug, Clone)]
pub struct RegionInk {
    pub points: Vec<Point>,
    /// Rotation center used for deskewing.
    pub center: Point,
    /// 8-connected component label per point, from 0.
    pub labels: Vec<u32>,
    pub component_count: u32,
}

pub fn region_ink(binary: &Raster, region: &Region) -> RegionInk {
    let b = region.rectangle;
    let x0 = b.left.floor().max(0.0) as i64;
    let y0 = b.top.floor().max(0.0) as i64;
    let x1 = (b.right.ceil() as i64).min(binary.width() as i64);
    let y1 = (b.bottom.ceil() as i64).min(binary.height() as i64);
    let center = b.center();
    let empty = RegionInk {
        points: Vec::new(),
        center,
        labels: Vec::new(),
        component_count: 0,
    };
    if x1 <= x0 || y1 <= y0 {
        return empty;
    }
    let (w, h) = ((x1 - x0) as u32, (y1 - y0) as u32);
    let Ok(mut mask) = Raster::new(w, h) else {
        return empty;
    };
    region
        .contour
        .translate(-x0 as f64, -y0 as f64)
        .fill_spans(w, h, |y, a, b| {
            for x in a..b {
                if binary.get(x + x0 as u32, y + y0 as u32) {
                    mask.set(x, y, true);
                }
            }
        });
    let (labels, count) = imaging::label_components(&mask);
    let mut points = Vec::new();
    let mut point_labels = Vec::new();
    for (x, y) in mask.foreground() {
        points.push(Point::new(x as f64 + x0 as f64 + 0.5, y as f64 + y0 as f64 + 0.5));
        point_labels.push(labels[y as usize * w as usize + x as usize] - 1);
    }
    RegionInk {
        points,
        center,
        labels: point_labels,
        component_count: count,
    }
}

/// Vertical coordinate after undoing a skew of `angle` degrees about `c`.
fn deskewed_y(p: Point, c: Point, sin: f64, cos: f64) -> f64 {
    -(p.x - c.x) * sin + (p.y - c.y) * cos
}

fn deskewed_x(p: Point, c: Point, sin: f64, cos: f64) -> f64 {
    (p.x - c.x) * cos + (p.y - c.y) * sin
}

/// Deskewed coordinates back to page coordinates.
fn skewed(xd: f64, yd: f64, c: Point, sin: f64, cos: f64) -> Point {
    Point::new(c.x + xd * cos - yd * sin, c.y + xd * sin + yd * cos)
}

fn profile_score(points: &[Point], c: Point, angle: f64) -> f64 {
    let (sin, cos) = angle.to_radians().sin_cos();
    let ys: Vec<i64> = points
        .iter()
        .map(|&p| deskewed_y(p, c, sin, cos).floor() as i64)
        .collect();
    let lo = ys.iter().copied().min().unwrap_or(0);
    let hi = ys.iter().copied().max().unwrap_or(0);
    let mut bins = vec![0u64; (hi - lo + 1) as usize];
    for y in ys {
        bins[(y - lo) as usize] += 1;
    }
    bins.iter().map(|&b| (b * b) as f64).sum()
}

/// Skew angle in degrees (positive = text rising to the right is turned
/// clockwise on screen), or `None` when there is too little ink.
pub fn estimate_skew(ink: &RegionInk, params: &LineParams) -> Option<f64> {
    if ink.points.is_empty() || (ink.points.len() as f64) < params.min_skew_area {
        return None;
    }
    let steps = (params.max_skew_angle / params.skew_step).round() as i64;
    let mut best = (f64::NEG_INFINITY, 0.0f64);
    for k in -steps..=steps {
        let angle = k as f64 * params.skew_step;
        let score = profile_score(&ink.points, ink.center, angle);
        // Strictly better, or equal and closer to zero.
        if score > best.0 || (score == best.0 && angle.abs() < best.1.abs()) {
            best = (score, angle);
        }
    }
    Some(best.1)
}

/// Area-weighted mean of the estimated angles; 0 when none.
pub fn fallback_angle(estimates: &[(f64, f64)]) -> f64 {
    let total: f64 = estimates.iter().map(|(_, w)| w).sum();
    if total > 0.0 {
        estimates.iter().map(|(a, w)| a * w).sum::<f64>() / total
    } else {
        0.0
    }
}

/// Line bands `[start, end)` in a row profile: a 3-row moving average
/// thresholded at `max(2, 5% of peak)`, with gaps under two rows closed.
pub fn detect_lines(profile: &[u32]) -> Vec<(usize, usize)> {
    let n = profile.len();
    let smooth: Vec<f64> = (0..n)
        .map(|i| {
            let lo = i.saturating_sub(1);
            let hi = (i + 2).min(n);
            profile[lo..hi].iter().map(|&v| v as f64).sum::<f64>() / 3.0
        })
        .collect();
    let peak = smooth.iter().copied().fold(0.0, f64::max);
    let threshold = (0.05 * peak).max(2.0);
    let mut runs: Vec<(usize, usize)> = Vec::new();
    let mut start = None;
    for (i, &v) in smooth.iter().enumerate() {
        match (v >= threshold, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                runs.push((s, i));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        runs.push((s, n));
    }
    let mut merged: Vec<(usize, usize)> = Vec::new();
    for r in runs {
        match merged.last_mut() {
            Some(last) if r.0 - last.1 < 2 => last.1 = r.1,
            _ => merged.push(r),
        }
    }
    merged
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TextLine {
    pub id: String,
    pub parent_region_id: RegionId,
    pub index: usize,
    pub polygon: Polygon,
    pub baseline: Vec<Point>,
    /// Ink extent in deskewed coordinates relative to the region center.
    pub top: f64,
    pub bottom: f64,
    pub height: f64,
    pub component_count: usize,
    pub ink_area: usize,
}

impl TextLine {
    pub fn mean_component_area(&self) -> f64 {
        if self.component_count == 0 {
            0.0
        } else {
            self.ink_area as f64 / self.component_count as f64
        }
    }
}

/// Strategy for splitting a region into lines; the projection profile one
/// is the built-in implementation.
pub trait LineSegmenter: Send + Sync {
    fn segment(&self, ink: &RegionInk, region: &Region, angle: f64) -> Vec<TextLine>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ProjectionProfileSegmenter;

impl LineSegmenter for ProjectionProfileSegmenter {
    fn segment(&self, ink: &RegionInk, region: &Region, angle: f64) -> Vec<TextLine> {
        if ink.points.is_empty() {
            return Vec::new();
        }
        let (sin, cos) = angle.to_radians().sin_cos();
        let c = ink.center;
        let ys: Vec<i64> = ink
            .points
            .iter()
            .map(|&p| deskewed_y(p, c, sin, cos).floor() as i64)
            .collect();
        let lo = *ys.iter().min().expect("non-empty");
        let hi = *ys.iter().max().expect("non-empty");
        let mut profile = vec![0u32; (hi - lo + 1) as usize];
        for &y in &ys {
            profile[(y - lo) as usize] += 1;
        }
        let bands = detect_lines(&profile);

        // Each component belongs to the band holding its mean deskewed y.
        let mut comp_sum = vec![(0.0f64, 0usize); ink.component_count as usize];
        for (i, &l) in ink.labels.iter().enumerate() {
            comp_sum[l as usize].0 += ys[i] as f64 + 0.5;
            comp_sum[l as usize].1 += 1;
        }
        let band_of = |y: f64| {
            bands
                .iter()
                .position(|&(s, e)| y >= (lo + s as i64) as f64 && y < (lo + e as i64) as f64)
        };

        let mut lines = Vec::new();
        for (k, &(s, e)) in bands.iter().enumerate() {
            let (s, e) = (lo + s as i64, lo + e as i64);
            let mut xmin = f64::INFINITY;
            let mut xmax = f64::NEG_INFINITY;
            let mut ymin = i64::MAX;
            let mut ymax = i64::MIN;
            let mut ink_area = 0usize;
            for (i, &p) in ink.points.iter().enumerate() {
                if ys[i] < s || ys[i] >= e {
                    continue;
                }
                let xd = deskewed_x(p, c, sin, cos);
                xmin = xmin.min(xd - 0.5);
                xmax = xmax.max(xd + 0.5);
                ymin = ymin.min(ys[i]);
                ymax = ymax.max(ys[i]);
                ink_area += 1;
            }
            if ink_area == 0 {
                continue;
            }
            let component_count = comp_sum
                .iter()
                .filter(|(sum, n)| *n > 0 && band_of(sum / *n as f64) == Some(k))
                .count();
            let (top, bottom) = (ymin as f64, ymax as f64 + 1.0);
            let quad = Polygon::new(vec![
                skewed(xmin, top, c, sin, cos),
                skewed(xmax, top, c, sin, cos),
                skewed(xmax, bottom, c, sin, cos),
                skewed(xmin, bottom, c, sin, cos),
            ]);
            let clipped = region.contour.clip_convex(&quad);
            let polygon = if clipped.len() >= 3 && clipped.area() > 0.0 { clipped } else { quad };
            let index = lines.len();
            lines.push(TextLine {
                id: format!("{}_l{index}", region.id),
                parent_region_id: region.id.clone(),
                index,
                polygon,
                baseline: vec![skewed(xmin, bottom, c, sin, cos), skewed(xmax, bottom, c, sin, cos)],
                top,
                bottom,
                height: bottom - top,
                component_count,
                ink_area,
            });
        }
        lines
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RegionLines {
    pub region_id: RegionId,
    pub angle: f64,
    /// False when the angle is the page fallback.
    pub estimated: bool,
    pub center: Point,
    pub lines: Vec<TextLine>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LineSegmentationResult {
    pub page_id: String,
    pub regions: Vec<RegionLines>,
}

impl LineSegmentationResult {
    pub fn region(&self, id: &RegionId) -> Option<&RegionLines> {
        self.regions.iter().find(|r| &r.region_id == id)
    }

    pub fn line_count(&self) -> usize {
        self.regions.iter().map(|r| r.lines.len()).sum()
    }
}

/// Lines of every text region, in region order. `binary` is the page at
/// original resolution.
pub fn segment_page_lines(
    binary: &Raster,
    page: &PageSegmentation,
    params: &LineParams,
    segmenter: &dyn LineSegmenter,
) -> LineSegmentationResult {
    let text: Vec<&Region> = page.regions.iter().filter(|r| r.is_text()).collect();
    let inks: Vec<RegionInk> = text.iter().map(|r| region_ink(binary, r)).collect();
    let estimates: Vec<Option<f64>> = inks.iter().map(|ink| estimate_skew(ink, params)).collect();
    let weighted: Vec<(f64, f64)> = estimates
        .iter()
        .zip(&text)
        .filter_map(|(a, r)| a.map(|a| (a, r.area)))
        .collect();
    let fallback = fallback_angle(&weighted);
    let regions = text
        .iter()
        .zip(inks)
        .zip(estimates)
        .map(|((region, ink), est)| {
            let angle = est.unwrap_or(fallback);
            RegionLines {
                region_id: region.id.clone(),
                angle,
                estimated: est.is_some(),
                center: ink.center,
                lines: segmenter.segment(&ink, region, angle),
            }
        })
        .collect();
    LineSegmentationResult {
        page_id: page.page_id.clone(),
        regions,
    }
}

/// [`segment_page_lines`] backed by a cache. Regions with their own skew
/// estimate are looked up by geometry; the rest depend on the page-wide
/// fallback angle and are always recomputed. Returns the cache hit count.
pub fn segment_page_lines_cached(
    binary: &Raster,
    page: &PageSegmentation,
    params: &LineParams,
    segmenter: &dyn LineSegmenter,
    cache: &LineCache,
) -> (LineSegmentationResult, usize) {
    let text: Vec<&Region> = page.regions.iter().filter(|r| r.is_text()).collect();
    let cached: Vec<Option<RegionLines>> = text
        .iter()
        .map(|r| cache.get(&page.page_id, r).filter(|l| l.estimated))
        .collect();
    let fresh: Vec<Option<(RegionInk, Option<f64>)>> = text
        .iter()
        .zip(&cached)
        .map(|(r, c)| {
            c.is_none().then(|| {
                let ink = region_ink(binary, r);
                let est = estimate_skew(&ink, params);
                (ink, est)
            })
        })
        .collect();
    let mut weighted = Vec::new();
    for ((r, c), f) in text.iter().zip(&cached).zip(&fresh) {
        match (c, f) {
            (Some(c), _) => weighted.push((c.angle, r.area)),
            (None, Some((_, Some(a)))) => weighted.push((*a, r.area)),
            _ => {}
        }
    }
    let fallback = fallback_angle(&weighted);
    let hits = cached.iter().filter(|c| c.is_some()).count();
    let regions = text
        .iter()
        .zip(cached)
        .zip(fresh)
        .map(|((region, c), f)| match (c, f) {
            (Some(c), _) => c,
            (None, Some((ink, est))) => {
                let angle = est.unwrap_or(fallback);
                let lines = RegionLines {
                    region_id: region.id.clone(),
                    angle,
                    estimated: est.is_some(),
                    center: ink.center,
                    lines: segmenter.segment(&ink, region, angle),
                };
                if lines.estimated {
                    cache.insert(&page.page_id, region, lines.clone());
                }
                lines
            }
            (None, None) => unreachable!("every region is either cached or fresh"),
        })
        .collect();
    (
        LineSegmentationResult {
            page_id: page.page_id.clone(),
            regions,
        },
        hits,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CutSide {
    Above,
    Below,
}

/// A cut edit along the middle of the gap next to line `index`, or `None`
/// when there is no neighbouring line on that side.
pub fn cut_at_line(
    page: &PageSegmentation,
    lines: &RegionLines,
    index: usize,
    side: CutSide,
) -> Result<Option<Edit>> {
    let region = page
        .region(&lines.region_id)
        .ok_or_else(|| Error::NotFound(format!("region {}", lines.region_id)))?;
    if index >= lines.lines.len() {
        return Err(Error::NotFound(format!("line {index} of region {}", lines.region_id)));
    }
    let (upper, lower) = match side {
        CutSide::Above if index > 0 => (&lines.lines[index - 1], &lines.lines[index]),
        CutSide::Below if index + 1 < lines.lines.len() => (&lines.lines[index], &lines.lines[index + 1]),
        _ => return Ok(None),
    };
    let mid = (upper.bottom + lower.top) / 2.0;
    let (sin, cos) = lines.angle.to_radians().sin_cos();
    let reach = region.rectangle.width() + region.rectangle.height() + 2.0;
    let polyline = vec![
        skewed(-reach, mid, lines.center, sin, cos),
        skewed(reach, mid, lines.center, sin, cos),
    ];
    Ok(Some(Edit::CutPolyline {
        region_id: lines.region_id.clone(),
        polyline,
    }))
}

/// Isolate one line as its own region of type `new_type` by cutting above
/// and below it. Returns the edited page and the edits applied.
pub fn retype_line(
    page: &PageSegmentation,
    lines: &RegionLines,
    index: usize,
    new_type: RegionType,
    ctx: &EditContext,
) -> Result<(PageSegmentation, Vec<Edit>)> {
    let line = lines
        .lines
        .get(index)
        .ok_or_else(|| Error::NotFound(format!("line {index} of region {}", lines.region_id)))?;
    let anchor = line.polygon.centroid();
    let above = cut_at_line(page, lines, index, CutSide::Above)?;
    let below = cut_at_line(page, lines, index, CutSide::Below)?;

    let mut current = page.clone();
    let mut target = lines.region_id.clone();
    let mut edits = Vec::new();
    for cut in [above, below].into_iter().flatten() {
        let Edit::CutPolyline { polyline, .. } = cut else { unreachable!() };
        let edit = Edit::CutPolyline {
            region_id: target.clone(),
            polyline,
        };
        let before: Vec<RegionId> = current.regions.iter().map(|r| r.id.clone()).collect();
        current = apply_edit(&current, &edit, ctx)?.page;
        edits.push(edit);
        if let Some(piece) = current
            .regions
            .iter()
            .find(|r| !before.contains(&r.id) && r.contour.contains_closed(anchor))
        {
            target = piece.id.clone();
        }
    }
    let edit = Edit::Retype {
        region_id: target,
        new_type,
    };
    current = apply_edit(&current, &edit, ctx)?.page;
    edits.push(edit);
    Ok((current, edits))
}

/// Lines that look like headings: noticeably taller than the region's
/// median line and made of larger components than the region average.
/// Regions with fewer than three lines are skipped.
pub fn heading_candidates(result: &LineSegmentationResult, params: &LineParams) -> Vec<(RegionId, usize)> {
    let mut out = Vec::new();
    for region in &result.regions {
        if region.lines.len() < 3 {
            continue;
        }
        let mut heights: Vec<f64> = region.lines.iter().map(|l| l.height).collect();
        heights.sort_by(f64::total_cmp);
        let median = heights[heights.len() / 2];
        let ink: usize = region.lines.iter().map(|l| l.ink_area).sum();
        let comps: usize = region.lines.iter().map(|l| l.component_count).sum();
        if comps == 0 {
            continue;
        }
        let mean_area = ink as f64 / comps as f64;
        for line in &region.lines {
            if line.height > params.heading_height_factor * median
                && line.mean_component_area() > params.heading_area_factor * mean_area
            {
                out.push((region.region_id.clone(), line.index));
            }
        }
    }
    out
}

/// Line results per page and region geometry, so repeated requests skip
/// recomputation until the region changes.
#[derive(Debug, Default)]
pub struct LineCache {
    entries: RwLock<HashMap<(String, u64), RegionLines>>,
}

pub fn geometry_key(region: &Region) -> u64 {
    let mut h = DefaultHasher::new();
    region.id.hash(&mut h);
    for p in &region.contour.points {
        p.x.to_bits().hash(&mut h);
        p.y.to_bits().hash(&mut h);
    }
    h.finish()
}

impl LineCache {
    pub fn get(&self, page_id: &str, region: &Region) -> Option<RegionLines> {
        let map = self.entries.read().unwrap_or_else(|e| e.into_inner());
        map.get(&(page_id.to_string(), geometry_key(region))).cloned()
    }

    pub fn insert(&self, page_id: &str, region: &Region, lines: RegionLines) {
        let mut map = self.entries.write().unwrap_or_else(|e| e.into_inner());
        map.insert((page_id.to_string(), geometry_key(region)), lines);
    }

    pub fn invalidate_page(&self, page_id: &str) {
        let mut map = self.entries.write().unwrap_or_else(|e| e.into_inner());
        map.retain(|(p, _), _| p != page_id);
    }

    pub fn len(&self) -> usize {
        self.entries.read().unwrap_or_else(|e| e.into_inner()).len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Rect;

    fn ink_of(points: Vec<Point>, center: Point) -> RegionInk {
        let n = points.len();
        RegionInk {
            points,
            center,
            labels: vec![0; n],
            component_count: 1,
        }
    }

    #[test]
    fn too_little_ink_gives_no_estimate() {
        let ink = ink_of(vec![Point::new(1.0, 1.0); 10], Point::new(0.0, 0.0));
        assert_eq!(estimate_skew(&ink, &LineParams::default()), None);
    }

    #[test]
    fn straight_lines_estimate_zero() {
        let mut pts = Vec::new();
        for line in 0..5 {
            for x in 0..400 {
                for dy in 0..3 {
                    pts.push(Point::new(x as f64 + 0.5, (line * 20 + dy) as f64 + 0.5));
                }
            }
        }
        let ink = ink_of(pts, Point::new(200.0, 50.0));
        assert_eq!(estimate_skew(&ink, &LineParams::default()), Some(0.0));
    }

    #[test]
    fn fallback_is_area_weighted() {
        assert_eq!(fallback_angle(&[]), 0.0);
        assert!((fallback_angle(&[(2.0, 1.0), (5.0, 3.0)]) - 4.25).abs() < 1e-12);
    }

    #[test]
    fn line_detection_examples() {
        let mut profile = vec![0u32; 60];
        for v in &mut profile[10..20] {
            *v = 50;
        }
        for v in &mut profile[35..45] {
            *v = 50;
        }
        let bands = detect_lines(&profile);
        assert_eq!(bands.len(), 2);
        assert!(detect_lines(&[0; 30]).is_empty());
        // a one-row dip does not split a line
        profile[15] = 0;
        assert_eq!(detect_lines(&profile).len(), 2);
    }

    #[test]
    fn retype_single_line_region_is_plain_retype() {
        let region = Region::from_contour(RegionId::new("r0"), Rect::from_xywh(0.0, 0.0, 100.0, 20.0).to_polygon())
            .with_type(RegionType::Paragraph);
        let mut page = PageSegmentation::empty("p", (200, 200));
        page.regions.push(region.clone());
        let lines = RegionLines {
            region_id: region.id.clone(),
            angle: 0.0,
            estimated: false,
            center: Point::new(50.0, 10.0),
            lines: vec![TextLine {
                id: "r0_l0".into(),
                parent_region_id: region.id.clone(),
                index: 0,
                polygon: region.contour.clone(),
                baseline: vec![],
                top: -10.0,
                bottom: 10.0,
                height: 20.0,
                component_count: 1,
                ink_area: 100,
            }],
        };
        let ctx = EditContext::new(&Default::default(), (200, 200));
        let (out, edits) = retype_line(&page, &lines, 0, RegionType::Heading, &ctx).unwrap();
        assert_eq!(edits.len(), 1);
        assert_eq!(out.regions[0].assigned_type, Some(RegionType::Heading));
        assert!(cut_at_line(&page, &lines, 0, CutSide::Above).unwrap().is_none());
    }

    #[test]
    fn cache_keys_on_geometry() {
        let cache = LineCache::default();
        let r = Region::from_contour(RegionId::new("r0"), Rect::from_xywh(0.0, 0.0, 10.0, 10.0).to_polygon());
        let lines = RegionLines {
            region_id: r.id.clone(),
            angle: 0.0,
            estimated: true,
            center: Point::new(5.0, 5.0),
            lines: vec![],
        };
        cache.insert("p", &r, lines.clone());
        assert_eq!(cache.get("p", &r), Some(lines));
        let moved = r.map_points(|p| Point::new(p.x + 1.0, p.y));
        assert_eq!(cache.get("p", &moved), None);
        cache.invalidate_page("p");
        assert!(cache.is_empty());
    }
}
