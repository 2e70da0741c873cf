//! Page segmentation: preprocessing, image detection, text block growing,
//! rule-based typing and post-processing, and rescaling to the original
//! image.

use image::DynamicImage;
use serde::{Deserialize, Serialize};

use crate::error::{Error, FieldError, Result};
use crate::geometry::{Point, Rect};
use crate::imaging::{self, EraseShape, Raster, ScaleTransform};
use crate::lineseg::LineParams;
use crate::model::{
    self, MaxOccurrence, PriorityList, PriorityPosition, Region, RegionId, RegionType, TypeRule,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Kernel {
    pub width: u32,
    pub height: u32,
}

impl Kernel {
    pub const fn new(width: u32, height: u32) -> Self {
        Self { width, height }
    }

    fn is_valid(&self) -> bool {
        self.width % 2 == 1 && self.height % 2 == 1
    }
}

/// What gets cut out of the page once a component is recognized as image.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ImageRemovalMode {
    Contour,
    #[default]
    StraightRect,
    RotatedRect,
}

/// Per-book segmentation parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct SegmentationProfile {
    /// Working height; larger pages are downscaled to it.
    pub target_height: u32,
    /// Fixed gray threshold instead of Otsu.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub binarization_threshold: Option<u8>,
    pub image_kernel: Kernel,
    pub text_kernel: Kernel,
    pub image_area_threshold: f64,
    pub image_removal_mode: ImageRemovalMode,
    pub image_dilation_enabled: bool,
    /// Region of interest in relative page coordinates.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub roi: Option<Rect>,
    pub rules: Vec<TypeRule>,
    pub priority: PriorityList,
    pub lines: LineParams,
}

impl Default for SegmentationProfile {
    fn default() -> Self {
        Self {
            target_height: 1600,
            binarization_threshold: None,
            image_kernel: Kernel::new(5, 5),
            text_kernel: Kernel::new(21, 15),
            image_area_threshold: 3000.0,
            image_removal_mode: ImageRemovalMode::StraightRect,
            image_dilation_enabled: true,
            roi: None,
            rules: model::default_rules(),
            priority: PriorityList::default(),
            lines: LineParams::default(),
        }
    }
}

impl SegmentationProfile {
    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        if self.target_height == 0 {
            errs.push(FieldError::new("targetHeight", "must be > 0"));
        }
        for (name, k) in [("imageKernel", self.image_kernel), ("textKernel", self.text_kernel)] {
            if !k.is_valid() {
                errs.push(FieldError::new(name, "width and height must be odd and >= 1"));
            }
        }
        if !(self.image_area_threshold >= 0.0) {
            errs.push(FieldError::new("imageAreaThreshold", "must be >= 0"));
        }
        if let Some(roi) = self.roi {
            let unit = Rect::new(0.0, 0.0, 1.0, 1.0);
            if !unit.contains_rect(&roi) || roi.left >= roi.right || roi.top >= roi.bottom {
                errs.push(FieldError::new("roi", "must be a non-empty rectangle inside the unit square"));
            }
        }
        for (i, rule) in self.rules.iter().enumerate() {
            errs.extend(rule.validate(&format!("rules[{i}]")));
        }
        let prio = &self.priority.0;
        for (i, t) in prio.iter().enumerate() {
            if prio[..i].contains(t) {
                errs.push(FieldError::new(format!("priority[{i}]"), format!("duplicate type {t}")));
            }
        }
        for (i, rule) in self.rules.iter().enumerate() {
            if !prio.contains(&rule.type_id) {
                errs.push(FieldError::new(
                    format!("rules[{i}].typeId"),
                    format!("type {} missing from priority list", rule.type_id),
                ));
            }
        }
        errs.extend(self.lines.validate());
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(errs))
        }
    }

    fn rule_for(&self, t: &RegionType) -> Option<&TypeRule> {
        self.rules.iter().find(|r| &r.type_id == t)
    }
}

/// Segmentation of one page in original image coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PageSegmentation {
    pub page_id: String,
    pub original_size: (u32, u32),
    pub regions: Vec<Region>,
    pub reading_order: Vec<RegionId>,
}

impl PageSegmentation {
    pub fn empty(page_id: impl Into<String>, size: (u32, u32)) -> Self {
        Self {
            page_id: page_id.into(),
            original_size: size,
            regions: Vec::new(),
            reading_order: Vec::new(),
        }
    }

    pub fn region(&self, id: &RegionId) -> Option<&Region> {
        self.regions.iter().find(|r| &r.id == id)
    }

    pub fn region_index(&self, id: &RegionId) -> Result<usize> {
        self.regions
            .iter()
            .position(|r| &r.id == id)
            .ok_or_else(|| Error::NotFound(format!("region {id}")))
    }

    /// An id not used by any region: `r<n>` past the largest numeric suffix.
    pub fn fresh_id(&self) -> RegionId {
        let next = self
            .regions
            .iter()
            .filter_map(|r| r.id.as_str().strip_prefix('r')?.parse::<u64>().ok())
            .max()
            .map_or(0, |m| m + 1);
        RegionId(format!("r{next}"))
    }

    pub fn refresh_reading_order(&mut self) {
        self.reading_order = reading_order(&self.regions);
    }

    pub fn count_by_type(&self) -> std::collections::BTreeMap<String, usize> {
        let mut m = std::collections::BTreeMap::new();
        for r in &self.regions {
            let key = r.assigned_type.as_ref().map_or("untyped".to_string(), |t| t.to_string());
            *m.entry(key).or_insert(0) += 1;
        }
        m
    }
}

/// A region with every type whose rule it satisfies.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassifiedRegion {
    pub region: Region,
    pub candidates: Vec<RegionType>,
}

/// Everything `segment_page` produces.
#[derive(Debug, Clone)]
pub struct SegmentationOutput {
    pub page: PageSegmentation,
    /// Blocks no rule accepted, in original coordinates.
    pub unclassified: Vec<Region>,
    pub scale: ScaleTransform,
    pub working_size: (u32, u32),
    /// `page.regions` before rescaling, index for index.
    pub working_regions: Vec<Region>,
}

/// Components above the image area threshold become image regions and are
/// erased from the returned raster.
pub fn detect_images(r: &Raster, profile: &SegmentationProfile) -> Result<(Vec<Region>, Raster)> {
    let scratch = if profile.image_dilation_enabled {
        imaging::dilate(r, profile.image_kernel.width, profile.image_kernel.height)?
    } else {
        r.clone()
    };
    let mut cleaned = r.clone();
    let mut images = Vec::new();
    for c in imaging::connected_components(&scratch) {
        if !(c.area as f64 > profile.image_area_threshold) {
            continue;
        }
        let shape = match profile.image_removal_mode {
            ImageRemovalMode::Contour => EraseShape::Contour(c.contour),
            ImageRemovalMode::StraightRect => EraseShape::StraightRect(c.bounds),
            ImageRemovalMode::RotatedRect => EraseShape::RotatedRect(c.rotated_rect),
        };
        imaging::erase_in_place(&mut cleaned, &shape);
        let contour = clamp_polygon(&shape.to_polygon(), r.width() as f64, r.height() as f64);
        let id = RegionId(format!("i{}", images.len()));
        images.push(Region::from_contour(id, contour).with_type(RegionType::Image));
    }
    Ok((images, cleaned))
}

/// Dilate with the text kernel; each component becomes a block.
pub fn grow_text_regions(r: &Raster, profile: &SegmentationProfile) -> Result<Vec<Region>> {
    let grown = imaging::dilate(r, profile.text_kernel.width, profile.text_kernel.height)?;
    Ok(imaging::connected_components(&grown)
        .into_iter()
        .enumerate()
        .map(|(i, c)| Region::from_contour(RegionId(format!("t{i}")), c.contour))
        .collect())
}

pub fn classify_regions(
    regions: Vec<Region>,
    profile: &SegmentationProfile,
    page_size: (u32, u32),
) -> Vec<ClassifiedRegion> {
    regions
        .into_iter()
        .map(|region| {
            let candidates = model::candidate_types(&region, &profile.rules, page_size);
            ClassifiedRegion { region, candidates }
        })
        .collect()
}

/// Give each region its highest-priority candidate. Returns the typed
/// regions and the ones without any candidate.
pub fn resolve_priorities(
    classified: Vec<ClassifiedRegion>,
    profile: &SegmentationProfile,
) -> (Vec<ClassifiedRegion>, Vec<Region>) {
    let mut typed = Vec::new();
    let mut unclassified = Vec::new();
    for mut c in classified {
        match profile.priority.best(&c.candidates).cloned() {
            Some(t) => {
                c.region.assigned_type = Some(t);
                typed.push(c);
            }
            None => {
                c.region.assigned_type = None;
                unclassified.push(c.region);
            }
        }
    }
    (typed, unclassified)
}

/// Ordering key for the single survivor of a max-occurrence-one type:
/// extremal edge in the preferred direction, then larger area, then
/// leftmost, then topmost.
fn fitness_cmp(position: PriorityPosition, a: &Region, b: &Region) -> std::cmp::Ordering {
    let edge = |r: &Region| match position {
        PriorityPosition::Top => r.rectangle.top,
        PriorityPosition::Bottom => -r.rectangle.bottom,
        PriorityPosition::Left => r.rectangle.left,
        PriorityPosition::Right => -r.rectangle.right,
    };
    edge(a)
        .total_cmp(&edge(b))
        .then(b.area.total_cmp(&a.area))
        .then(a.rectangle.left.total_cmp(&b.rectangle.left))
        .then(a.rectangle.top.total_cmp(&b.rectangle.top))
}

/// Keep one holder per max-occurrence-one type; the others fall back to
/// their next candidate by priority or are dropped.
pub fn resolve_max_occurrence(
    mut regions: Vec<ClassifiedRegion>,
    profile: &SegmentationProfile,
) -> Vec<ClassifiedRegion> {
    let mut limited: Vec<(RegionType, PriorityPosition)> = Vec::new();
    for t in profile.priority.0.iter().chain(profile.rules.iter().map(|r| &r.type_id)) {
        if limited.iter().any(|(x, _)| x == t) {
            continue;
        }
        if let Some(rule) = profile.rule_for(t) {
            if rule.max_occurrence == MaxOccurrence::One {
                limited.push((t.clone(), rule.priority_position.unwrap_or(PriorityPosition::Top)));
            }
        }
    }

    loop {
        let mut changed = false;
        for (t, position) in &limited {
            let holders: Vec<usize> = (0..regions.len())
                .filter(|&i| regions[i].region.assigned_type.as_ref() == Some(t))
                .collect();
            if holders.len() <= 1 {
                continue;
            }
            let winner = *holders
                .iter()
                .min_by(|&&a, &&b| fitness_cmp(*position, &regions[a].region, &regions[b].region))
                .expect("non-empty");
            for &i in holders.iter().filter(|&&i| i != winner) {
                let loser = &mut regions[i];
                loser.candidates.retain(|c| c != t);
                loser.region.assigned_type = profile.priority.best(&loser.candidates).cloned();
            }
            changed = true;
        }
        if !changed {
            break;
        }
    }
    regions.retain(|c| c.region.assigned_type.is_some());
    regions
}

fn is_furniture(t: &RegionType) -> bool {
    matches!(
        t,
        RegionType::Marginalia | RegionType::PageNumber | RegionType::SignatureMark
    )
}

/// Body text column by column (columns are clusters of horizontally
/// overlapping blocks, left to right; top to bottom inside a column),
/// followed by marginalia and other page furniture top to bottom.
pub fn reading_order(regions: &[Region]) -> Vec<RegionId> {
    let text: Vec<&Region> = regions.iter().filter(|r| r.is_text()).collect();
    let (furniture, body): (Vec<&Region>, Vec<&Region>) = text
        .into_iter()
        .partition(|r| r.assigned_type.as_ref().is_some_and(is_furniture));

    // Union-find over horizontal overlap.
    let mut parent: Vec<usize> = (0..body.len()).collect();
    fn find(p: &mut [usize], i: usize) -> usize {
        let mut i = i;
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for i in 0..body.len() {
        for j in i + 1..body.len() {
            if body[i].rectangle.overlaps_horizontally(&body[j].rectangle) {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut columns: Vec<Vec<&Region>> = Vec::new();
    let mut roots: Vec<usize> = Vec::new();
    for (i, &region) in body.iter().enumerate() {
        let root = find(&mut parent, i);
        match roots.iter().position(|&r| r == root) {
            Some(k) => columns[k].push(region),
            None => {
                roots.push(root);
                columns.push(vec![region]);
            }
        }
    }
    let top_then_left = |a: &&Region, b: &&Region| {
        a.rectangle
            .top
            .total_cmp(&b.rectangle.top)
            .then(a.rectangle.left.total_cmp(&b.rectangle.left))
    };
    for col in &mut columns {
        col.sort_by(top_then_left);
    }
    let col_left = |c: &Vec<&Region>| c.iter().map(|r| r.rectangle.left).fold(f64::INFINITY, f64::min);
    columns.sort_by(|a, b| col_left(a).total_cmp(&col_left(b)));

    let mut furniture = furniture;
    furniture.sort_by(top_then_left);

    columns
        .into_iter()
        .flatten()
        .chain(furniture)
        .map(|r| r.id.clone())
        .collect()
}

fn clamp_polygon(p: &crate::Polygon, w: f64, h: f64) -> crate::Polygon {
    p.map(|q| Point::new(q.x.clamp(0.0, w), q.y.clamp(0.0, h)))
}

/// Binarize with the profile threshold and mask to the profile ROI, at the
/// original resolution.
pub fn prepare_binary(image: &DynamicImage, profile: &SegmentationProfile) -> Result<Raster> {
    let binary = imaging::binarize(image, profile.binarization_threshold)?;
    mask_roi(&binary, profile)
}

fn mask_roi(binary: &Raster, profile: &SegmentationProfile) -> Result<Raster> {
    let roi = profile
        .roi
        .map(|r| r.scaled(binary.width() as f64, binary.height() as f64));
    imaging::apply_roi(binary, roi)
}

pub fn segment_page(
    image: &DynamicImage,
    page_id: &str,
    profile: &SegmentationProfile,
) -> Result<SegmentationOutput> {
    profile.validate()?;
    let binary = imaging::binarize(image, profile.binarization_threshold)?;
    segment_binary(&binary, page_id, profile)
}

/// Run the pipeline on an already binarized page at original resolution.
pub fn segment_binary(
    binary: &Raster,
    page_id: &str,
    profile: &SegmentationProfile,
) -> Result<SegmentationOutput> {
    profile.validate()?;
    let masked = mask_roi(binary, profile)?;
    let (working, scale) = imaging::resize_to_height(&masked, profile.target_height)?;
    let working_size = working.size();

    let (images, without_images) = detect_images(&working, profile)?;
    let blocks = grow_text_regions(&without_images, profile)?;
    let classified = classify_regions(blocks, profile, working_size);
    let (typed, unclassified) = resolve_priorities(classified, profile);
    let typed = resolve_max_occurrence(typed, profile);

    let (ww, wh) = (working_size.0 as f64, working_size.1 as f64);
    let mut working_regions: Vec<Region> = images
        .into_iter()
        .chain(typed.into_iter().map(|c| c.region))
        .collect();
    for (i, r) in working_regions.iter_mut().enumerate() {
        r.id = RegionId(format!("r{i}"));
        r.contour = clamp_polygon(&r.contour, ww, wh);
    }

    let (ow, oh) = (binary.width() as f64, binary.height() as f64);
    let to_original = |r: &Region| {
        r.map_points(|p| {
            let q = scale.to_original(p);
            Point::new(q.x.clamp(0.0, ow), q.y.clamp(0.0, oh))
        })
    };
    let regions: Vec<Region> = working_regions.iter().map(to_original).collect();
    let unclassified = unclassified
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut r = to_original(r);
            r.id = RegionId(format!("u{i}"));
            r
        })
        .collect();

    let mut page = PageSegmentation {
        page_id: page_id.to_string(),
        original_size: binary.size(),
        regions,
        reading_order: Vec::new(),
    };
    page.refresh_reading_order();

    Ok(SegmentationOutput {
        page,
        unclassified,
        scale,
        working_size,
        working_regions,
    })
}
