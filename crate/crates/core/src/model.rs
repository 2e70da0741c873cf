//! Regions, region types and the declarative type rules used to classify
//! them.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, FieldError};
use crate::geometry::{Polygon, Rect, RotatedRect};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RegionType {
    Image,
    Paragraph,
    Marginalia,
    PageNumber,
    SignatureMark,
    Heading,
    ImageDescription,
    Other(String),
}

impl RegionType {
    pub fn other(label: impl Into<String>) -> Result<Self, Error> {
        let label = label.into();
        if label.trim().is_empty() {
            return Err(Error::invalid("region type label must be non-empty"));
        }
        Ok(RegionType::Other(label))
    }

    pub fn is_text(&self) -> bool {
        !matches!(self, RegionType::Image)
    }

    pub fn as_str(&self) -> &str {
        match self {
            RegionType::Image => "image",
            RegionType::Paragraph => "paragraph",
            RegionType::Marginalia => "marginalia",
            RegionType::PageNumber => "page-number",
            RegionType::SignatureMark => "signature-mark",
            RegionType::Heading => "heading",
            RegionType::ImageDescription => "image-description",
            RegionType::Other(label) => label,
        }
    }
}

impl fmt::Display for RegionType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RegionType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        Ok(match s {
            "image" => RegionType::Image,
            "paragraph" => RegionType::Paragraph,
            "marginalia" => RegionType::Marginalia,
            "page-number" => RegionType::PageNumber,
            "signature-mark" => RegionType::SignatureMark,
            "heading" => RegionType::Heading,
            "image-description" => RegionType::ImageDescription,
            other => RegionType::other(other)?,
        })
    }
}

impl Serialize for RegionType {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for RegionType {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RegionId(pub String);

impl RegionId {
    pub fn new(id: impl Into<String>) -> Self {
        Self(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for RegionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for RegionId {
    fn from(s: &str) -> Self {
        RegionId(s.to_string())
    }
}

/// A page region: outer contour plus derived rectangles and area.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Region {
    pub id: RegionId,
    pub contour: Polygon,
    pub rectangle: Rect,
    pub rotated_rect: RotatedRect,
    /// Area enclosed by the contour.
    pub area: f64,
    pub assigned_type: Option<RegionType>,
    /// Drawn by hand; survives re-segmentation.
    #[serde(default)]
    pub fixed: bool,
}

impl Region {
    pub fn from_contour(id: RegionId, contour: Polygon) -> Self {
        let rectangle = contour.bounding_rect();
        let rotated_rect = contour.min_area_rect();
        let area = contour.area();
        Self {
            id,
            contour,
            rectangle,
            rotated_rect,
            area,
            assigned_type: None,
            fixed: false,
        }
    }

    pub fn with_type(mut self, t: RegionType) -> Self {
        self.assigned_type = Some(t);
        self
    }

    /// Same region with every vertex passed through `f`.
    pub fn map_points(&self, f: impl Fn(crate::Point) -> crate::Point) -> Region {
        let mut r = Region::from_contour(self.id.clone(), self.contour.map(f));
        r.assigned_type = self.assigned_type.clone();
        r.fixed = self.fixed;
        r
    }

    pub fn is_text(&self) -> bool {
        self.assigned_type.as_ref().is_some_and(RegionType::is_text)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MaxOccurrence {
    One,
    Unbounded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PriorityPosition {
    Top,
    Bottom,
    Left,
    Right,
}

/// Constraints a region must satisfy to be a candidate for `type_id`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TypeRule {
    pub type_id: RegionType,
    /// Strict lower bound on region area, in working pixels.
    pub min_area: f64,
    /// Permitted zones in relative page coordinates; empty means anywhere.
    #[serde(default)]
    pub zones: Vec<Rect>,
    pub max_occurrence: MaxOccurrence,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub priority_position: Option<PriorityPosition>,
}

impl TypeRule {
    pub fn anywhere(type_id: RegionType, min_area: f64) -> Self {
        Self {
            type_id,
            min_area,
            zones: Vec::new(),
            max_occurrence: MaxOccurrence::Unbounded,
            priority_position: None,
        }
    }

    pub fn in_zones(mut self, zones: Vec<Rect>) -> Self {
        self.zones = zones;
        self
    }

    pub fn unique(mut self, position: PriorityPosition) -> Self {
        self.max_occurrence = MaxOccurrence::One;
        self.priority_position = Some(position);
        self
    }

    pub fn validate(&self, prefix: &str) -> Vec<FieldError> {
        let mut errs = Vec::new();
        if !(self.min_area >= 0.0) {
            errs.push(FieldError::new(format!("{prefix}.minArea"), "must be >= 0"));
        }
        for (i, z) in self.zones.iter().enumerate() {
            let in_unit = [z.left, z.top, z.right, z.bottom]
                .iter()
                .all(|v| (0.0..=1.0).contains(v));
            if !in_unit || z.left > z.right || z.top > z.bottom {
                errs.push(FieldError::new(
                    format!("{prefix}.zones[{i}]"),
                    "must be an ordered rectangle inside the unit square",
                ));
            }
        }
        let unique = self.max_occurrence == MaxOccurrence::One;
        if unique != self.priority_position.is_some() {
            errs.push(FieldError::new(
                format!("{prefix}.priorityPosition"),
                "required exactly when maxOccurrence is one",
            ));
        }
        errs
    }
}

/// Region types ordered from highest to lowest priority.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PriorityList(pub Vec<RegionType>);

impl PriorityList {
    pub fn rank(&self, t: &RegionType) -> Option<usize> {
        self.0.iter().position(|x| x == t)
    }

    /// Highest-priority member of `candidates`; unranked types come last.
    pub fn best<'a>(&self, candidates: impl IntoIterator<Item = &'a RegionType>) -> Option<&'a RegionType> {
        candidates
            .into_iter()
            .min_by_key(|t| self.rank(t).unwrap_or(usize::MAX))
    }
}

impl Default for PriorityList {
    fn default() -> Self {
        PriorityList(vec![
            RegionType::PageNumber,
            RegionType::Marginalia,
            RegionType::Paragraph,
        ])
    }
}

/// Left and right quarters of the page.
pub fn side_margin_zones(fraction: f64) -> Vec<Rect> {
    vec![
        Rect::new(0.0, 0.0, fraction, 1.0),
        Rect::new(1.0 - fraction, 0.0, 1.0, 1.0),
    ]
}

/// Top and bottom bands of the page.
pub fn head_foot_zones(fraction: f64) -> Vec<Rect> {
    vec![
        Rect::new(0.0, 0.0, 1.0, fraction),
        Rect::new(0.0, 1.0 - fraction, 1.0, 1.0),
    ]
}

pub const MIN_AREA_PARAGRAPH: f64 = 2000.0;
pub const MIN_AREA_MARGINALIA: f64 = 2000.0;
pub const MIN_AREA_PAGE_NUMBER: f64 = 500.0;

/// Paragraph anywhere, marginalia in the outer quarters, a single page
/// number in the top or bottom quarter preferring the topmost candidate.
pub fn default_rules() -> Vec<TypeRule> {
    vec![
        TypeRule::anywhere(RegionType::Paragraph, MIN_AREA_PARAGRAPH),
        TypeRule::anywhere(RegionType::Marginalia, MIN_AREA_MARGINALIA).in_zones(side_margin_zones(0.25)),
        TypeRule::anywhere(RegionType::PageNumber, MIN_AREA_PAGE_NUMBER)
            .in_zones(head_foot_zones(0.25))
            .unique(PriorityPosition::Top),
    ]
}

/// True iff a single zone covers `rect` entirely.
pub fn within(rect: &Rect, zones: &[Rect]) -> bool {
    zones.iter().any(|z| z.contains_rect(rect))
}

/// Every type whose rule the region satisfies, in rule order. Zones are
/// scaled to `page_size` (working pixels) before testing.
pub fn candidate_types(region: &Region, rules: &[TypeRule], page_size: (u32, u32)) -> Vec<RegionType> {
    let (w, h) = (page_size.0 as f64, page_size.1 as f64);
    let mut out: Vec<RegionType> = Vec::new();
    for rule in rules {
        if !(region.area > rule.min_area) {
            continue;
        }
        if !rule.zones.is_empty() {
            let scaled: Vec<Rect> = rule.zones.iter().map(|z| z.scaled(w, h)).collect();
            if !within(&region.rectangle, &scaled) {
                continue;
            }
        }
        if !out.contains(&rule.type_id) {
            out.push(rule.type_id.clone());
        }
    }
    out
}
