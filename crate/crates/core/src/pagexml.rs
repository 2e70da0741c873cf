//! PAGE XML (2017-07-15 schema) reader and writer for segmentation and
//! text line results.
//!
//! Output is canonical: fixed attribute order, two-space indentation and
//! integer coordinates, so reading a file and writing it again reproduces
//! it byte for byte.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;

use crate::corrections::write_atomic;
use crate::error::{Error, Result};
use crate::geometry::{Point, Polygon};
use crate::lineseg::{LineSegmentationResult, RegionLines, TextLine};
use crate::model::{Region, RegionId, RegionType};
use crate::pipeline::PageSegmentation;

pub const NAMESPACE: &str = "http://schema.primaresearch.org/PAGE/gts/pagecontent/2017-07-15";
const SCHEMA_LOCATION: &str = "http://schema.primaresearch.org/PAGE/gts/pagecontent/2017-07-15 \
     http://schema.primaresearch.org/PAGE/gts/pagecontent/2017-07-15/pagecontent.xsd";
pub const CREATOR: &str = "larex";

/// Values of the TextRegion `type` attribute allowed by the schema.
pub const TEXT_REGION_TYPES: [&str; 18] = [
    "paragraph",
    "heading",
    "caption",
    "header",
    "footer",
    "page-number",
    "drop-capital",
    "credit",
    "floating",
    "signature-mark",
    "catch-word",
    "marginalia",
    "footnote",
    "footnote-continued",
    "endnote",
    "TOC-entry",
    "list-label",
    "other",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Metadata {
    pub creator: String,
    pub created: String,
    pub last_change: String,
}

impl Metadata {
    /// Both timestamps set to `unix_secs`, formatted as xsd:dateTime.
    pub fn at(unix_secs: i64) -> Self {
        let stamp = chrono::DateTime::from_timestamp(unix_secs, 0)
            .unwrap_or_default()
            .format("%Y-%m-%dT%H:%M:%S")
            .to_string();
        Self {
            creator: CREATOR.to_string(),
            created: stamp.clone(),
            last_change: stamp,
        }
    }

    /// Timestamps from the image's modification time, so repeated runs over
    /// the same input write the same bytes.
    pub fn for_image(path: &Path) -> Self {
        let secs = std::fs::metadata(path)
            .and_then(|m| m.modified())
            .ok()
            .and_then(|t| t.duration_since(std::time::UNIX_EPOCH).ok())
            .map_or(0, |d| d.as_secs() as i64);
        Self::at(secs)
    }
}

impl Default for Metadata {
    fn default() -> Self {
        Self::at(0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum XmlRegionKind {
    Text,
    Image,
}

#[derive(Debug, Clone, PartialEq)]
pub struct XmlLine {
    pub id: String,
    pub points: Vec<(i64, i64)>,
    pub baseline: Vec<(i64, i64)>,
    pub custom: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct XmlRegion {
    pub id: String,
    pub kind: XmlRegionKind,
    pub type_attr: Option<String>,
    pub orientation: Option<f64>,
    pub custom: Option<String>,
    pub points: Vec<(i64, i64)>,
    pub lines: Vec<XmlLine>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PageXmlDocument {
    pub image_filename: String,
    pub image_width: u32,
    pub image_height: u32,
    pub metadata: Metadata,
    pub reading_order: Vec<String>,
    pub regions: Vec<XmlRegion>,
}

/// Three decimals, no negative zero.
fn fmt_f(v: f64) -> String {
    let r = (v * 1000.0).round() / 1000.0 + 0.0;
    format!("{r}")
}

fn round_point(p: Point, w: u32, h: u32, warnings: &mut Vec<String>, owner: &str) -> (i64, i64) {
    // f64::round is half away from zero.
    let (x, y) = (p.x.round() as i64, p.y.round() as i64);
    let (cx, cy) = (x.clamp(0, w as i64), y.clamp(0, h as i64));
    if (cx, cy) != (x, y) {
        warnings.push(format!("{owner}: vertex ({x},{y}) clamped to ({cx},{cy})"));
    }
    (cx, cy)
}

fn round_points(poly: &[Point], w: u32, h: u32, warnings: &mut Vec<String>, owner: &str) -> Vec<(i64, i64)> {
    poly.iter().map(|&p| round_point(p, w, h, warnings, owner)).collect()
}

/// `group {key:value;key:value;}` entries of a PAGE custom attribute.
fn custom_get<'a>(custom: Option<&'a str>, group: &str, key: &str) -> Option<&'a str> {
    let custom = custom?;
    let start = custom.find(&format!("{group} {{"))? + group.len() + 2;
    let body = &custom[start..start + custom[start..].find('}')?];
    body.split(';').find_map(|kv| {
        let (k, v) = kv.split_once(':')?;
        (k.trim() == key).then(|| v.trim())
    })
}

fn join_custom(parts: Vec<String>) -> Option<String> {
    (!parts.is_empty()).then(|| parts.join(" "))
}

/// Map a segmentation (and optionally its lines) onto the document model.
/// Returns the warnings raised while clamping coordinates.
pub fn to_document(
    seg: &PageSegmentation,
    image_filename: &str,
    metadata: Metadata,
    lines: Option<&LineSegmentationResult>,
) -> (PageXmlDocument, Vec<String>) {
    let (w, h) = seg.original_size;
    let mut warnings = Vec::new();
    let mut regions = Vec::new();
    for r in &seg.regions {
        let owner = format!("region {}", r.id);
        let points = round_points(&r.contour.points, w, h, &mut warnings, &owner);
        let mut custom = Vec::new();
        let (kind, type_attr) = match &r.assigned_type {
            Some(RegionType::Image) => (XmlRegionKind::Image, None),
            Some(RegionType::ImageDescription) => (XmlRegionKind::Text, Some("caption".to_string())),
            Some(RegionType::Other(label)) if !TEXT_REGION_TYPES.contains(&label.as_str()) => {
                custom.push(format!("structure {{type:{label};}}"));
                (XmlRegionKind::Text, Some("other".to_string()))
            }
            Some(t) => (XmlRegionKind::Text, Some(t.as_str().to_string())),
            None => (XmlRegionKind::Text, None),
        };
        if r.fixed {
            custom.push("larex {fixed:true;}".to_string());
        }
        let mut orientation = None;
        let mut xml_lines = Vec::new();
        if let Some(rl) = lines.and_then(|l| l.region(&r.id)) {
            orientation = Some(-rl.angle);
            custom.push(format!(
                "lines {{angle:{};estimated:{};cx:{};cy:{};}}",
                fmt_f(rl.angle),
                rl.estimated,
                fmt_f(rl.center.x),
                fmt_f(rl.center.y)
            ));
            for l in &rl.lines {
                let owner = format!("line {}", l.id);
                xml_lines.push(XmlLine {
                    id: l.id.clone(),
                    points: round_points(&l.polygon.points, w, h, &mut warnings, &owner),
                    baseline: round_points(&l.baseline, w, h, &mut warnings, &owner),
                    custom: Some(format!(
                        "lines {{top:{};bottom:{};components:{};ink:{};}}",
                        fmt_f(l.top),
                        fmt_f(l.bottom),
                        l.component_count,
                        l.ink_area
                    )),
                });
            }
        }
        regions.push(XmlRegion {
            id: r.id.to_string(),
            kind,
            type_attr,
            orientation: orientation.map(|o: f64| (o * 1000.0).round() / 1000.0 + 0.0),
            custom: join_custom(custom),
            points,
            lines: xml_lines,
        });
    }
    let doc = PageXmlDocument {
        image_filename: image_filename.to_string(),
        image_width: w,
        image_height: h,
        metadata,
        reading_order: seg.reading_order.iter().map(|id| id.to_string()).collect(),
        regions,
    };
    (doc, warnings)
}

fn parse_type(type_attr: Option<&str>, custom: Option<&str>) -> Option<RegionType> {
    let t = type_attr?;
    Some(match t {
        "caption" => RegionType::ImageDescription,
        "other" => RegionType::Other(custom_get(custom, "structure", "type").unwrap_or("other").to_string()),
        "image" | "image-description" => RegionType::Other(t.to_string()),
        _ => t.parse().unwrap_or_else(|_| RegionType::Other(t.to_string())),
    })
}

fn to_polygon(points: &[(i64, i64)]) -> Polygon {
    Polygon::new(points.iter().map(|&(x, y)| Point::new(x as f64, y as f64)).collect())
}

/// Inverse of [`to_document`] up to coordinate rounding. Lines are
/// returned when any region carries them.
pub fn from_document(doc: &PageXmlDocument) -> (PageSegmentation, Option<LineSegmentationResult>) {
    let page_id = Path::new(&doc.image_filename)
        .file_stem()
        .map_or_else(|| doc.image_filename.clone(), |s| s.to_string_lossy().into_owned());
    let mut seg = PageSegmentation::empty(page_id.clone(), (doc.image_width, doc.image_height));
    let mut line_regions = Vec::new();
    for x in &doc.regions {
        let custom = x.custom.as_deref();
        let mut region = Region::from_contour(RegionId::new(x.id.clone()), to_polygon(&x.points));
        region.assigned_type = match x.kind {
            XmlRegionKind::Image => Some(RegionType::Image),
            XmlRegionKind::Text => parse_type(x.type_attr.as_deref(), custom),
        };
        region.fixed = custom_get(custom, "larex", "fixed") == Some("true");
        if let Some(angle) = custom_get(custom, "lines", "angle").and_then(|v| v.parse::<f64>().ok()) {
            let num = |key: &str| custom_get(custom, "lines", key).and_then(|v| v.parse::<f64>().ok());
            let lines = x
                .lines
                .iter()
                .enumerate()
                .map(|(index, l)| {
                    let lc = l.custom.as_deref();
                    let lnum = |key: &str| custom_get(lc, "lines", key).and_then(|v| v.parse::<f64>().ok());
                    let (top, bottom) = (lnum("top").unwrap_or(0.0), lnum("bottom").unwrap_or(0.0));
                    TextLine {
                        id: l.id.clone(),
                        parent_region_id: region.id.clone(),
                        index,
                        polygon: to_polygon(&l.points),
                        baseline: to_polygon(&l.baseline).points,
                        top,
                        bottom,
                        height: bottom - top,
                        component_count: lnum("components").unwrap_or(0.0) as usize,
                        ink_area: lnum("ink").unwrap_or(0.0) as usize,
                    }
                })
                .collect();
            line_regions.push(RegionLines {
                region_id: region.id.clone(),
                angle,
                estimated: custom_get(custom, "lines", "estimated") == Some("true"),
                center: Point::new(num("cx").unwrap_or(0.0), num("cy").unwrap_or(0.0)),
                lines,
            });
        }
        seg.regions.push(region);
    }
    seg.reading_order = doc.reading_order.iter().map(|id| RegionId::new(id.clone())).collect();
    let lines = (!line_regions.is_empty()).then_some(LineSegmentationResult {
        page_id,
        regions: line_regions,
    });
    (seg, lines)
}

fn esc(s: &str) -> std::borrow::Cow<'_, str> {
    quick_xml::escape::escape(s)
}

fn points_attr(points: &[(i64, i64)]) -> String {
    points
        .iter()
        .map(|(x, y)| format!("{x},{y}"))
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn write_xml(doc: &PageXmlDocument) -> String {
    let mut s = String::new();
    s.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"yes\"?>\n");
    let _ = writeln!(
        s,
        "<PcGts xmlns=\"{NAMESPACE}\" xmlns:xsi=\"http://www.w3.org/2001/XMLSchema-instance\" xsi:schemaLocation=\"{SCHEMA_LOCATION}\">"
    );
    let m = &doc.metadata;
    s.push_str("  <Metadata>\n");
    let _ = writeln!(s, "    <Creator>{}</Creator>", esc(&m.creator));
    let _ = writeln!(s, "    <Created>{}</Created>", esc(&m.created));
    let _ = writeln!(s, "    <LastChange>{}</LastChange>", esc(&m.last_change));
    s.push_str("  </Metadata>\n");
    let _ = writeln!(
        s,
        "  <Page imageFilename=\"{}\" imageWidth=\"{}\" imageHeight=\"{}\">",
        esc(&doc.image_filename),
        doc.image_width,
        doc.image_height
    );
    if !doc.reading_order.is_empty() {
        s.push_str("    <ReadingOrder>\n      <OrderedGroup id=\"ro0\">\n");
        for (i, id) in doc.reading_order.iter().enumerate() {
            let _ = writeln!(s, "        <RegionRefIndexed index=\"{i}\" regionRef=\"{}\"/>", esc(id));
        }
        s.push_str("      </OrderedGroup>\n    </ReadingOrder>\n");
    }
    for r in &doc.regions {
        let tag = match r.kind {
            XmlRegionKind::Text => "TextRegion",
            XmlRegionKind::Image => "ImageRegion",
        };
        let _ = write!(s, "    <{tag} id=\"{}\"", esc(&r.id));
        if let Some(o) = r.orientation {
            let _ = write!(s, " orientation=\"{}\"", fmt_f(o));
        }
        if let Some(t) = &r.type_attr {
            let _ = write!(s, " type=\"{}\"", esc(t));
        }
        if let Some(c) = &r.custom {
            let _ = write!(s, " custom=\"{}\"", esc(c));
        }
        s.push_str(">\n");
        let _ = writeln!(s, "      <Coords points=\"{}\"/>", points_attr(&r.points));
        for l in &r.lines {
            let _ = write!(s, "      <TextLine id=\"{}\"", esc(&l.id));
            if let Some(c) = &l.custom {
                let _ = write!(s, " custom=\"{}\"", esc(c));
            }
            s.push_str(">\n");
            let _ = writeln!(s, "        <Coords points=\"{}\"/>", points_attr(&l.points));
            if !l.baseline.is_empty() {
                let _ = writeln!(s, "        <Baseline points=\"{}\"/>", points_attr(&l.baseline));
            }
            s.push_str("      </TextLine>\n");
        }
        let _ = writeln!(s, "    </{tag}>");
    }
    s.push_str("  </Page>\n</PcGts>\n");
    s
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    (line, column)
}

struct Parser<'a> {
    text: &'a str,
    reader: Reader<&'a [u8]>,
}

impl<'a> Parser<'a> {
    fn err(&self, offset: u64, message: impl Into<String>) -> Error {
        let (line, column) = line_col(self.text, offset as usize);
        Error::Parse {
            line,
            column,
            message: message.into(),
        }
    }

    fn here(&self, message: impl Into<String>) -> Error {
        self.err(self.reader.buffer_position(), message)
    }

    fn attrs(&self, e: &BytesStart<'_>) -> Result<Vec<(String, String)>> {
        let mut out = Vec::new();
        for a in e.attributes() {
            let a = a.map_err(|err| self.here(err.to_string()))?;
            let key = String::from_utf8_lossy(a.key.local_name().as_ref()).into_owned();
            let value = a.unescape_value().map_err(|err| self.here(err.to_string()))?.into_owned();
            out.push((key, value));
        }
        Ok(out)
    }

    fn points(&self, value: &str) -> Result<Vec<(i64, i64)>> {
        value
            .split_whitespace()
            .map(|pair| {
                let (x, y) = pair
                    .split_once(',')
                    .ok_or_else(|| self.here(format!("bad point '{pair}'")))?;
                let parse = |v: &str| v.parse::<i64>().map_err(|_| self.here(format!("bad coordinate '{v}'")));
                Ok((parse(x)?, parse(y)?))
            })
            .collect()
    }
}

fn get<'v>(attrs: &'v [(String, String)], key: &str) -> Option<&'v str> {
    attrs.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
}

pub fn parse_xml(text: &str) -> Result<PageXmlDocument> {
    let mut p = Parser {
        text,
        reader: Reader::from_str(text),
    };
    p.reader.config_mut().trim_text(true);

    let mut doc = PageXmlDocument {
        image_filename: String::new(),
        image_width: 0,
        image_height: 0,
        metadata: Metadata {
            creator: String::new(),
            created: String::new(),
            last_change: String::new(),
        },
        reading_order: Vec::new(),
        regions: Vec::new(),
    };
    let mut stack: Vec<String> = Vec::new();
    let mut seen_root = false;
    let mut seen_page = false;
    let mut text_buf = String::new();
    // Regions of kinds this tool does not produce are skipped entirely.
    let mut skip_depth: Option<usize> = None;

    loop {
        let event = p.reader.read_event().map_err(|e| p.err(p.reader.error_position(), e.to_string()))?;
        let (start, empty) = match &event {
            Event::Start(e) => (Some(e.clone()), false),
            Event::Empty(e) => (Some(e.clone()), true),
            _ => (None, false),
        };
        if let Some(e) = start {
            let name = String::from_utf8_lossy(e.local_name().as_ref()).into_owned();
            if skip_depth.is_none() {
                let attrs = p.attrs(&e)?;
                let parent = stack.last().map(String::as_str);
                match (parent, name.as_str()) {
                    (None, "PcGts") => seen_root = true,
                    (None, other) => return Err(p.here(format!("unexpected root element {other}"))),
                    (Some("PcGts"), "Page") => {
                        seen_page = true;
                        doc.image_filename = get(&attrs, "imageFilename")
                            .ok_or_else(|| p.here("Page without imageFilename"))?
                            .to_string();
                        let dim = |k: &str| -> Result<u32> {
                            get(&attrs, k)
                                .and_then(|v| v.parse().ok())
                                .ok_or_else(|| p.here(format!("Page has missing or bad {k}")))
                        };
                        doc.image_width = dim("imageWidth")?;
                        doc.image_height = dim("imageHeight")?;
                    }
                    (Some("OrderedGroup"), "RegionRefIndexed") => {
                        let r = get(&attrs, "regionRef").ok_or_else(|| p.here("RegionRefIndexed without regionRef"))?;
                        doc.reading_order.push(r.to_string());
                    }
                    (Some("Page"), "TextRegion" | "ImageRegion") => {
                        let kind = if name == "TextRegion" {
                            XmlRegionKind::Text
                        } else {
                            XmlRegionKind::Image
                        };
                        let orientation = match get(&attrs, "orientation") {
                            Some(v) => Some(v.parse::<f64>().map_err(|_| p.here("bad orientation"))?),
                            None => None,
                        };
                        doc.regions.push(XmlRegion {
                            id: get(&attrs, "id").ok_or_else(|| p.here(format!("{name} without id")))?.to_string(),
                            kind,
                            type_attr: get(&attrs, "type").map(str::to_string),
                            orientation,
                            custom: get(&attrs, "custom").map(str::to_string),
                            points: Vec::new(),
                            lines: Vec::new(),
                        });
                    }
                    (Some("Page"), n) if n.ends_with("Region") => skip_depth = Some(stack.len()),
                    (Some("TextRegion"), "TextLine") => {
                        let id = get(&attrs, "id").ok_or_else(|| p.here("TextLine without id"))?.to_string();
                        let region = doc.regions.last_mut().expect("inside a region");
                        region.lines.push(XmlLine {
                            id,
                            points: Vec::new(),
                            baseline: Vec::new(),
                            custom: get(&attrs, "custom").map(str::to_string),
                        });
                    }
                    (Some("TextRegion" | "ImageRegion"), "Coords") => {
                        let pts = p.points(get(&attrs, "points").ok_or_else(|| p.here("Coords without points"))?)?;
                        doc.regions.last_mut().expect("inside a region").points = pts;
                    }
                    (Some("TextLine"), "Coords" | "Baseline") => {
                        let pts = p.points(get(&attrs, "points").ok_or_else(|| p.here(format!("{name} without points")))?)?;
                        let line = doc
                            .regions
                            .last_mut()
                            .and_then(|r| r.lines.last_mut())
                            .expect("inside a line");
                        if name == "Coords" {
                            line.points = pts;
                        } else {
                            line.baseline = pts;
                        }
                    }
                    _ => {}
                }
            }
            if !empty {
                stack.push(name);
                text_buf.clear();
            } else if skip_depth == Some(stack.len()) {
                skip_depth = None;
            }
            continue;
        }
        match event {
            Event::Text(t) => {
                let s = t.decode().map_err(|e| p.here(e.to_string()))?;
                text_buf.push_str(&s);
            }
            Event::GeneralRef(r) => {
                if let Some(c) = r.resolve_char_ref().map_err(|e| p.here(e.to_string()))? {
                    text_buf.push(c);
                } else {
                    let name = r.decode().map_err(|e| p.here(e.to_string()))?;
                    let v = quick_xml::escape::resolve_predefined_entity(&name)
                        .ok_or_else(|| p.here(format!("unknown entity &{name};")))?;
                    text_buf.push_str(v);
                }
            }
            Event::End(_) => {
                let name = stack.pop().ok_or_else(|| p.here("unbalanced end tag"))?;
                if skip_depth == Some(stack.len()) {
                    skip_depth = None;
                }
                if stack.last().map(String::as_str) == Some("Metadata") {
                    let value = std::mem::take(&mut text_buf);
                    match name.as_str() {
                        "Creator" => doc.metadata.creator = value,
                        "Created" => doc.metadata.created = value,
                        "LastChange" => doc.metadata.last_change = value,
                        _ => {}
                    }
                }
                text_buf.clear();
            }
            Event::Eof => {
                if !stack.is_empty() {
                    return Err(p.here(format!("unexpected end of file inside <{}>", stack.last().unwrap())));
                }
                break;
            }
            _ => {}
        }
    }
    if !seen_root {
        return Err(p.here("missing PcGts root element"));
    }
    if !seen_page {
        return Err(p.here("missing Page element"));
    }
    Ok(doc)
}

fn is_ncname(s: &str) -> bool {
    let mut chars = s.chars();
    chars.next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'))
}

fn is_datetime(s: &str) -> bool {
    chrono::NaiveDateTime::parse_from_str(s, "%Y-%m-%dT%H:%M:%S").is_ok()
}

/// Structural checks mirroring the schema constraints this tool relies on.
/// Returns one message per violation.
pub fn validate(doc: &PageXmlDocument) -> Vec<String> {
    let mut problems = Vec::new();
    let (w, h) = (doc.image_width as i64, doc.image_height as i64);
    if w <= 0 || h <= 0 {
        problems.push("image dimensions must be positive".to_string());
    }
    if doc.image_filename.is_empty() {
        problems.push("imageFilename is empty".to_string());
    }
    for (name, v) in [("Created", &doc.metadata.created), ("LastChange", &doc.metadata.last_change)] {
        if !is_datetime(v) {
            problems.push(format!("{name} '{v}' is not an xsd:dateTime"));
        }
    }
    let mut ids: Vec<&str> = Vec::new();
    let check_points = |owner: &str, pts: &[(i64, i64)], min: usize, problems: &mut Vec<String>| {
        if pts.len() < min {
            problems.push(format!("{owner} has {} points, need at least {min}", pts.len()));
        }
        for &(x, y) in pts {
            if x < 0 || y < 0 || x > w || y > h {
                problems.push(format!("{owner} point ({x},{y}) outside the image"));
            }
        }
    };
    for r in &doc.regions {
        ids.push(&r.id);
        check_points(&format!("region {}", r.id), &r.points, 3, &mut problems);
        if let (XmlRegionKind::Text, Some(t)) = (r.kind, &r.type_attr) {
            if !TEXT_REGION_TYPES.contains(&t.as_str()) {
                problems.push(format!("region {} has invalid type '{t}'", r.id));
            }
        }
        if r.kind == XmlRegionKind::Image && !r.lines.is_empty() {
            problems.push(format!("image region {} contains text lines", r.id));
        }
        for l in &r.lines {
            ids.push(&l.id);
            check_points(&format!("line {}", l.id), &l.points, 3, &mut problems);
            if !l.baseline.is_empty() {
                check_points(&format!("baseline of {}", l.id), &l.baseline, 2, &mut problems);
            }
        }
    }
    for (i, id) in ids.iter().enumerate() {
        if !is_ncname(id) {
            problems.push(format!("id '{id}' is not a valid xsd:ID"));
        }
        if ids[..i].contains(id) {
            problems.push(format!("duplicate id '{id}'"));
        }
    }
    for (i, r) in doc.reading_order.iter().enumerate() {
        if !doc.regions.iter().any(|x| &x.id == r) {
            problems.push(format!("reading order references unknown region '{r}'"));
        }
        if doc.reading_order[..i].contains(r) {
            problems.push(format!("reading order lists '{r}' twice"));
        }
    }
    problems
}

/// `<out_dir>/<stem>.xml`, or next to the image when `out_dir` is `None`.
pub fn page_xml_path(image: &Path, out_dir: Option<&Path>) -> PathBuf {
    output_path(image, out_dir, "xml")
}

/// Companion file holding text lines: `<stem>.lines.xml`.
pub fn lines_xml_path(image: &Path, out_dir: Option<&Path>) -> PathBuf {
    output_path(image, out_dir, "lines.xml")
}

fn output_path(image: &Path, out_dir: Option<&Path>, suffix: &str) -> PathBuf {
    let stem = image.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let dir = out_dir.map_or_else(|| image.parent().unwrap_or(Path::new("")).to_path_buf(), Path::to_path_buf);
    dir.join(format!("{stem}.{suffix}"))
}

/// Serialize `doc` to `path`. Returns the validation problems found; the
/// file is written regardless so it can be inspected.
pub fn write_document(doc: &PageXmlDocument, path: &Path) -> Result<Vec<String>> {
    write_atomic(path, write_xml(doc).as_bytes())?;
    Ok(validate(doc))
}

pub fn read_document(path: &Path) -> Result<PageXmlDocument> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_xml(&text)
}

pub fn read_page_xml(path: &Path) -> Result<(PageSegmentation, Option<LineSegmentationResult>)> {
    Ok(from_document(&read_document(path)?))
}
