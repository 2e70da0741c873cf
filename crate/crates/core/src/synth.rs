//! Deterministic synthetic pages with known layout, for tests, benchmarks
//! and fixture books.
//!
//! Pages follow a typical early-print layout in a 1100 x 1600 design
//! space: a central body column, marginal notes in the outer quarters, a
//! page number at the top center and a signature mark at the bottom center.
//! Glyphs are small ink rectangles; words, lines and paragraphs are spaced
//! so the default kernels group them the way a reader would.

use std::path::{Path, PathBuf};

use image::{GrayImage, Luma};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{Point, Polygon, Rect};
use crate::imaging::{self, Raster};
use crate::model::{self, PriorityList, PriorityPosition, RegionType, TypeRule};
use crate::pipeline::{Kernel, SegmentationProfile};

pub const DESIGN_WIDTH: f64 = 1100.0;
pub const DESIGN_HEIGHT: f64 = 1600.0;

const BODY: (f64, f64) = (360.0, 740.0);
const LEFT_MARGIN: (f64, f64) = (40.0, 250.0);
const RIGHT_MARGIN: (f64, f64) = (850.0, 1060.0);
const LINE_PITCH: f64 = 24.0;
const X_HEIGHT: f64 = 12.0;
const ASCENDER: f64 = 4.0;

#[derive(Debug, Clone, PartialEq)]
pub struct TruthRegion {
    /// Ink bounds in page pixels.
    pub rect: Rect,
    pub region_type: RegionType,
}

#[derive(Debug, Clone)]
pub struct SynthPage {
    pub raster: Raster,
    pub truth: Vec<TruthRegion>,
}

#[derive(Debug, Clone, Copy)]
pub struct PageSpec {
    pub seed: u64,
    /// Page pixels per design unit.
    pub scale: f64,
    pub with_image: bool,
}

impl Default for PageSpec {
    fn default() -> Self {
        Self {
            seed: 1,
            scale: 1.0,
            with_image: false,
        }
    }
}

struct Canvas {
    raster: Raster,
    scale: f64,
    ink: Option<Rect>,
}

impl Canvas {
    fn new(scale: f64) -> Self {
        let w = (DESIGN_WIDTH * scale).round() as u32;
        let h = (DESIGN_HEIGHT * scale).round() as u32;
        Self {
            raster: Raster::new(w, h).expect("positive size"),
            scale,
            ink: None,
        }
    }

    /// Fill a design-space rectangle.
    fn fill(&mut self, x: f64, y: f64, w: f64, h: f64) {
        let s = self.scale;
        let x0 = (x * s).floor().max(0.0) as u32;
        let y0 = (y * s).floor().max(0.0) as u32;
        let x1 = (((x + w) * s).floor() as u32).min(self.raster.width());
        let y1 = (((y + h) * s).floor() as u32).min(self.raster.height());
        if x0 >= x1 || y0 >= y1 {
            return;
        }
        for yy in y0..y1 {
            for xx in x0..x1 {
                self.raster.set(xx, yy, true);
            }
        }
        let r = Rect::new(x0 as f64, y0 as f64, x1 as f64, y1 as f64);
        self.ink = Some(self.ink.map_or(r, |i| i.union(&r)));
    }

    fn take_bounds(&mut self) -> Rect {
        self.ink.take().unwrap_or_default()
    }
}

/// One word of `glyphs` letters starting at `x` on the line whose x-height
/// band starts at `y`. Returns the x just past the word.
fn word(c: &mut Canvas, rng: &mut ChaCha8Rng, x: f64, y: f64, glyphs: usize, size: f64) -> f64 {
    let mut gx = x;
    for _ in 0..glyphs {
        let gw = rng.random_range(5.0..9.0) * size;
        let tall = rng.random_bool(0.3);
        let (top, h) = if tall {
            (y - ASCENDER * size, (X_HEIGHT + ASCENDER) * size)
        } else {
            (y, X_HEIGHT * size)
        };
        c.fill(gx, top, gw, h);
        gx += gw + 2.0 * size;
    }
    gx - 2.0 * size
}

/// Text line from `x0` up to at most `x1`. Returns nothing; ink is tracked
/// by the canvas.
fn text_line(c: &mut Canvas, rng: &mut ChaCha8Rng, x0: f64, x1: f64, y: f64, size: f64) {
    let mut x = x0;
    loop {
        let glyphs = rng.random_range(2..7);
        // Worst case width of the next word.
        if x + glyphs as f64 * 11.0 * size > x1 {
            break;
        }
        x = word(c, rng, x, y, glyphs, size) + 8.0 * size;
    }
}

fn text_block(c: &mut Canvas, rng: &mut ChaCha8Rng, span: (f64, f64), top: f64, lines: usize) -> Rect {
    for i in 0..lines {
        let y = top + ASCENDER + i as f64 * LINE_PITCH;
        let indent = if i == 0 { 20.0 } else { 0.0 };
        let end = if i + 1 == lines {
            span.0 + (span.1 - span.0) * rng.random_range(0.4..0.8)
        } else {
            span.1
        };
        text_line(c, rng, span.0 + indent, end, y, 1.0);
    }
    c.take_bounds()
}

/// Woodcut-like block: solid with scattered small holes.
fn picture(c: &mut Canvas, rng: &mut ChaCha8Rng, x: f64, y: f64, w: f64, h: f64) -> Rect {
    c.fill(x, y, w, h);
    let bounds = c.take_bounds();
    let s = c.scale;
    for _ in 0..((w * h) / 200.0) as usize {
        let hx = ((x + rng.random_range(4.0..w - 6.0)) * s) as u32;
        let hy = ((y + rng.random_range(4.0..h - 6.0)) * s) as u32;
        c.raster.set(hx, hy, false);
    }
    bounds
}

/// A page with its ground-truth regions.
pub fn figure_page(spec: PageSpec) -> SynthPage {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut c = Canvas::new(spec.scale);
    let mut truth = Vec::new();

    // Page number: a few digit-sized glyphs centered at the top.
    let digits = rng.random_range(1..4);
    let mut x = 550.0 - digits as f64 * 8.0;
    for _ in 0..digits {
        c.fill(x, 60.0, 13.0, 18.0);
        x += 16.0;
    }
    truth.push(TruthRegion {
        rect: c.take_bounds(),
        region_type: RegionType::PageNumber,
    });

    let mut y = 140.0;
    let paragraphs = rng.random_range(2..4);
    let mut starts = Vec::new();
    for p in 0..paragraphs {
        let lines = rng.random_range(5..10);
        starts.push(y);
        truth.push(TruthRegion {
            rect: text_block(&mut c, &mut rng, BODY, y, lines),
            region_type: RegionType::Paragraph,
        });
        y += lines as f64 * LINE_PITCH + 50.0;
        if p == 0 && spec.with_image {
            let h = 200.0;
            truth.push(TruthRegion {
                rect: picture(&mut c, &mut rng, BODY.0 + 20.0, y, BODY.1 - BODY.0 - 40.0, h),
                region_type: RegionType::Image,
            });
            y += h + 50.0;
        }
    }

    // Marginal notes beside some paragraphs, alternating sides.
    for (k, &top) in starts.iter().enumerate() {
        if k > 0 && rng.random_bool(0.3) {
            continue;
        }
        let side = if (k + spec.seed as usize).is_multiple_of(2) { LEFT_MARGIN } else { RIGHT_MARGIN };
        let lines = rng.random_range(3..5);
        truth.push(TruthRegion {
            rect: text_block(&mut c, &mut rng, side, top + 10.0, lines),
            region_type: RegionType::Marginalia,
        });
    }

    // Signature mark: two short words at the bottom center.
    let end = word(&mut c, &mut rng, 500.0, 1500.0, 3, 1.0);
    word(&mut c, &mut rng, end + 10.0, 1500.0, 2, 1.0);
    truth.push(TruthRegion {
        rect: c.take_bounds(),
        region_type: RegionType::SignatureMark,
    });

    // Isolated specks well away from the text.
    for _ in 0..rng.random_range(0..6) {
        let sx = rng.random_range(280.0..330.0);
        let sy = rng.random_range(200.0..1400.0);
        c.fill(sx, sy, 2.0, 2.0);
    }
    c.take_bounds();

    SynthPage {
        raster: c.raster,
        truth,
    }
}

/// Profile tuned for the synthetic layout: a signature-mark type restricted
/// to the bottom center, a page-number zone narrowed to the top center and
/// slightly larger text kernels.
pub fn adjusted_profile() -> SegmentationProfile {
    let mut p = SegmentationProfile {
        text_kernel: Kernel::new(25, 17),
        ..SegmentationProfile::default()
    };
    p.rules = vec![
        TypeRule::anywhere(RegionType::Paragraph, model::MIN_AREA_PARAGRAPH),
        TypeRule::anywhere(RegionType::Marginalia, model::MIN_AREA_MARGINALIA).in_zones(model::side_margin_zones(0.25)),
        TypeRule::anywhere(RegionType::PageNumber, model::MIN_AREA_PAGE_NUMBER)
            .in_zones(vec![Rect::new(0.35, 0.0, 0.65, 0.1)])
            .unique(PriorityPosition::Top),
        TypeRule::anywhere(RegionType::SignatureMark, 500.0)
            .in_zones(vec![Rect::new(0.3, 0.88, 0.7, 1.0)])
            .unique(PriorityPosition::Bottom),
    ];
    p.priority = PriorityList(vec![
        RegionType::PageNumber,
        RegionType::SignatureMark,
        RegionType::Marginalia,
        RegionType::Paragraph,
    ]);
    p
}

/// Render a binary page as a noisy gray scan.
pub fn to_gray(r: &Raster, seed: u64) -> GrayImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    GrayImage::from_fn(r.width(), r.height(), |x, y| {
        Luma([if r.get(x, y) {
            rng.random_range(0..70)
        } else {
            rng.random_range(190..=255)
        }])
    })
}

#[derive(Debug, Clone)]
pub struct SkewedBlock {
    pub raster: Raster,
    /// The block's outline in raster coordinates.
    pub region: Polygon,
    pub angle: f64,
    pub lines: usize,
}

/// A block of text lines turned clockwise by `angle` degrees. The line at
/// `heading`, if any, is drawn 1.6 times larger.
pub fn skewed_block(seed: u64, lines: usize, angle: f64, heading: Option<usize>) -> Result<SkewedBlock> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pitch = 34.0;
    let mut heights = Vec::new();
    let mut total = 30.0;
    for i in 0..lines {
        let size = if heading == Some(i) { 1.6 } else { 1.0 };
        heights.push(size);
        total += pitch * size;
    }
    let width = 560.0;
    let mut c = Canvas {
        raster: Raster::new(width as u32, (total + 30.0) as u32)?,
        scale: 1.0,
        ink: None,
    };
    let mut y = 30.0;
    for &size in &heights {
        text_line(&mut c, &mut rng, 30.0, width - 30.0, y + ASCENDER * size, size);
        y += pitch * size;
    }
    let (raster, t) = imaging::rotate_raster(&c.raster, angle)?;
    let (w, h) = (c.raster.width() as f64, c.raster.height() as f64);
    let (rw, rh) = (raster.width() as f64, raster.height() as f64);
    let region = Polygon::new(
        [(0.0, 0.0), (w, 0.0), (w, h), (0.0, h)]
            .into_iter()
            .map(|(x, y)| {
                let q = t.forward(Point::new(x, y));
                Point::new(q.x.clamp(0.0, rw), q.y.clamp(0.0, rh))
            })
            .collect(),
    );
    Ok(SkewedBlock {
        raster,
        region,
        angle,
        lines,
    })
}

/// Write `pages` synthetic pages as `page_NNN.png` into `dir`.
pub fn write_fixture_book(dir: &Path, pages: usize, seed: u64) -> Result<Vec<(PathBuf, SynthPage)>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    (0..pages)
        .map(|i| {
            let spec = PageSpec {
                seed: seed + i as u64,
                scale: 1.0,
                with_image: i % 3 == 1,
            };
            let page = figure_page(spec);
            let path = dir.join(format!("page_{:03}.png", i + 1));
            to_gray(&page.raster, spec.seed)
                .save(&path)
                .map_err(|e| Error::Image {
                    path: path.clone(),
                    message: e.to_string(),
                })?;
            Ok((path, page))
        })
        .collect()
}
