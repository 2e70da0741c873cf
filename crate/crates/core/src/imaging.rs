//! Raster primitives: binarization, downscaling, ROI masking, dilation,
//! connected components with contours, erasing and rotation.
//!
//! Foreground (ink) pixels are stored as `1`, background as `0`.

use std::path::Path;

use image::{DynamicImage, GrayImage, Luma};

use crate::error::{Error, Result};
use crate::geometry::{Point, Polygon, Rect, RotatedRect};

/// Binary bitmap in row-major order.
#[derive(Clone, PartialEq, Eq)]
pub struct Raster {
    width: u32,
    height: u32,
    pixels: Vec<u8>,
}

impl std::fmt::Debug for Raster {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Raster")
            .field("width", &self.width)
            .field("height", &self.height)
            .field("foreground", &self.count_foreground())
            .finish()
    }
}

impl Raster {
    pub fn new(width: u32, height: u32) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::invalid(format!("raster must be non-empty, got {width}x{height}")));
        }
        Ok(Self {
            width,
            height,
            pixels: vec![0; width as usize * height as usize],
        })
    }

    pub fn from_fn(width: u32, height: u32, f: impl Fn(u32, u32) -> bool) -> Result<Self> {
        let mut r = Self::new(width, height)?;
        for y in 0..height {
            for x in 0..width {
                if f(x, y) {
                    r.set(x, y, true);
                }
            }
        }
        Ok(r)
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn size(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    #[inline]
    fn idx(&self, x: u32, y: u32) -> usize {
        y as usize * self.width as usize + x as usize
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> bool {
        self.pixels[self.idx(x, y)] != 0
    }

    /// Out-of-bounds positions read as background.
    #[inline]
    pub fn get_signed(&self, x: i64, y: i64) -> bool {
        x >= 0
            && y >= 0
            && (x as u64) < self.width as u64
            && (y as u64) < self.height as u64
            && self.get(x as u32, y as u32)
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, on: bool) {
        let i = self.idx(x, y);
        self.pixels[i] = on as u8;
    }

    pub fn row(&self, y: u32) -> &[u8] {
        let start = self.idx(0, y);
        &self.pixels[start..start + self.width as usize]
    }

    pub fn count_foreground(&self) -> usize {
        self.pixels.iter().filter(|&&p| p != 0).count()
    }

    pub fn foreground(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        let w = self.width as usize;
        self.pixels
            .iter()
            .enumerate()
            .filter(|(_, &p)| p != 0)
            .map(move |(i, _)| ((i % w) as u32, (i / w) as u32))
    }

    /// Copy of the pixels inside `rect` (pixel-edge coordinates, clipped).
    pub fn crop(&self, rect: Rect) -> Result<(Raster, u32, u32)> {
        let x0 = rect.left.floor().max(0.0) as u32;
        let y0 = rect.top.floor().max(0.0) as u32;
        let x1 = (rect.right.ceil() as i64).clamp(0, self.width as i64) as u32;
        let y1 = (rect.bottom.ceil() as i64).clamp(0, self.height as i64) as u32;
        if x0 >= x1 || y0 >= y1 {
            return Err(Error::invalid("crop rectangle does not intersect the raster"));
        }
        let mut out = Raster::new(x1 - x0, y1 - y0)?;
        for y in y0..y1 {
            let src = &self.row(y)[x0 as usize..x1 as usize];
            let start = out.idx(0, y - y0);
            out.pixels[start..start + src.len()].copy_from_slice(src);
        }
        Ok((out, x0, y0))
    }

    /// Ink as black on white.
    pub fn to_gray_image(&self) -> GrayImage {
        GrayImage::from_fn(self.width, self.height, |x, y| {
            Luma([if self.get(x, y) { 0 } else { 255 }])
        })
    }
}

pub fn load_image(path: &Path) -> Result<DynamicImage> {
    image::open(path).map_err(|e| Error::Image {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

/// Otsu's threshold over a 256-bin histogram: the level `t` maximizing the
/// between-class variance of `{v <= t}` versus `{v > t}`. Returns `None`
/// when fewer than two levels are populated. Ties resolve to the lowest `t`.
pub fn otsu_threshold(hist: &[u64; 256]) -> Option<u8> {
    let total: u64 = hist.iter().sum();
    let populated = hist.iter().filter(|&&c| c > 0).count();
    if total == 0 || populated < 2 {
        return None;
    }
    let sum_all: f64 = hist.iter().enumerate().map(|(v, &c)| v as f64 * c as f64).sum();
    let n = total as f64;
    let mut n0 = 0.0;
    let mut s0 = 0.0;
    let mut best = (f64::MIN, 0u8);
    for (t, &c) in hist.iter().enumerate().take(255) {
        n0 += c as f64;
        s0 += t as f64 * c as f64;
        let n1 = n - n0;
        if n0 == 0.0 || n1 == 0.0 {
            continue;
        }
        // n^2 * w0 * w1 * (mu0 - mu1)^2, rearranged to avoid divisions by n.
        let diff = s0 * n - sum_all * n0;
        let between = diff * diff / (n0 * n1);
        if between > best.0 {
            best = (between, t as u8);
        }
    }
    Some(best.1)
}

pub fn histogram(gray: &GrayImage) -> [u64; 256] {
    let mut hist = [0u64; 256];
    for p in gray.pixels() {
        hist[p.0[0] as usize] += 1;
    }
    hist
}

/// Convert to a binary raster. Color is reduced to luminance first; pixels
/// at or below the threshold become ink. Without an override the global
/// Otsu threshold is used; a single-level image is ink iff it is dark.
pub fn binarize(image: &DynamicImage, threshold: Option<u8>) -> Result<Raster> {
    let gray = image.to_luma8();
    binarize_gray(&gray, threshold)
}

pub fn binarize_gray(gray: &GrayImage, threshold: Option<u8>) -> Result<Raster> {
    let (w, h) = gray.dimensions();
    if w == 0 || h == 0 {
        return Err(Error::invalid("cannot binarize an empty image"));
    }
    let t = match threshold {
        Some(t) => Some(t),
        None => otsu_threshold(&histogram(gray)),
    };
    let mut r = Raster::new(w, h)?;
    match t {
        Some(t) => {
            for (dst, src) in r.pixels.iter_mut().zip(gray.as_raw()) {
                *dst = (*src <= t) as u8;
            }
        }
        None => {
            let level = gray.as_raw()[0];
            if level < 128 {
                r.pixels.fill(1);
            }
        }
    }
    Ok(r)
}

/// Maps working (downscaled) coordinates back to the original image.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaleTransform {
    pub factor_x: f64,
    pub factor_y: f64,
}

impl ScaleTransform {
    pub const IDENTITY: ScaleTransform = ScaleTransform {
        factor_x: 1.0,
        factor_y: 1.0,
    };

    /// Working size and transform for downscaling `width x height` so the
    /// height is at most `target_height`. Never upscales.
    pub fn for_target(width: u32, height: u32, target_height: u32) -> (u32, u32, ScaleTransform) {
        if target_height == 0 || height <= target_height {
            return (width, height, Self::IDENTITY);
        }
        let new_h = target_height;
        let new_w = ((width as f64 * new_h as f64 / height as f64).round() as u32).max(1);
        (
            new_w,
            new_h,
            ScaleTransform {
                factor_x: width as f64 / new_w as f64,
                factor_y: height as f64 / new_h as f64,
            },
        )
    }

    pub fn to_original(&self, p: Point) -> Point {
        Point::new(p.x * self.factor_x, p.y * self.factor_y)
    }

    pub fn to_working(&self, p: Point) -> Point {
        Point::new(p.x / self.factor_x, p.y / self.factor_y)
    }

    pub fn is_identity(&self) -> bool {
        self.factor_x == 1.0 && self.factor_y == 1.0
    }
}

/// Nearest-neighbour downscale to `target_height`; output stays binary.
pub fn resize_to_height(r: &Raster, target_height: u32) -> Result<(Raster, ScaleTransform)> {
    if target_height == 0 {
        return Err(Error::invalid("target height must be positive"));
    }
    let (w, h, t) = ScaleTransform::for_target(r.width, r.height, target_height);
    if t.is_identity() {
        return Ok((r.clone(), t));
    }
    let mut out = Raster::new(w, h)?;
    let xs: Vec<u32> = (0..w)
        .map(|x| (((x as f64 + 0.5) * t.factor_x) as u32).min(r.width - 1))
        .collect();
    for y in 0..h {
        let sy = (((y as f64 + 0.5) * t.factor_y) as u32).min(r.height - 1);
        let src = r.row(sy);
        let start = out.idx(0, y);
        for (x, &sx) in xs.iter().enumerate() {
            out.pixels[start + x] = src[sx as usize];
        }
    }
    Ok((out, t))
}

/// Paint everything outside `roi` as background.
pub fn apply_roi(r: &Raster, roi: Option<Rect>) -> Result<Raster> {
    let Some(roi) = roi else {
        return Ok(r.clone());
    };
    let image = Rect::new(0.0, 0.0, r.width as f64, r.height as f64);
    if roi.intersection(&image).is_none() {
        return Err(Error::invalid(format!("ROI {roi:?} lies outside the image")));
    }
    let mut out = Raster::new(r.width, r.height)?;
    // Keep pixels whose center is inside the ROI.
    roi.to_polygon().fill_spans(r.width, r.height, |y, x0, x1| {
        let start = out.idx(x0, y);
        let src = &r.row(y)[x0 as usize..x1 as usize];
        out.pixels[start..start + src.len()].copy_from_slice(src);
    });
    Ok(out)
}

fn check_kernel(kw: u32, kh: u32) -> Result<()> {
    if kw == 0 || kh == 0 || kw.is_multiple_of(2) || kh.is_multiple_of(2) {
        return Err(Error::invalid(format!("kernel must be odd and >= 1, got {kw}x{kh}")));
    }
    Ok(())
}

/// Binary dilation with a `kernel_width x kernel_height` rectangle centered
/// on each pixel. Separable: a horizontal then a vertical running-count pass.
pub fn dilate(r: &Raster, kernel_width: u32, kernel_height: u32) -> Result<Raster> {
    check_kernel(kernel_width, kernel_height)?;
    let (w, h) = (r.width as usize, r.height as usize);
    let a = (kernel_width / 2) as usize;
    let b = (kernel_height / 2) as usize;

    let mut horiz = vec![0u8; w * h];
    if a == 0 {
        horiz.copy_from_slice(&r.pixels);
    } else {
        for y in 0..h {
            let src = &r.pixels[y * w..(y + 1) * w];
            let dst = &mut horiz[y * w..(y + 1) * w];
            // count of ink in [x - a, x + a]
            let mut count: usize = src[..a.min(w)].iter().map(|&p| p as usize).sum();
            for x in 0..w {
                if x + a < w {
                    count += src[x + a] as usize;
                }
                if x > a {
                    count -= src[x - a - 1] as usize;
                }
                dst[x] = (count > 0) as u8;
            }
        }
    }

    if b == 0 {
        return Ok(Raster {
            width: r.width,
            height: r.height,
            pixels: horiz,
        });
    }
    let mut out = vec![0u8; w * h];
    let mut counts = vec![0u32; w];
    for row in horiz.chunks_exact(w).take(b.min(h)) {
        for (c, &p) in counts.iter_mut().zip(row) {
            *c += p as u32;
        }
    }
    for y in 0..h {
        if y + b < h {
            for (c, &p) in counts.iter_mut().zip(&horiz[(y + b) * w..(y + b + 1) * w]) {
                *c += p as u32;
            }
        }
        if y > b {
            let gone = y - b - 1;
            for (c, &p) in counts.iter_mut().zip(&horiz[gone * w..(gone + 1) * w]) {
                *c -= p as u32;
            }
        }
        for (o, &c) in out[y * w..(y + 1) * w].iter_mut().zip(&counts) {
            *o = (c > 0) as u8;
        }
    }
    Ok(Raster {
        width: r.width,
        height: r.height,
        pixels: out,
    })
}

/// One 8-connected set of ink pixels.
#[derive(Debug, Clone)]
pub struct Component {
    /// Pixel count.
    pub area: usize,
    /// Row-major order.
    pub pixels: Vec<(u32, u32)>,
    /// Straight bounding rectangle in pixel-edge coordinates.
    pub bounds: Rect,
    /// Outer boundary along pixel edges; holes are not traced.
    pub contour: Polygon,
    pub rotated_rect: RotatedRect,
}

const NEIGHBOURS_8: [(i64, i64); 8] = [
    (-1, -1),
    (0, -1),
    (1, -1),
    (-1, 0),
    (1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
];

/// Label 8-connected components. Label 0 is background; components are
/// numbered from 1 in order of their first pixel in raster order.
pub fn label_components(r: &Raster) -> (Vec<u32>, u32) {
    label_with(r, &NEIGHBOURS_8)
}

/// Same as [`label_components`] with 4-connectivity.
pub fn label_components_4(r: &Raster) -> (Vec<u32>, u32) {
    label_with(r, &[(0, -1), (-1, 0), (1, 0), (0, 1)])
}

fn label_with(r: &Raster, neighbours: &[(i64, i64)]) -> (Vec<u32>, u32) {
    let (w, h) = (r.width as i64, r.height as i64);
    let mut labels = vec![0u32; r.pixels.len()];
    let mut next = 0u32;
    let mut stack: Vec<(i64, i64)> = Vec::new();
    for start in 0..r.pixels.len() {
        if r.pixels[start] == 0 || labels[start] != 0 {
            continue;
        }
        next += 1;
        labels[start] = next;
        stack.push(((start as i64) % w, (start as i64) / w));
        while let Some((x, y)) = stack.pop() {
            for &(dx, dy) in neighbours {
                let (nx, ny) = (x + dx, y + dy);
                if nx < 0 || ny < 0 || nx >= w || ny >= h {
                    continue;
                }
                let i = (ny * w + nx) as usize;
                if r.pixels[i] != 0 && labels[i] == 0 {
                    labels[i] = next;
                    stack.push((nx, ny));
                }
            }
        }
    }
    (labels, next)
}

pub fn connected_components(r: &Raster) -> Vec<Component> {
    let (labels, count) = label_components(r);
    let w = r.width as usize;
    let mut pixel_sets: Vec<Vec<(u32, u32)>> = vec![Vec::new(); count as usize];
    for (i, &l) in labels.iter().enumerate() {
        if l != 0 {
            pixel_sets[l as usize - 1].push(((i % w) as u32, (i / w) as u32));
        }
    }
    pixel_sets
        .into_iter()
        .enumerate()
        .map(|(k, pixels)| {
            let label = k as u32 + 1;
            let inside = |x: i64, y: i64| {
                x >= 0
                    && y >= 0
                    && x < r.width as i64
                    && y < r.height as i64
                    && labels[y as usize * w + x as usize] == label
            };
            let (sx, sy) = pixels[0];
            let contour = trace_outer_contour(inside, (sx as i64, sy as i64));
            let bounds = contour.bounding_rect();
            let rotated_rect = contour.min_area_rect();
            Component {
                area: pixels.len(),
                pixels,
                bounds,
                contour,
                rotated_rect,
            }
        })
        .collect()
}

/// Outer boundary of the 8-connected set containing `start`, traced along
/// pixel edges with the set on the right-hand side. `start` must be the
/// first pixel of the set in raster order. Only corner vertices are kept.
pub fn trace_outer_contour(inside: impl Fn(i64, i64) -> bool, start: (i64, i64)) -> Polygon {
    // Directions: east, south, west, north (y down).
    const DIRS: [(i64, i64); 4] = [(1, 0), (0, 1), (-1, 0), (0, -1)];
    // Pixels ahead-left and ahead-right of vertex (x, y) for each heading,
    // as offsets from the vertex to the pixel's top-left corner.
    const AHEAD: [((i64, i64), (i64, i64)); 4] = [
        ((0, -1), (0, 0)),
        ((0, 0), (-1, 0)),
        ((-1, 0), (-1, -1)),
        ((-1, -1), (0, -1)),
    ];

    let origin = start;
    let mut v = origin;
    let mut dir = 0usize;
    let mut points = vec![Point::new(v.0 as f64, v.1 as f64)];
    loop {
        v = (v.0 + DIRS[dir].0, v.1 + DIRS[dir].1);
        if v == origin {
            break;
        }
        let (al, ar) = AHEAD[dir];
        let left = inside(v.0 + al.0, v.1 + al.1);
        let right = inside(v.0 + ar.0, v.1 + ar.1);
        let new_dir = if left {
            (dir + 3) % 4
        } else if right {
            dir
        } else {
            (dir + 1) % 4
        };
        if new_dir != dir {
            points.push(Point::new(v.0 as f64, v.1 as f64));
            dir = new_dir;
        }
    }
    Polygon::new(points)
}

/// Trace the contour of an arbitrary pixel set given as a mask over
/// `width x height`; the mask must be a single 8-connected set.
pub fn contour_of_mask(mask: &Raster) -> Option<Polygon> {
    let (x, y) = mask.foreground().next()?;
    Some(trace_outer_contour(
        |x, y| mask.get_signed(x, y),
        (x as i64, y as i64),
    ))
}

/// Shape removed from a raster.
#[derive(Debug, Clone, PartialEq)]
pub enum EraseShape {
    Contour(Polygon),
    StraightRect(Rect),
    RotatedRect(RotatedRect),
}

impl EraseShape {
    pub fn to_polygon(&self) -> Polygon {
        match self {
            EraseShape::Contour(p) => p.clone(),
            EraseShape::StraightRect(r) => r.to_polygon(),
            EraseShape::RotatedRect(r) => r.to_polygon(),
        }
    }
}

pub fn erase_pixels(r: &Raster, shape: &EraseShape) -> Raster {
    let mut out = r.clone();
    erase_in_place(&mut out, shape);
    out
}

pub fn erase_in_place(r: &mut Raster, shape: &EraseShape) {
    let poly = shape.to_polygon();
    let w = r.width as usize;
    let pixels = &mut r.pixels;
    poly.fill_spans(r.width, r.height, |y, x0, x1| {
        let row = y as usize * w;
        pixels[row + x0 as usize..row + x1 as usize].fill(0);
    });
}

/// Rotation about the image center onto an enlarged canvas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationTransform {
    pub angle: f64,
    pub source_center: Point,
    pub target_center: Point,
}

impl RotationTransform {
    fn rotate(p: Point, deg: f64) -> Point {
        let (s, c) = deg.to_radians().sin_cos();
        Point::new(p.x * c - p.y * s, p.x * s + p.y * c)
    }

    /// Input coordinates to rotated-canvas coordinates.
    pub fn forward(&self, p: Point) -> Point {
        Self::rotate(p - self.source_center, self.angle) + self.target_center
    }

    /// Rotated-canvas coordinates back to input coordinates.
    pub fn inverse(&self, q: Point) -> Point {
        Self::rotate(q - self.target_center, -self.angle) + self.source_center
    }
}

/// Rotate by `angle` degrees (positive turns +x towards +y, i.e. clockwise
/// on screen). The canvas grows to hold the whole rotated input.
pub fn rotate_raster(r: &Raster, angle: f64) -> Result<(Raster, RotationTransform)> {
    if !angle.is_finite() || angle.abs() > 45.0 {
        return Err(Error::invalid(format!("rotation angle {angle} outside [-45, 45]")));
    }
    let (w, h) = (r.width as f64, r.height as f64);
    let (s, c) = angle.to_radians().sin_cos();
    let nw = ((w * c.abs() + h * s.abs()) - 1e-9).ceil().max(1.0) as u32;
    let nh = ((w * s.abs() + h * c.abs()) - 1e-9).ceil().max(1.0) as u32;
    let t = RotationTransform {
        angle,
        source_center: Point::new(w / 2.0, h / 2.0),
        target_center: Point::new(nw as f64 / 2.0, nh as f64 / 2.0),
    };
    if angle == 0.0 {
        return Ok((r.clone(), t));
    }
    let mut out = Raster::new(nw, nh)?;
    for y in 0..nh {
        for x in 0..nw {
            let p = t.inverse(Point::new(x as f64 + 0.5, y as f64 + 0.5));
            if r.get_signed(p.x.floor() as i64, p.y.floor() as i64) {
                out.set(x, y, true);
            }
        }
    }
    Ok((out, t))
}
