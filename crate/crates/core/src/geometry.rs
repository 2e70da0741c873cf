//! Planar geometry shared by the pipeline, corrections and line segmentation.
//!
//! Coordinates are continuous with `y` pointing down. Pixel `(i, j)` covers
//! the unit square `[i, i+1) x [j, j+1)`; a pixel belongs to a polygon when
//! its center `(i + 0.5, j + 0.5)` lies inside (even-odd rule). Contours
//! traced from pixel sets run along pixel edges, so filling a traced contour
//! gives back exactly the traced pixels.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn scale(self, k: f64) -> Point {
        Point::new(self.x * k, self.y * k)
    }
}

impl std::ops::Add for Point {
    type Output = Point;

    fn add(self, other: Point) -> Point {
        Point::new(self.x + other.x, self.y + other.y)
    }
}

impl std::ops::Sub for Point {
    type Output = Point;

    fn sub(self, other: Point) -> Point {
        Point::new(self.x - other.x, self.y - other.y)
    }
}

fn cross(o: Point, a: Point, b: Point) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

/// Axis-aligned rectangle, `left <= right` and `top <= bottom`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Rect {
    pub left: f64,
    pub top: f64,
    pub right: f64,
    pub bottom: f64,
}

impl Rect {
    pub const fn new(left: f64, top: f64, right: f64, bottom: f64) -> Self {
        Self {
            left,
            top,
            right,
            bottom,
        }
    }

    pub fn from_xywh(x: f64, y: f64, width: f64, height: f64) -> Self {
        Self::new(x, y, x + width, y + height)
    }

    pub fn width(&self) -> f64 {
        self.right - self.left
    }

    pub fn height(&self) -> f64 {
        self.bottom - self.top
    }

    pub fn area(&self) -> f64 {
        self.width().max(0.0) * self.height().max(0.0)
    }

    pub fn center(&self) -> Point {
        Point::new(
            (self.left + self.right) / 2.0,
            (self.top + self.bottom) / 2.0,
        )
    }

    pub fn contains_rect(&self, other: &Rect) -> bool {
        self.left <= other.left
            && self.top <= other.top
            && other.right <= self.right
            && other.bottom <= self.bottom
    }

    pub fn contains_point(&self, p: Point) -> bool {
        self.left <= p.x && p.x <= self.right && self.top <= p.y && p.y <= self.bottom
    }

    pub fn intersection(&self, other: &Rect) -> Option<Rect> {
        let r = Rect::new(
            self.left.max(other.left),
            self.top.max(other.top),
            self.right.min(other.right),
            self.bottom.min(other.bottom),
        );
        (r.left < r.right && r.top < r.bottom).then_some(r)
    }

    pub fn union(&self, other: &Rect) -> Rect {
        Rect::new(
            self.left.min(other.left),
            self.top.min(other.top),
            self.right.max(other.right),
            self.bottom.max(other.bottom),
        )
    }

    /// Scale both axes independently, e.g. relative zone to absolute pixels.
    pub fn scaled(&self, sx: f64, sy: f64) -> Rect {
        Rect::new(self.left * sx, self.top * sy, self.right * sx, self.bottom * sy)
    }

    pub fn to_polygon(&self) -> Polygon {
        Polygon::new(vec![
            Point::new(self.left, self.top),
            Point::new(self.right, self.top),
            Point::new(self.right, self.bottom),
            Point::new(self.left, self.bottom),
        ])
    }

    pub fn overlaps_horizontally(&self, other: &Rect) -> bool {
        self.left < other.right && other.left < self.right
    }
}

/// Rectangle of arbitrary orientation. `angle` is the direction of the
/// `width` axis in degrees, normalized to `(-90, 90]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RotatedRect {
    pub center: Point,
    pub width: f64,
    pub height: f64,
    pub angle: f64,
}

impl RotatedRect {
    pub fn corners(&self) -> [Point; 4] {
        let (s, c) = self.angle.to_radians().sin_cos();
        let u = Point::new(c * self.width / 2.0, s * self.width / 2.0);
        let v = Point::new(-s * self.height / 2.0, c * self.height / 2.0);
        let m = self.center;
        [
            m - u - v,
            m + u - v,
            m + u + v,
            m - u + v,
        ]
    }

    pub fn to_polygon(&self) -> Polygon {
        Polygon::new(self.corners().to_vec())
    }

    pub fn area(&self) -> f64 {
        self.width * self.height
    }
}

pub fn normalize_angle(mut deg: f64) -> f64 {
    while deg <= -90.0 {
        deg += 180.0;
    }
    while deg > 90.0 {
        deg -= 180.0;
    }
    deg
}

/// Closed polygon; the last vertex connects back to the first.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Polygon {
    pub points: Vec<Point>,
}

impl Polygon {
    pub fn new(points: Vec<Point>) -> Self {
        Self { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    fn edges(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        let n = self.points.len();
        (0..n).map(move |i| (self.points[i], self.points[(i + 1) % n]))
    }

    /// Shoelace area, always non-negative.
    pub fn area(&self) -> f64 {
        if self.points.len() < 3 {
            return 0.0;
        }
        let twice: f64 = self.edges().map(|(a, b)| a.x * b.y - b.x * a.y).sum();
        twice.abs() / 2.0
    }

    pub fn bounding_rect(&self) -> Rect {
        let mut r = Rect::new(f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in &self.points {
            r.left = r.left.min(p.x);
            r.top = r.top.min(p.y);
            r.right = r.right.max(p.x);
            r.bottom = r.bottom.max(p.y);
        }
        if self.points.is_empty() {
            Rect::default()
        } else {
            r
        }
    }

    pub fn centroid(&self) -> Point {
        let n = self.points.len().max(1) as f64;
        let sum = self
            .points
            .iter()
            .fold(Point::default(), |acc, p| acc + *p);
        sum.scale(1.0 / n)
    }

    pub fn map(&self, f: impl Fn(Point) -> Point) -> Polygon {
        Polygon::new(self.points.iter().map(|p| f(*p)).collect())
    }

    pub fn translate(&self, dx: f64, dy: f64) -> Polygon {
        self.map(|p| Point::new(p.x + dx, p.y + dy))
    }

    /// Even-odd containment; points exactly on an edge may go either way.
    pub fn contains(&self, p: Point) -> bool {
        let mut inside = false;
        for (a, b) in self.edges() {
            if (a.y > p.y) != (b.y > p.y) {
                let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
                if p.x < x {
                    inside = !inside;
                }
            }
        }
        inside
    }

    /// Containment that counts the boundary as inside.
    pub fn contains_closed(&self, p: Point) -> bool {
        const EPS: f64 = 1e-9;
        for (a, b) in self.edges() {
            let ab = b - a;
            let ap = p - a;
            let len2 = ab.dot(ab);
            if cross(a, b, p).abs() <= EPS * len2.sqrt().max(1.0) {
                let t = if len2 == 0.0 { 0.0 } else { ap.dot(ab) / len2 };
                if (-EPS..=1.0 + EPS).contains(&t) {
                    return true;
                }
            }
        }
        self.contains(p)
    }

    /// Invoke `span(y, x0, x1)` for every run of pixels `x0..x1` on row `y`
    /// whose centers lie inside the polygon, clipped to `width x height`.
    pub fn fill_spans(&self, width: u32, height: u32, mut span: impl FnMut(u32, u32, u32)) {
        if self.points.len() < 3 || width == 0 || height == 0 {
            return;
        }
        let bounds = self.bounding_rect();
        let y_start = ((bounds.top - 0.5).ceil().max(0.0)) as i64;
        let y_end = ((bounds.bottom - 0.5).ceil().min(height as f64)) as i64;
        if y_start >= y_end {
            return;
        }

        // Edge table: (y_min, y_max, a, b), non-horizontal edges only.
        let mut edges: Vec<(f64, f64, Point, Point)> = self
            .edges()
            .filter(|(a, b)| a.y != b.y)
            .map(|(a, b)| (a.y.min(b.y), a.y.max(b.y), a, b))
            .collect();
        edges.sort_by(|l, r| l.0.total_cmp(&r.0));

        let mut next = 0;
        let mut active: Vec<usize> = Vec::new();
        let mut xs: Vec<f64> = Vec::new();
        for y in y_start..y_end {
            let yc = y as f64 + 0.5;
            while next < edges.len() && edges[next].0 <= yc {
                active.push(next);
                next += 1;
            }
            active.retain(|&i| edges[i].1 > yc);
            xs.clear();
            for &i in &active {
                let (_, _, a, b) = edges[i];
                // Half-open in y: the edge covers yc when min <= yc < max.
                if (a.y <= yc) != (b.y <= yc) {
                    xs.push(a.x + (yc - a.y) * (b.x - a.x) / (b.y - a.y));
                }
            }
            xs.sort_by(f64::total_cmp);
            for pair in xs.chunks_exact(2) {
                let x0 = (pair[0] - 0.5).ceil().max(0.0);
                let x1 = (pair[1] - 0.5).ceil().min(width as f64);
                if x0 < x1 {
                    span(y as u32, x0 as u32, x1 as u32);
                }
            }
        }
    }

    /// Pixel positions covered by the polygon, row-major order.
    pub fn pixels(&self, width: u32, height: u32) -> Vec<(u32, u32)> {
        let mut out = Vec::new();
        self.fill_spans(width, height, |y, x0, x1| {
            out.extend((x0..x1).map(|x| (x, y)));
        });
        out
    }

    pub fn convex_hull(&self) -> Polygon {
        convex_hull(&self.points)
    }

    pub fn min_area_rect(&self) -> RotatedRect {
        min_area_rect(&self.points)
    }

    /// Clip this polygon against a convex polygon (Sutherland-Hodgman).
    pub fn clip_convex(&self, clip: &Polygon) -> Polygon {
        if clip.len() < 3 || self.len() < 3 {
            return Polygon::default();
        }
        // Orientation of the clip polygon decides which side is inside.
        let signed: f64 = clip.edges().map(|(a, b)| a.x * b.y - b.x * a.y).sum();
        let orient = if signed >= 0.0 { 1.0 } else { -1.0 };
        let mut output = self.points.clone();
        for (ca, cb) in clip.edges() {
            if output.is_empty() {
                break;
            }
            let input = std::mem::take(&mut output);
            let inside = |p: Point| orient * cross(ca, cb, p) >= 0.0;
            let n = input.len();
            for i in 0..n {
                let cur = input[i];
                let prev = input[(i + n - 1) % n];
                let (ci, pi) = (inside(cur), inside(prev));
                if ci != pi {
                    output.push(line_intersection(prev, cur, ca, cb));
                }
                if ci {
                    output.push(cur);
                }
            }
        }
        dedup_closed(&mut output);
        Polygon::new(output)
    }
}

fn line_intersection(p1: Point, p2: Point, q1: Point, q2: Point) -> Point {
    let d = (p1.x - p2.x) * (q1.y - q2.y) - (p1.y - p2.y) * (q1.x - q2.x);
    if d == 0.0 {
        return p2;
    }
    let t = ((p1.x - q1.x) * (q1.y - q2.y) - (p1.y - q1.y) * (q1.x - q2.x)) / d;
    Point::new(p1.x + t * (p2.x - p1.x), p1.y + t * (p2.y - p1.y))
}

fn dedup_closed(points: &mut Vec<Point>) {
    points.dedup_by(|a, b| (a.x - b.x).abs() < 1e-9 && (a.y - b.y).abs() < 1e-9);
    while points.len() > 1 {
        let (f, l) = (points[0], points[points.len() - 1]);
        if (f.x - l.x).abs() < 1e-9 && (f.y - l.y).abs() < 1e-9 {
            points.pop();
        } else {
            break;
        }
    }
}

/// Andrew's monotone chain. Collinear points are dropped.
pub fn convex_hull(points: &[Point]) -> Polygon {
    let mut pts: Vec<Point> = points.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup();
    if pts.len() < 3 {
        return Polygon::new(pts);
    }
    let mut lower: Vec<Point> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<Point> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    Polygon::new(lower)
}

/// Minimum-area enclosing rectangle by testing every hull edge direction.
pub fn min_area_rect(points: &[Point]) -> RotatedRect {
    let hull = convex_hull(points);
    let h = &hull.points;
    match h.len() {
        0 => return RotatedRect::default(),
        1 => {
            return RotatedRect {
                center: h[0],
                ..RotatedRect::default()
            }
        }
        _ => {}
    }

    let mut best: Option<(f64, RotatedRect)> = None;
    for i in 0..h.len() {
        let a = h[i];
        let b = h[(i + 1) % h.len()];
        let len = (b - a).dot(b - a).sqrt();
        if len == 0.0 {
            continue;
        }
        let u = (b - a).scale(1.0 / len);
        let v = Point::new(-u.y, u.x);
        let (mut u_min, mut u_max, mut v_min, mut v_max) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
        for p in h {
            let pu = p.dot(u);
            let pv = p.dot(v);
            u_min = u_min.min(pu);
            u_max = u_max.max(pu);
            v_min = v_min.min(pv);
            v_max = v_max.max(pv);
        }
        let area = (u_max - u_min) * (v_max - v_min);
        if best.as_ref().is_none_or(|(a, _)| area < *a - 1e-9) {
            let cu = (u_min + u_max) / 2.0;
            let cv = (v_min + v_max) / 2.0;
            let center = u.scale(cu) + v.scale(cv);
            let rect = oriented(center, u_max - u_min, v_max - v_min, u.y.atan2(u.x).to_degrees());
            best = Some((area, rect));
        }
    }
    best.map(|(_, r)| r).unwrap_or_default()
}

/// Build a rotated rect with `width >= height` and a normalized angle.
fn oriented(center: Point, w: f64, h: f64, angle: f64) -> RotatedRect {
    let (width, height, angle) = if w >= h { (w, h, angle) } else { (h, w, angle + 90.0) };
    RotatedRect {
        center,
        width,
        height,
        angle: normalize_angle(angle),
    }
}

/// Pixels crossed by a polyline, as a 4-connected chain per segment.
/// Only pixels inside `clip` (in pixel units) are reported.
pub fn rasterize_polyline(polyline: &[Point], clip: Rect) -> Vec<(i64, i64)> {
    let mut out = Vec::new();
    if polyline.len() == 1 {
        let p = polyline[0];
        if clip.contains_point(p) {
            out.push((p.x.floor() as i64, p.y.floor() as i64));
        }
    }
    for w in polyline.windows(2) {
        if let Some((a, b)) = clip_segment(w[0], w[1], clip) {
            traverse_grid(a, b, &mut out);
        }
    }
    // Clipped endpoints can sit exactly on the far edge of the clip box.
    out.retain(|&(x, y)| clip.contains_point(Point::new(x as f64 + 0.5, y as f64 + 0.5)));
    out.sort_unstable();
    out.dedup();
    out
}

/// Liang-Barsky segment clipping.
fn clip_segment(a: Point, b: Point, r: Rect) -> Option<(Point, Point)> {
    let d = b - a;
    let (mut t0, mut t1) = (0.0f64, 1.0f64);
    for (p, q) in [
        (-d.x, a.x - r.left),
        (d.x, r.right - a.x),
        (-d.y, a.y - r.top),
        (d.y, r.bottom - a.y),
    ] {
        if p == 0.0 {
            if q < 0.0 {
                return None;
            }
        } else {
            let t = q / p;
            if p < 0.0 {
                t0 = t0.max(t);
            } else {
                t1 = t1.min(t);
            }
        }
    }
    (t0 <= t1).then(|| (a + d.scale(t0), a + d.scale(t1)))
}

/// Amanatides-Woo traversal; consecutive cells share an edge.
fn traverse_grid(a: Point, b: Point, out: &mut Vec<(i64, i64)>) {
    let (mut x, mut y) = (a.x.floor() as i64, a.y.floor() as i64);
    let (xe, ye) = (b.x.floor() as i64, b.y.floor() as i64);
    let d = b - a;
    let step_x = if d.x > 0.0 { 1 } else { -1 };
    let step_y = if d.y > 0.0 { 1 } else { -1 };
    let t_delta_x = if d.x != 0.0 { (1.0 / d.x).abs() } else { f64::INFINITY };
    let t_delta_y = if d.y != 0.0 { (1.0 / d.y).abs() } else { f64::INFINITY };
    let mut t_max_x = if d.x > 0.0 {
        ((x + 1) as f64 - a.x) / d.x
    } else if d.x < 0.0 {
        (x as f64 - a.x) / d.x
    } else {
        f64::INFINITY
    };
    let mut t_max_y = if d.y > 0.0 {
        ((y + 1) as f64 - a.y) / d.y
    } else if d.y < 0.0 {
        (y as f64 - a.y) / d.y
    } else {
        f64::INFINITY
    };
    out.push((x, y));
    let max_steps = (xe - x).abs() + (ye - y).abs();
    for _ in 0..max_steps {
        if t_max_x < t_max_y {
            x += step_x;
            t_max_x += t_delta_x;
        } else {
            y += step_y;
            t_max_y += t_delta_y;
        }
        out.push((x, y));
        if x == xe && y == ye {
            break;
        }
    }
}
