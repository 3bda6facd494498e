//! Circle and polygon detection.

mod classify;
mod hough;
mod simplify;

pub use classify::{classify_polygon, ClassifyParams, ShapeKind};
pub use hough::{hough_circles, CircleDetection, HoughParams};
pub use simplify::{
    douglas_peucker, douglas_peucker_closed, douglas_peucker_closed_indices, douglas_peucker_indices,
};

use serde::{Deserialize, Serialize};

use crate::contours::{find_contours, Contour};
use crate::convert::rgb_to_gray;
use crate::draw::{annotate, Overlay, Rgb, Shape};
use crate::edges::{canny, sobel};
use crate::error::{Error, Result};
use crate::filter::gaussian_blur;
use crate::geometry::Point;
use crate::image::{PixelKind, RasterImage};
use crate::morph::{dilate, fill_holes};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ShapeParams {
    pub sigma: f64,
    pub canny_low: u32,
    pub canny_high: u32,
    pub r_min: usize,
    pub r_max: Option<usize>,
    pub accumulator_threshold: Option<f64>,
    pub min_center_distance: Option<f64>,
    pub min_area: f64,
    /// Simplification tolerance as a fraction of the contour perimeter.
    pub dp_epsilon_factor: f64,
    pub right_angle_cos_tol: f64,
    pub square_ratio_tol: f64,
    pub stroke_thickness: u32,
}

impl Default for ShapeParams {
    fn default() -> Self {
        let hough = HoughParams::default();
        let classify = ClassifyParams::default();
        ShapeParams {
            sigma: 1.5,
            canny_low: hough.canny_low,
            canny_high: hough.canny_high,
            r_min: hough.r_min,
            r_max: hough.r_max,
            accumulator_threshold: hough.accumulator_threshold,
            min_center_distance: hough.min_center_distance,
            min_area: 100.0,
            dp_epsilon_factor: 0.02,
            right_angle_cos_tol: classify.right_angle_cos_tol,
            square_ratio_tol: classify.square_ratio_tol,
            stroke_thickness: 2,
        }
    }
}

impl ShapeParams {
    pub fn hough(&self) -> HoughParams {
        HoughParams {
            canny_low: self.canny_low,
            canny_high: self.canny_high,
            r_min: self.r_min,
            r_max: self.r_max,
            accumulator_threshold: self.accumulator_threshold,
            min_center_distance: self.min_center_distance,
        }
    }

    pub fn classify(&self) -> ClassifyParams {
        ClassifyParams {
            right_angle_cos_tol: self.right_angle_cos_tol,
            square_ratio_tol: self.square_ratio_tol,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.min_area < 0.0 || !self.min_area.is_finite() {
            return Err(Error::param("min_area must be a non-negative number"));
        }
        if !(self.dp_epsilon_factor >= 0.0) || !self.dp_epsilon_factor.is_finite() {
            return Err(Error::param("dp_epsilon_factor must be a non-negative number"));
        }
        if !(self.right_angle_cos_tol >= 0.0) || !(self.square_ratio_tol >= 0.0) {
            return Err(Error::param("classification tolerances must be non-negative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolyShape {
    pub label: ShapeKind,
    pub vertices: Vec<Point>,
    pub source: Contour,
}

impl PolyShape {
    pub fn centroid(&self) -> Point {
        let (x, y) = self.source.centroid();
        Point::new(x, y)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShapeDetectionResult {
    pub circles: Vec<CircleDetection>,
    pub polygons: Vec<PolyShape>,
    pub annotated: RasterImage,
}

pub fn highlight(kind: ShapeKind) -> Rgb {
    match kind {
        ShapeKind::Circle => [255, 0, 0],
        ShapeKind::Triangle => [0, 0, 255],
        ShapeKind::Square => [0, 255, 0],
        ShapeKind::Rectangle => [255, 255, 0],
        ShapeKind::Other => [255, 0, 255],
    }
}

/// Grayscale, blur, Canny, then circles by Hough and polygons from the
/// filled edge mask.
///
/// A polygon labelled Other whose centroid lies inside a detected circle is
/// taken to be that circle's own outline and dropped.
pub fn detect_shapes(image: &RasterImage, wanted: &[ShapeKind], params: &ShapeParams) -> Result<ShapeDetectionResult> {
    image.expect_kind(PixelKind::Rgb8)?;
    if wanted.is_empty() {
        return Err(Error::param("at least one shape must be selected"));
    }
    params.validate()?;
    let resolved = params.hough().resolve(image.width(), image.height())?;
    let classify = params.classify();
    let wants = |k: ShapeKind| wanted.contains(&k);

    let gray = gaussian_blur(&rgb_to_gray(image)?, params.sigma)?;
    let edges = canny(&gray, params.canny_low, params.canny_high)?;

    let circles = if wants(ShapeKind::Circle) || wants(ShapeKind::Other) {
        hough::circles_from_edges(&edges, &sobel(&gray)?, &resolved)
    } else {
        Vec::new()
    };

    let regions = fill_holes(&dilate(&edges, 3)?)?;
    let mut polygons = Vec::new();
    for contour in find_contours(&regions, params.min_area)? {
        let Some((label, vertices)) = approximate(&contour, params, &classify)? else {
            continue;
        };
        let poly = PolyShape {
            label,
            vertices,
            source: contour,
        };
        if label == ShapeKind::Other {
            let c = poly.centroid();
            if circles.iter().any(|d| c.distance(Point::new(d.cx, d.cy)) <= d.r) {
                continue;
            }
        }
        if wants(label) {
            polygons.push(poly);
        }
    }
    let circles = if wants(ShapeKind::Circle) { circles } else { Vec::new() };

    let mut overlay = Overlay::new();
    for c in &circles {
        overlay.push(
            Shape::Circle {
                cx: c.cx,
                cy: c.cy,
                r: c.r,
            },
            highlight(ShapeKind::Circle),
            params.stroke_thickness,
        )?;
    }
    for p in &polygons {
        let pts = p.vertices.iter().map(|v| v.as_tuple()).collect();
        overlay.push(Shape::Polygon(pts), highlight(p.label), params.stroke_thickness)?;
    }
    Ok(ShapeDetectionResult {
        circles,
        annotated: annotate(image, &overlay)?,
        polygons,
    })
}

/// Edges shorter than this many simplification tolerances, plus twice the
/// blur sigma, are corners that blurring and edge detection rounded off.
const SHORT_EDGE_FACTOR: f64 = 2.5;

/// Fraction of each side, at either end, left out of the line fit.
const SIDE_TRIM: f64 = 0.2;

/// Repeatedly replaces the two ends of the shortest edge below `min_len`
/// with the contour point between them farthest from `center`, while more
/// than three vertices remain. `indices` is sorted and stays sorted.
fn collapse_short_edges(indices: &mut Vec<usize>, points: &[Point], center: Point, min_len: f64) {
    let n = points.len();
    while indices.len() > 3 {
        let m = indices.len();
        let shortest = (0..m)
            .map(|k| (k, points[indices[k]].distance(points[indices[(k + 1) % m]])))
            .filter(|&(_, len)| len < min_len)
            .min_by(|a, b| a.1.total_cmp(&b.1));
        let Some((k, _)) = shortest else { break };
        let (from, to) = (indices[k], indices[(k + 1) % m]);
        let span = (to + n - from) % n;
        let tip = (0..=span)
            .map(|d| (from + d) % n)
            .max_by(|&a, &b| points[a].distance(center).total_cmp(&points[b].distance(center)).then(b.cmp(&a)))
            .expect("span is non-empty");
        indices.retain(|&i| i != from && i != to);
        indices.push(tip);
        indices.sort_unstable();
    }
}

/// Sides meeting at less than this angle (radians) are one side.
const MERGE_ANGLE: f64 = 20.0 * std::f64::consts::PI / 180.0;

/// Line fitted to the middle of the contour run from `points[a]` to
/// `points[b]`, directed from `a` towards `b`.
fn fit_side(points: &[Point], a: usize, b: usize) -> Option<(Point, Point)> {
    let n = points.len();
    let span = (b + n - a) % n;
    let skip = (span as f64 * SIDE_TRIM).ceil() as usize;
    let side: Vec<Point> = (skip..=span.saturating_sub(skip)).map(|d| points[(a + d) % n]).collect();
    if side.len() < 3 {
        return None;
    }
    let (p, u) = fit_line(&side)?;
    let chord = points[b].sub(points[a]);
    Some(if u.dot(chord) < 0.0 { (p, Point::new(-u.x, -u.y)) } else { (p, u) })
}

/// Repeatedly removes the vertex whose two sides have the most similar
/// fitted directions while that turn is below `MERGE_ANGLE`.
fn merge_collinear_sides(indices: &mut Vec<usize>, points: &[Point]) {
    while indices.len() > 3 {
        let m = indices.len();
        let Some(sides) = (0..m)
            .map(|k| fit_side(points, indices[k], indices[(k + 1) % m]))
            .collect::<Option<Vec<_>>>()
        else {
            return;
        };
        let (k, turn) = (0..m)
            .map(|k| {
                let (u, v) = (sides[(k + m - 1) % m].1, sides[k].1);
                (k, u.cross(v).atan2(u.dot(v)).abs())
            })
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("at least one vertex");
        if turn >= MERGE_ANGLE {
            return;
        }
        indices.remove(k);
    }
}

/// Corners as intersections of lines fitted to the middle of each side
/// between consecutive vertices. `None` if a side is too short to fit or
/// adjacent lines are near parallel.
fn fitted_corners(points: &[Point], indices: &[usize]) -> Option<Vec<Point>> {
    let m = indices.len();
    let lines = (0..m)
        .map(|k| fit_side(points, indices[k], indices[(k + 1) % m]))
        .collect::<Option<Vec<_>>>()?;
    (0..m)
        .map(|k| intersect(lines[(k + m - 1) % m], lines[k]))
        .collect()
}

/// Total least squares line through `pts` as (point on line, unit direction).
fn fit_line(pts: &[Point]) -> Option<(Point, Point)> {
    let n = pts.len() as f64;
    let mean = Point::new(
        pts.iter().map(|p| p.x).sum::<f64>() / n,
        pts.iter().map(|p| p.y).sum::<f64>() / n,
    );
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for p in pts {
        let d = p.sub(mean);
        sxx += d.x * d.x;
        sxy += d.x * d.y;
        syy += d.y * d.y;
    }
    if sxx + syy == 0.0 {
        return None;
    }
    let theta = 0.5 * (2.0 * sxy).atan2(sxx - syy);
    Some((mean, Point::new(theta.cos(), theta.sin())))
}

fn intersect((p, u): (Point, Point), (q, v): (Point, Point)) -> Option<Point> {
    let denom = u.cross(v);
    // Lines within about 10 degrees of parallel do not meet reliably.
    if denom.abs() < 0.17 {
        return None;
    }
    let t = q.sub(p).cross(v) / denom;
    Some(Point::new(p.x + t * u.x, p.y + t * u.y))
}

/// Closed simplification of the ring rotated to begin at `anchor`, as
/// sorted indices into `points`.
fn simplify_from(points: &[Point], anchor: usize, epsilon: f64) -> Result<Vec<usize>> {
    let n = points.len();
    let ring: Vec<Point> = points[anchor..].iter().chain(&points[..anchor]).copied().collect();
    let mut indices: Vec<usize> = douglas_peucker_closed_indices(&ring, epsilon)?
        .into_iter()
        .map(|i| (i + anchor) % n)
        .collect();
    indices.sort_unstable();
    Ok(indices)
}

/// Simplifies a closed contour and labels the result. Contours that collapse
/// to fewer than three distinct vertices, or to a degenerate polygon, yield
/// `None`.
fn approximate(
    contour: &Contour,
    shape: &ShapeParams,
    params: &ClassifyParams,
) -> Result<Option<(ShapeKind, Vec<Point>)>> {
    let n = contour.points.len();
    if n < 3 {
        return Ok(None);
    }
    let points: Vec<Point> = contour.points.iter().map(|&p| p.into()).collect();
    // Start at the point farthest from the centroid.
    let (cx, cy) = contour.centroid();
    let center = Point::new(cx, cy);
    let mut anchor = 0;
    for (i, p) in points.iter().enumerate() {
        if p.distance(center) > points[anchor].distance(center) {
            anchor = i;
        }
    }
    let epsilon = shape.dp_epsilon_factor * contour.perimeter();
    let mut indices = simplify_from(&points, anchor, epsilon)?;
    // Restart at each vertex found and keep the sparsest result.
    for start in indices.clone() {
        let candidate = simplify_from(&points, start, epsilon)?;
        if candidate.len() < indices.len() {
            indices = candidate;
        }
    }
    let min_edge = SHORT_EDGE_FACTOR * epsilon + 2.0 * shape.sigma;
    collapse_short_edges(&mut indices, &points, center, min_edge);
    merge_collinear_sides(&mut indices, &points);
    let vertices: Vec<Point> = indices.iter().map(|&i| points[i]).collect();
    let corners = match vertices.len() {
        3 | 4 => fitted_corners(&points, &indices).unwrap_or_else(|| vertices.clone()),
        _ => vertices.clone(),
    };
    match classify_polygon(&corners, params) {
        Ok(label) => Ok(Some((label, vertices))),
        Err(Error::DegeneratePolygon(_)) => Ok(None),
        Err(e) => Err(e),
    }
}
