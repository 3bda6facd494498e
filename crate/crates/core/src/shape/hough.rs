//! Gradient-directed Circle Hough Transform.

use serde::{Deserialize, Serialize};

use crate::edges::{canny, sobel, Gradients};
use crate::error::{Error, Result};
use crate::image::{PixelKind, RasterImage};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircleDetection {
    pub cx: f64,
    pub cy: f64,
    pub r: f64,
    /// Edge pixels voting for the center whose distance from it is within
    /// one pixel of the dominant radius.
    pub votes: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HoughParams {
    pub canny_low: u32,
    pub canny_high: u32,
    pub r_min: usize,
    /// Defaults to half the shorter image side.
    pub r_max: Option<usize>,
    /// Defaults to `0.6 * 2 pi * r_min`.
    pub accumulator_threshold: Option<f64>,
    /// Defaults to `2 * r_min`.
    pub min_center_distance: Option<f64>,
}

impl Default for HoughParams {
    fn default() -> Self {
        HoughParams {
            canny_low: 50,
            canny_high: 150,
            r_min: 10,
            r_max: None,
            accumulator_threshold: None,
            min_center_distance: None,
        }
    }
}

/// Parameters with every default filled in for a given image size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct ResolvedHough {
    pub r_min: usize,
    pub r_max: usize,
    pub threshold: f64,
    pub min_distance: f64,
}

impl HoughParams {
    pub(crate) fn resolve(&self, width: usize, height: usize) -> Result<ResolvedHough> {
        let r_max = self.r_max.unwrap_or(width.min(height) / 2);
        if self.r_min < 1 || self.r_min > r_max {
            return Err(Error::param(format!(
                "need 1 <= r_min <= r_max, got r_min={} r_max={r_max}",
                self.r_min
            )));
        }
        if self.canny_low > self.canny_high {
            return Err(Error::param(format!(
                "canny low threshold {} exceeds high threshold {}",
                self.canny_low, self.canny_high
            )));
        }
        let threshold = self
            .accumulator_threshold
            .unwrap_or(0.6 * std::f64::consts::TAU * self.r_min as f64);
        let min_distance = self.min_center_distance.unwrap_or(2.0 * self.r_min as f64);
        if !(threshold >= 0.0) || !(min_distance >= 0.0) {
            return Err(Error::param("hough thresholds must be non-negative"));
        }
        Ok(ResolvedHough {
            r_min: self.r_min,
            r_max,
            threshold,
            min_distance,
        })
    }
}

/// Runs Canny on `gray` and detects circles from the resulting edges.
pub fn hough_circles(gray: &RasterImage, params: &HoughParams) -> Result<Vec<CircleDetection>> {
    gray.expect_kind(PixelKind::Gray8)?;
    let resolved = params.resolve(gray.width(), gray.height())?;
    let edges = canny(gray, params.canny_low, params.canny_high)?;
    let gradients = sobel(gray)?;
    Ok(circles_from_edges(&edges, &gradients, &resolved))
}

/// Each edge pixel votes once for every cell within one pixel of its
/// gradient line (both senses) between `r_min` and `r_max` away. Every
/// thresholded 3x3 local maximum of the accumulator takes the most common
/// rounded distance of its supporting edge pixels as radius and the number
/// of supporters near that radius as score; the best-scoring centers are
/// kept greedily subject to the minimum spacing.
///
/// A circle of radius `r` scores roughly one vote per pixel of its outline,
/// so thresholds read as a fraction of `2 pi r`.
pub(crate) fn circles_from_edges(
    edges: &RasterImage,
    gradients: &Gradients,
    params: &ResolvedHough,
) -> Vec<CircleDetection> {
    let (w, h) = (edges.width(), edges.height());
    let edge_pixels: Vec<(usize, usize)> = (0..h)
        .flat_map(|y| (0..w).map(move |x| (x, y)))
        .filter(|&(x, y)| edges.get(x, y) == 1)
        .collect();

    // Each edge pixel votes at most once for every cell within one pixel
    // (Chebyshev) of its gradient line, so a cell's count is the number of
    // edge pixels whose line passes next to it.
    let mut acc = vec![0u32; w * h];
    let mut stamp = vec![usize::MAX; w * h];
    for (id, &(x, y)) in edge_pixels.iter().enumerate() {
        vote_cells(x, y, gradients, w, h, params, |cell| {
            if stamp[cell] != id {
                stamp[cell] = id;
                acc[cell] += 1;
            }
        });
    }

    let mut peaks = Vec::new();
    for y in 0..h {
        for x in 0..w {
            let v = acc[y * w + x];
            if v == 0 || (v as f64) < params.threshold {
                continue;
            }
            // Ties resolve to the first cell in raster order.
            let is_max = (-1i64..=1).all(|dy| {
                (-1i64..=1).all(|dx| {
                    let (nx, ny) = (x as i64 + dx, y as i64 + dy);
                    if (dx, dy) == (0, 0) || nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                        return true;
                    }
                    let n = acc[ny as usize * w + nx as usize];
                    let earlier = (dy, dx) < (0, 0);
                    if earlier { v > n } else { v >= n }
                })
            });
            if is_max {
                peaks.push((v, x, y));
            }
        }
    }
    peaks.sort_by(|a, b| b.0.cmp(&a.0).then(a.2.cmp(&b.2)).then(a.1.cmp(&b.1)));

    // Score each peak by the supporters that agree on one radius.
    let mut candidates = Vec::new();
    for (_, x, y) in peaks {
        let (cx, cy) = refine_center(&acc, w, h, x, y);
        let distances: Vec<f64> = edge_pixels
            .iter()
            .filter(|&&(ex, ey)| supports(ex, ey, gradients, w, h, (x, y), params))
            .map(|&(ex, ey)| (ex as f64 - cx).hypot(ey as f64 - cy))
            .collect();
        if let Some((r, votes)) = dominant_radius(&distances, params) {
            if votes as f64 >= params.threshold {
                candidates.push(CircleDetection { cx, cy, r, votes });
            }
        }
    }
    candidates.sort_by(|a, b| {
        b.votes
            .cmp(&a.votes)
            .then(a.cy.total_cmp(&b.cy))
            .then(a.cx.total_cmp(&b.cx))
    });

    let mut circles: Vec<CircleDetection> = Vec::new();
    for c in candidates {
        if circles
            .iter()
            .all(|d| (d.cx - c.cx).hypot(d.cy - c.cy) >= params.min_distance)
        {
            circles.push(c);
        }
    }
    circles
}

/// Calls `f` with every cell voted for by the edge pixel at `(x, y)`, each
/// at most once per sense.
fn vote_cells(x: usize, y: usize, gradients: &Gradients, w: usize, h: usize, params: &ResolvedHough, mut f: impl FnMut(usize)) {
    let i = y * w + x;
    let (gx, gy) = (gradients.gx[i] as f64, gradients.gy[i] as f64);
    let norm = gx.hypot(gy);
    if norm == 0.0 {
        return;
    }
    let (ux, uy) = (gx / norm, gy / norm);
    for sign in [1.0, -1.0] {
        for r in params.r_min..=params.r_max {
            let cx = (x as f64 + sign * r as f64 * ux).round() as i64;
            let cy = (y as f64 + sign * r as f64 * uy).round() as i64;
            if cx < -1 || cy < -1 || cx > w as i64 || cy > h as i64 {
                break;
            }
            for ny in (cy - 1).max(0)..=(cy + 1).min(h as i64 - 1) {
                for nx in (cx - 1).max(0)..=(cx + 1).min(w as i64 - 1) {
                    f(ny as usize * w + nx as usize);
                }
            }
        }
    }
}

/// Whether the edge pixel at `(x, y)` voted for `cell`.
fn supports(x: usize, y: usize, gradients: &Gradients, w: usize, h: usize, cell: (usize, usize), params: &ResolvedHough) -> bool {
    let i = y * w + x;
    let (gx, gy) = (gradients.gx[i] as f64, gradients.gy[i] as f64);
    let norm = gx.hypot(gy);
    let (dx, dy) = (cell.0 as f64 - x as f64, cell.1 as f64 - y as f64);
    // Cheap rejection: voted cells lie within 1.5 * sqrt(2) of the line.
    if norm == 0.0 || (dx * gy - dy * gx).abs() / norm > 2.2 {
        return false;
    }
    let target = cell.1 * w + cell.0;
    let mut hit = false;
    vote_cells(x, y, gradients, w, h, params, |c| hit |= c == target);
    hit
}
/// Vote-weighted centroid of the 3x3 neighborhood.
fn refine_center(acc: &[u32], w: usize, h: usize, x: usize, y: usize) -> (f64, f64) {
    let (mut sx, mut sy, mut total) = (0.0, 0.0, 0.0);
    for ny in y.saturating_sub(1)..=(y + 1).min(h - 1) {
        for nx in x.saturating_sub(1)..=(x + 1).min(w - 1) {
            let v = acc[ny * w + nx] as f64;
            sx += v * nx as f64;
            sy += v * ny as f64;
            total += v;
        }
    }
    (sx / total, sy / total)
}

/// Mode of the rounded distances, refined by the mean of the distances
/// within one pixel of it, and the number of those distances.
fn dominant_radius(distances: &[f64], params: &ResolvedHough) -> Option<(f64, u32)> {
    let mut histogram = vec![0u32; params.r_max + 2];
    let in_range: Vec<f64> = distances
        .iter()
        .copied()
        .filter(|&d| d >= params.r_min as f64 - 0.5 && d < params.r_max as f64 + 0.5)
        .collect();
    for &d in &in_range {
        histogram[d.round() as usize] += 1;
    }
    let (mode, &count) = histogram
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))?;
    if count == 0 {
        return None;
    }
    let near: Vec<f64> = in_range
        .into_iter()
        .filter(|d| (d - mode as f64).abs() <= 1.0)
        .collect();
    let r = near.iter().sum::<f64>() / near.len() as f64;
    Some((r.clamp(params.r_min as f64, params.r_max as f64), near.len() as u32))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filter::gaussian_blur;

    fn disks(w: usize, h: usize, disks: &[(f64, f64, f64)]) -> RasterImage {
        let img = RasterImage::from_fn_gray(w, h, |x, y| {
            let inside = disks
                .iter()
                .any(|&(cx, cy, r)| (x as f64 - cx).hypot(y as f64 - cy) <= r);
            if inside { 220 } else { 30 }
        });
        gaussian_blur(&img, 1.5).unwrap()
    }

    #[test]
    fn blank_image_has_no_circles() {
        let img = RasterImage::filled(64, 64, PixelKind::Gray8, 128);
        assert!(hough_circles(&img, &HoughParams::default()).unwrap().is_empty());
    }

    #[test]
    fn inverted_radius_range_is_rejected() {
        let img = RasterImage::filled(64, 64, PixelKind::Gray8, 128);
        let params = HoughParams { r_min: 20, r_max: Some(10), ..HoughParams::default() };
        assert!(hough_circles(&img, &params).is_err());
    }

    #[test]
    fn finds_single_disk() {
        let img = disks(100, 100, &[(50.0, 50.0, 20.0)]);
        let found = hough_circles(&img, &HoughParams::default()).unwrap();
        assert_eq!(found.len(), 1, "{found:?}");
        let c = found[0];
        assert!((c.cx - 50.0).abs() <= 2.0 && (c.cy - 50.0).abs() <= 2.0, "{c:?}");
        assert!((c.r - 20.0).abs() <= 2.0, "{c:?}");
    }

    #[test]
    fn finds_two_disks() {
        let img = disks(100, 100, &[(25.0, 25.0, 10.0), (75.0, 75.0, 12.0)]);
        let mut found = hough_circles(&img, &HoughParams::default()).unwrap();
        assert_eq!(found.len(), 2, "{found:?}");
        found.sort_by(|a, b| a.cx.partial_cmp(&b.cx).unwrap());
        for (c, (x, y, r)) in found.iter().zip([(25.0, 25.0, 10.0), (75.0, 75.0, 12.0)]) {
            assert!((c.cx - x).abs() <= 2.0 && (c.cy - y).abs() <= 2.0, "{c:?}");
            assert!((c.r - r).abs() <= 2.0, "{c:?}");
        }
    }

    #[test]
    fn detections_respect_threshold_and_spacing() {
        let img = disks(
            160,
            120,
            &[(30.0, 30.0, 14.0), (60.0, 40.0, 18.0), (120.0, 80.0, 25.0), (40.0, 90.0, 11.0)],
        );
        let params = HoughParams::default();
        let resolved = params.resolve(160, 120).unwrap();
        let found = hough_circles(&img, &params).unwrap();
        assert!(!found.is_empty());
        for (i, a) in found.iter().enumerate() {
            assert!(a.votes as f64 >= resolved.threshold);
            assert!(a.r >= resolved.r_min as f64 && a.r <= resolved.r_max as f64);
            for b in &found[i + 1..] {
                assert!((a.cx - b.cx).hypot(a.cy - b.cy) >= resolved.min_distance);
                assert!(a.votes >= b.votes);
            }
        }
    }
}
