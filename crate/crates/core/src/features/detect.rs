//! Scale-space FAST keypoint detection.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::{PixelKind, RasterImage};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Keypoint {
    pub x: f64,
    pub y: f64,
    /// Pattern scaling factor; 1 on the full-resolution layer.
    pub scale: f64,
    /// Radians in `[-pi, pi)`; zero until described.
    pub orientation: f64,
    pub score: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BriskParams {
    /// FAST threshold, 1 to 255.
    pub threshold: u32,
    /// Number of octaves; each adds a full and an intermediate layer.
    pub octaves: u32,
}

impl Default for BriskParams {
    fn default() -> Self {
        BriskParams {
            threshold: 30,
            octaves: 3,
        }
    }
}

impl BriskParams {
    pub fn validate(&self) -> Result<()> {
        if !(1..=255).contains(&self.threshold) {
            return Err(Error::param(format!(
                "threshold must be within 1..=255, got {}",
                self.threshold
            )));
        }
        if self.octaves > 8 {
            return Err(Error::param(format!("octaves must be at most 8, got {}", self.octaves)));
        }
        Ok(())
    }
}

/// Images smaller than this in either dimension have no keypoints.
pub const MIN_DETECT_SIZE: usize = 32;

/// Offsets of the 16-pixel circle of radius 3, clockwise from north.
const CIRCLE: [(i32, i32); 16] = [
    (0, -3),
    (1, -3),
    (2, -2),
    (3, -1),
    (3, 0),
    (3, 1),
    (2, 2),
    (1, 3),
    (0, 3),
    (-1, 3),
    (-2, 2),
    (-3, 1),
    (-3, 0),
    (-3, -1),
    (-2, -2),
    (-1, -3),
];
const ARC: usize = 9;
const BORDER: usize = 3;

#[derive(Debug, Clone)]
pub(crate) struct Layer {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
    /// Size of one layer pixel in full-resolution pixels.
    pub scale: f64,
}

impl Layer {
    /// Full-resolution coordinate of layer coordinate `v`.
    fn to_source(&self, v: f64) -> f64 {
        (v + 0.5) * self.scale - 0.5
    }

    fn from_source(&self, v: f64) -> f64 {
        (v + 0.5) / self.scale - 0.5
    }
}

/// Area-averaging reduction by `factor`; output pixel `x` averages the
/// source interval `[x * factor, (x + 1) * factor)`.
pub(crate) fn area_downsample(src: &Layer, factor: f64) -> Option<Layer> {
    let w = (src.width as f64 / factor).floor() as usize;
    let h = (src.height as f64 / factor).floor() as usize;
    if w == 0 || h == 0 {
        return None;
    }
    let weights = |n: usize| -> Vec<Vec<(usize, f64)>> {
        (0..n)
            .map(|o| {
                let (a, b) = (o as f64 * factor, (o + 1) as f64 * factor);
                (a.floor() as usize..b.ceil() as usize)
                    .map(|k| (k, ((k + 1) as f64).min(b) - (k as f64).max(a)))
                    .filter(|&(_, wgt)| wgt > 0.0)
                    .collect()
            })
            .collect()
    };
    let (wx, wy) = (weights(w), weights(h));
    let mut rows = vec![0.0f64; w * src.height];
    for y in 0..src.height {
        let line = &src.pixels[y * src.width..(y + 1) * src.width];
        for (x, taps) in wx.iter().enumerate() {
            rows[y * w + x] = taps.iter().map(|&(k, wgt)| wgt * line[k] as f64).sum();
        }
    }
    let area = factor * factor;
    let mut pixels = vec![0u8; w * h];
    for (y, taps) in wy.iter().enumerate() {
        for x in 0..w {
            let v: f64 = taps.iter().map(|&(k, wgt)| wgt * rows[k * w + x]).sum();
            pixels[y * w + x] = (v / area + 0.5).floor().clamp(0.0, 255.0) as u8;
        }
    }
    Some(Layer {
        width: w,
        height: h,
        pixels,
        scale: src.scale * factor,
    })
}

/// Layers ordered by scale: 1, 1.5, 2, 3, 4, 6, ... Layers too small for
/// the FAST circle are left out.
pub(crate) fn build_pyramid(gray: &RasterImage, octaves: u32) -> Vec<Layer> {
    let base = Layer {
        width: gray.width(),
        height: gray.height(),
        pixels: gray.data().to_vec(),
        scale: 1.0,
    };
    if octaves == 0 {
        return vec![base];
    }
    let mut layers = Vec::new();
    let mut c = Some(base.clone());
    let mut d = area_downsample(&base, 1.5);
    for _ in 0..octaves {
        let (Some(ci), di) = (c.take(), d.take()) else { break };
        c = area_downsample(&ci, 2.0);
        d = di.as_ref().and_then(|l| area_downsample(l, 2.0));
        layers.push(ci);
        layers.extend(di);
    }
    layers.retain(|l| l.width > 2 * BORDER && l.height > 2 * BORDER);
    layers
}

/// FAST 9-16 response: the largest, over all runs of 9 contiguous circle
/// pixels and both polarities, of the smallest absolute difference to the
/// center along the run. Zero within 3 pixels of the border.
pub(crate) fn fast_score(layer: &Layer, x: usize, y: usize) -> u8 {
    if x < BORDER || y < BORDER || x + BORDER >= layer.width || y + BORDER >= layer.height {
        return 0;
    }
    let w = layer.width as i32;
    let c = layer.pixels[y * layer.width + x] as i32;
    let mut diff = [0i32; 16];
    for (k, &(dx, dy)) in CIRCLE.iter().enumerate() {
        diff[k] = layer.pixels[((y as i32 + dy) * w + x as i32 + dx) as usize] as i32 - c;
    }
    let mut best = 0;
    for start in 0..16 {
        let (mut bright, mut dark) = (i32::MAX, i32::MAX);
        for k in 0..ARC {
            let d = diff[(start + k) % 16];
            bright = bright.min(d);
            dark = dark.min(-d);
        }
        best = best.max(bright).max(dark);
    }
    best as u8
}

/// Scores above `threshold`, zero elsewhere.
pub(crate) fn score_map(layer: &Layer, threshold: u32) -> Vec<u8> {
    let mut scores = vec![0u8; layer.width * layer.height];
    let t = threshold as i32;
    let w = layer.width as i32;
    for y in BORDER..layer.height.saturating_sub(BORDER) {
        for x in BORDER..layer.width.saturating_sub(BORDER) {
            // A run of 9 covers at least two of the four compass pixels.
            let c = layer.pixels[y * layer.width + x] as i32;
            let at = |dx: i32, dy: i32| layer.pixels[((y as i32 + dy) * w + x as i32 + dx) as usize] as i32;
            let compass = [at(0, -3), at(3, 0), at(0, 3), at(-3, 0)];
            let bright = compass.iter().filter(|&&p| p > c + t).count();
            let dark = compass.iter().filter(|&&p| p < c - t).count();
            if bright < 2 && dark < 2 {
                continue;
            }
            let s = fast_score(layer, x, y);
            if s as u32 > threshold {
                scores[y * layer.width + x] = s;
            }
        }
    }
    scores
}

fn bilinear(values: &[u8], w: usize, h: usize, x: f64, y: f64) -> f64 {
    if x < 0.0 || y < 0.0 || x > (w - 1) as f64 || y > (h - 1) as f64 {
        return 0.0;
    }
    let (x0, y0) = (x.floor() as usize, y.floor() as usize);
    let (x1, y1) = ((x0 + 1).min(w - 1), (y0 + 1).min(h - 1));
    let (fx, fy) = (x - x0 as f64, y - y0 as f64);
    let v = |xx: usize, yy: usize| values[yy * w + xx] as f64;
    (1.0 - fy) * ((1.0 - fx) * v(x0, y0) + fx * v(x1, y0)) + fy * ((1.0 - fx) * v(x0, y1) + fx * v(x1, y1))
}

/// Offset of the maximum of the quadratic through a 3x3 patch, or zero if
/// the patch is not peaked.
fn subpixel_offset(s: &[[f64; 3]; 3]) -> (f64, f64) {
    let dx = (s[1][2] - s[1][0]) / 2.0;
    let dy = (s[2][1] - s[0][1]) / 2.0;
    let dxx = s[1][2] - 2.0 * s[1][1] + s[1][0];
    let dyy = s[2][1] - 2.0 * s[1][1] + s[0][1];
    let dxy = (s[2][2] - s[2][0] - s[0][2] + s[0][0]) / 4.0;
    let det = dxx * dyy - dxy * dxy;
    if dxx >= 0.0 || det <= 0.0 {
        return (0.0, 0.0);
    }
    let ox = -(dyy * dx - dxy * dy) / det;
    let oy = -(dxx * dy - dxy * dx) / det;
    if ox.abs() > 1.0 || oy.abs() > 1.0 {
        return (0.0, 0.0);
    }
    (ox, oy)
}

/// Peak of the parabola through three (log2 scale, score) samples, kept
/// within the outer two; `None` if the samples are not peaked.
fn parabola_peak(p: [(f64, f64); 3]) -> Option<f64> {
    let [(x0, y0), (x1, y1), (x2, y2)] = p;
    let d01 = (y1 - y0) / (x1 - x0);
    let d12 = (y2 - y1) / (x2 - x1);
    let a = (d12 - d01) / (x2 - x0);
    if a >= 0.0 {
        return None;
    }
    let b = d01 - a * (x0 + x1);
    Some((-b / (2.0 * a)).clamp(x0, x2))
}

/// BRISK detection: FAST 9-16 scores on every pyramid layer, 3x3 spatial
/// maxima that also reach the interpolated scores of the adjacent layers,
/// refined to sub-pixel position and continuous scale.
///
/// Sorted by score descending, then by layer, row and column.
pub fn brisk_detect(gray: &RasterImage, params: &BriskParams) -> Result<Vec<Keypoint>> {
    gray.expect_kind(PixelKind::Gray8)?;
    params.validate()?;
    if gray.width() < MIN_DETECT_SIZE || gray.height() < MIN_DETECT_SIZE {
        return Ok(Vec::new());
    }
    let layers = build_pyramid(gray, params.octaves);
    let scores: Vec<Vec<u8>> = layers.iter().map(|l| score_map(l, params.threshold)).collect();
    let (fw, fh) = ((gray.width() - 1) as f64, (gray.height() - 1) as f64);

    let mut found: Vec<(u8, usize, usize, usize, Keypoint)> = Vec::new();
    for (li, layer) in layers.iter().enumerate() {
        let (w, h) = (layer.width, layer.height);
        let map = &scores[li];
        let neighbor = |lj: usize, x: usize, y: usize| -> f64 {
            let other = &layers[lj];
            let sx = other.from_source(layer.to_source(x as f64));
            let sy = other.from_source(layer.to_source(y as f64));
            bilinear(&scores[lj], other.width, other.height, sx, sy)
        };
        for y in 1..h - 1 {
            for x in 1..w - 1 {
                let s = map[y * w + x];
                if s == 0 {
                    continue;
                }
                let mut patch = [[0.0; 3]; 3];
                let mut is_max = true;
                for dy in 0..3 {
                    for dx in 0..3 {
                        let n = map[(y + dy - 1) * w + x + dx - 1];
                        patch[dy][dx] = n as f64;
                        let earlier = (dy, dx) < (1, 1);
                        if (dy, dx) != (1, 1) && (n > s || (earlier && n == s)) {
                            is_max = false;
                        }
                    }
                }
                if !is_max {
                    continue;
                }
                let below = (li > 0).then(|| neighbor(li - 1, x, y));
                let above = (li + 1 < layers.len()).then(|| neighbor(li + 1, x, y));
                if below.is_some_and(|b| b > s as f64) || above.is_some_and(|a| a > s as f64) {
                    continue;
                }
                let (ox, oy) = subpixel_offset(&patch);
                let log_scale = match (below, above) {
                    (Some(b), Some(a)) => parabola_peak([
                        (layers[li - 1].scale.log2(), b),
                        (layer.scale.log2(), s as f64),
                        (layers[li + 1].scale.log2(), a),
                    ])
                    .unwrap_or(layer.scale.log2()),
                    _ => layer.scale.log2(),
                };
                let kp = Keypoint {
                    x: layer.to_source(x as f64 + ox).clamp(0.0, fw),
                    y: layer.to_source(y as f64 + oy).clamp(0.0, fh),
                    scale: log_scale.exp2(),
                    orientation: 0.0,
                    score: s as f64,
                };
                found.push((s, li, y, x, kp));
            }
        }
    }
    found.sort_by(|a, b| b.0.cmp(&a.0).then((a.1, a.2, a.3).cmp(&(b.1, b.2, b.3))));
    Ok(found.into_iter().map(|f| f.4).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn layer_from(w: usize, h: usize, mut f: impl FnMut(usize, usize) -> u8) -> Layer {
        Layer {
            width: w,
            height: h,
            pixels: (0..w * h).map(|i| f(i % w, i / w)).collect(),
            scale: 1.0,
        }
    }

    /// Scans every 9-run explicitly.
    fn score_oracle(layer: &Layer, x: usize, y: usize) -> u8 {
        let c = layer.pixels[y * layer.width + x] as i32;
        let ring: Vec<i32> = CIRCLE
            .iter()
            .map(|&(dx, dy)| layer.pixels[(y as i32 + dy) as usize * layer.width + (x as i32 + dx) as usize] as i32)
            .collect();
        let mut best = 0;
        for t in 1..=255 {
            let corner = (0..16).any(|s| {
                (0..ARC).all(|k| ring[(s + k) % 16] >= c + t) || (0..ARC).all(|k| ring[(s + k) % 16] <= c - t)
            });
            if corner {
                best = t;
            }
        }
        best as u8
    }

    #[test]
    fn fast_score_matches_threshold_scan() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..300 {
            let center: u8 = rng.random();
            let layer = layer_from(7, 7, |x, y| if (x, y) == (3, 3) { center } else { rng.random() });
            assert_eq!(fast_score(&layer, 3, 3), score_oracle(&layer, 3, 3));
        }
    }

    #[test]
    fn arc_of_nine_is_a_corner_and_eight_is_not() {
        for (len, expected) in [(9, 190), (8, 0)] {
            let mut layer = layer_from(7, 7, |_, _| 10);
            for &(dx, dy) in &CIRCLE[..len] {
                layer.pixels[((3 + dy) * 7 + 3 + dx) as usize] = 200;
            }
            assert_eq!(fast_score(&layer, 3, 3), expected);
        }
    }

    #[test]
    fn downsample_averages_areas() {
        let l = layer_from(4, 2, |x, _| (x * 10) as u8);
        let half = area_downsample(&l, 2.0).unwrap();
        assert_eq!((half.width, half.height), (2, 1));
        assert_eq!(half.pixels, vec![5, 25]);
        let l = layer_from(3, 3, |x, y| (x + 3 * y) as u8 * 10);
        let third = area_downsample(&l, 1.5).unwrap();
        assert_eq!((third.width, third.height), (2, 2));
        // Top-left output covers [0,1.5)^2: weights 1, .5 / .5, .25.
        let expected = (0.0 + 0.5 * 10.0 + 0.5 * 30.0 + 0.25 * 40.0) / 2.25;
        assert_eq!(third.pixels[0], (expected + 0.5f64).floor() as u8);
    }

    #[test]
    fn pyramid_layers_follow_scale_ladder() {
        let gray = RasterImage::from_fn_gray(96, 96, |x, y| ((x * 7 + y * 13) % 256) as u8);
        let layers = build_pyramid(&gray, 3);
        let scales: Vec<f64> = layers.iter().map(|l| l.scale).collect();
        assert_eq!(scales, [1.0, 1.5, 2.0, 3.0, 4.0, 6.0]);
        assert_eq!((layers[1].width, layers[5].width), (64, 16));
    }

    #[test]
    fn constant_image_has_no_keypoints() {
        let gray = RasterImage::filled(64, 64, PixelKind::Gray8, 128);
        assert!(brisk_detect(&gray, &BriskParams::default()).unwrap().is_empty());
    }

    #[test]
    fn small_images_yield_nothing_and_threshold_is_checked() {
        let gray = RasterImage::from_fn_gray(31, 40, |x, y| ((x ^ y) * 40) as u8);
        assert!(brisk_detect(&gray, &BriskParams::default()).unwrap().is_empty());
        let params = BriskParams { threshold: 0, octaves: 3 };
        assert!(brisk_detect(&gray, &params).is_err());
        let params = BriskParams { threshold: 256, octaves: 3 };
        assert!(brisk_detect(&gray, &params).is_err());
    }

    fn checkerboard() -> RasterImage {
        RasterImage::from_fn_gray(64, 64, |x, y| if (x / 8 + y / 8) % 2 == 0 { 40 } else { 210 })
    }

    #[test]
    fn checkerboard_yields_keypoints() {
        let params = BriskParams { threshold: 30, octaves: 3 };
        assert!(!brisk_detect(&checkerboard(), &params).unwrap().is_empty());
    }

    #[test]
    fn x_junctions_do_not_pass_the_segment_test() {
        // Around a four-cell junction the circle alternates in runs of at
        // most five, so no pixel next to it reaches a nine-pixel arc.
        let layer = layer_from(64, 64, |x, y| if (x / 8 + y / 8) % 2 == 0 { 40 } else { 210 });
        for (x, y) in [(7, 7), (8, 7), (7, 8), (8, 8), (23, 31), (24, 32)] {
            assert_eq!(fast_score(&layer, x, y), 0, "({x}, {y})");
        }
    }

    #[test]
    fn fine_keypoints_sit_near_square_corners() {
        let gray = RasterImage::from_fn_gray(64, 64, |x, y| {
            if (20..44).contains(&x) && (20..44).contains(&y) { 200 } else { 50 }
        });
        let kps = brisk_detect(&gray, &BriskParams::default()).unwrap();
        let corners = [(19.5, 19.5), (43.5, 19.5), (19.5, 43.5), (43.5, 43.5)];
        let fine: Vec<_> = kps.iter().filter(|k| k.scale < 1.25).collect();
        for &(cx, cy) in &corners {
            assert!(fine.iter().any(|k| (k.x - cx).hypot(k.y - cy) <= 2.5), "no keypoint near ({cx}, {cy})");
        }
        for k in fine {
            let d = corners.iter().map(|&(cx, cy)| (k.x - cx).hypot(k.y - cy)).fold(f64::MAX, f64::min);
            assert!(d <= 2.5, "{k:?}");
        }
    }

    #[test]
    fn detection_is_deterministic_and_sorted() {
        let params = BriskParams::default();
        let a = brisk_detect(&checkerboard(), &params).unwrap();
        assert_eq!(a, brisk_detect(&checkerboard(), &params).unwrap());
        assert!(a.windows(2).all(|w| w[0].score >= w[1].score));
        for kp in &a {
            assert!(kp.scale >= 1.0 && kp.scale <= 6.0);
        }
    }
}
