//! BRISK binary descriptors.

use std::fmt;

use crate::error::{Error, Result};
use crate::features::detect::Keypoint;
use crate::features::pattern::{pattern, DESCRIPTOR_BITS, POINTS};
use crate::image::{PixelKind, RasterImage};

/// 512 comparison bits. Bit `i` is bit `i % 8` (least significant first)
/// of byte `i / 8` in the byte form.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct BinaryDescriptor {
    words: [u64; 8],
}

impl BinaryDescriptor {
    pub const BITS: usize = DESCRIPTOR_BITS;

    pub fn zeros() -> Self {
        Self::default()
    }

    pub fn ones() -> Self {
        BinaryDescriptor { words: [u64::MAX; 8] }
    }

    pub fn bit(&self, i: usize) -> bool {
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn set_bit(&mut self, i: usize, value: bool) {
        let mask = 1u64 << (i % 64);
        if value {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    pub fn words(&self) -> &[u64; 8] {
        &self.words
    }

    pub fn from_words(words: [u64; 8]) -> Self {
        BinaryDescriptor { words }
    }

    pub fn to_bytes(&self) -> [u8; 64] {
        let mut out = [0u8; 64];
        for (k, w) in self.words.iter().enumerate() {
            out[k * 8..k * 8 + 8].copy_from_slice(&w.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8; 64]) -> Self {
        let mut words = [0u64; 8];
        for (k, w) in words.iter_mut().enumerate() {
            *w = u64::from_le_bytes(bytes[k * 8..k * 8 + 8].try_into().expect("8 bytes"));
        }
        BinaryDescriptor { words }
    }

    /// Lowercase hex of the byte form.
    pub fn to_hex(&self) -> String {
        self.to_bytes().iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn from_hex(text: &str) -> Result<Self> {
        if text.len() != 128 || !text.is_ascii() {
            return Err(Error::param(format!("descriptor hex must be 128 digits, got {}", text.len())));
        }
        let mut bytes = [0u8; 64];
        for (k, b) in bytes.iter_mut().enumerate() {
            *b = u8::from_str_radix(&text[2 * k..2 * k + 2], 16)
                .map_err(|_| Error::param(format!("invalid hex digit pair at {}", 2 * k)))?;
        }
        Ok(Self::from_bytes(&bytes))
    }

    pub fn count_ones(&self) -> u32 {
        self.words.iter().map(|w| w.count_ones()).sum()
    }
}

impl fmt::Debug for BinaryDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BinaryDescriptor({})", self.to_hex())
    }
}

/// Summed-area table with one zero row and column in front.
struct Integral {
    width: usize,
    height: usize,
    sums: Vec<f64>,
}

impl Integral {
    fn new(gray: &RasterImage) -> Self {
        let (w, h) = (gray.width(), gray.height());
        let mut sums = vec![0.0; (w + 1) * (h + 1)];
        for y in 0..h {
            let mut row = 0.0;
            for x in 0..w {
                row += gray.get(x, y) as f64;
                sums[(y + 1) * (w + 1) + x + 1] = sums[y * (w + 1) + x + 1] + row;
            }
        }
        Integral {
            width: w,
            height: h,
            sums,
        }
    }

    /// Integral of the piecewise-constant image over `[-0.5, u) x [-0.5, v)`,
    /// pixel `k` covering `[k - 0.5, k + 0.5)`.
    fn cumulative(&self, u: f64, v: f64) -> f64 {
        let a = (u + 0.5).clamp(0.0, self.width as f64);
        let b = (v + 0.5).clamp(0.0, self.height as f64);
        let (i, j) = ((a.floor() as usize).min(self.width - 1), (b.floor() as usize).min(self.height - 1));
        let (fx, fy) = (a - i as f64, b - j as f64);
        let stride = self.width + 1;
        let s = |x: usize, y: usize| self.sums[y * stride + x];
        (1.0 - fy) * ((1.0 - fx) * s(i, j) + fx * s(i + 1, j)) + fy * ((1.0 - fx) * s(i, j + 1) + fx * s(i + 1, j + 1))
    }

    /// Mean over the square of half-width `half` centered on `(x, y)`.
    fn box_mean(&self, x: f64, y: f64, half: f64) -> f64 {
        let (x0, x1, y0, y1) = (x - half, x + half, y - half, y + half);
        let total = self.cumulative(x1, y1) - self.cumulative(x0, y1) - self.cumulative(x1, y0) + self.cumulative(x0, y0);
        total / (4.0 * half * half)
    }
}

/// Box half-width with the standard deviation of a Gaussian of `sigma`.
const BOX_PER_SIGMA: f64 = 1.732_050_807_568_877_2;
/// Boxes narrower than this fall back to bilinear sampling.
const MIN_BOX_HALF: f64 = 0.5;

fn bilinear(gray: &RasterImage, x: f64, y: f64) -> f64 {
    let (w, h) = (gray.width(), gray.height());
    let (x0, y0) = (x.floor().max(0.0) as usize, y.floor().max(0.0) as usize);
    let (x1, y1) = ((x0 + 1).min(w - 1), (y0 + 1).min(h - 1));
    let (fx, fy) = (x - x0 as f64, y - y0 as f64);
    let v = |xx: usize, yy: usize| gray.get(xx, yy) as f64;
    (1.0 - fy) * ((1.0 - fx) * v(x0, y0) + fx * v(x1, y0)) + fy * ((1.0 - fx) * v(x0, y1) + fx * v(x1, y1))
}

fn smoothed(gray: &RasterImage, integral: &Integral, x: f64, y: f64, sigma: f64) -> f64 {
    let half = BOX_PER_SIGMA * sigma;
    if half < MIN_BOX_HALF {
        bilinear(gray, x, y)
    } else {
        integral.box_mean(x, y, half)
    }
}

/// Distance from a keypoint the pattern reaches at the given scale,
/// smoothing boxes included.
pub fn pattern_reach(scale: f64) -> f64 {
    let p = pattern();
    p.points
        .iter()
        .map(|q| q.x.hypot(q.y) + (BOX_PER_SIGMA * q.sigma).max(1.0))
        .fold(0.0, f64::max)
        * scale
}

/// Samples the pattern around each keypoint, sets the orientation from the
/// long pairs' mean intensity gradient, and reads 512 short-pair
/// comparisons with the pattern rotated to that orientation. Keypoints
/// whose pattern leaves the image are dropped.
pub fn brisk_describe(gray: &RasterImage, keypoints: &[Keypoint]) -> Result<Vec<(Keypoint, BinaryDescriptor)>> {
    gray.expect_kind(PixelKind::Gray8)?;
    let p = pattern();
    let integral = Integral::new(gray);
    let (w, h) = (gray.width() as f64, gray.height() as f64);
    let mut out = Vec::with_capacity(keypoints.len());
    let mut values = [0.0f64; POINTS];
    for kp in keypoints {
        let reach = pattern_reach(kp.scale);
        if kp.x - reach < -0.5 || kp.y - reach < -0.5 || kp.x + reach > w - 0.5 || kp.y + reach > h - 0.5 {
            continue;
        }
        let t = kp.scale;
        for (v, q) in values.iter_mut().zip(&p.points) {
            *v = smoothed(gray, &integral, kp.x + t * q.x, kp.y + t * q.y, t * q.sigma);
        }
        let (mut gx, mut gy) = (0.0, 0.0);
        for pair in &p.long_pairs {
            let (a, b) = (p.points[pair.i], p.points[pair.j]);
            let (dx, dy) = (a.x - b.x, a.y - b.y);
            let k = (values[pair.i] - values[pair.j]) / (dx * dx + dy * dy);
            gx += k * dx;
            gy += k * dy;
        }
        let mut orientation = gy.atan2(gx);
        if orientation >= std::f64::consts::PI {
            orientation -= 2.0 * std::f64::consts::PI;
        }

        let (sin, cos) = orientation.sin_cos();
        for (v, q) in values.iter_mut().zip(&p.points) {
            let (rx, ry) = (cos * q.x - sin * q.y, sin * q.x + cos * q.y);
            *v = smoothed(gray, &integral, kp.x + t * rx, kp.y + t * ry, t * q.sigma);
        }
        let mut descriptor = BinaryDescriptor::zeros();
        for (bit, pair) in p.short_pairs.iter().enumerate() {
            descriptor.set_bit(bit, values[pair.i] > values[pair.j]);
        }
        out.push((Keypoint { orientation, ..*kp }, descriptor));
    }
    Ok(out)
}

/// One line per keypoint: `x y scale orientation score hex`.
pub fn descriptor_dump(described: &[(Keypoint, BinaryDescriptor)]) -> String {
    let mut text = String::new();
    for (kp, d) in described {
        text.push_str(&format!(
            "{:.6} {:.6} {:.6} {:.6} {:.6} {}\n",
            kp.x,
            kp.y,
            kp.scale,
            kp.orientation,
            kp.score,
            d.to_hex()
        ));
    }
    text
}
