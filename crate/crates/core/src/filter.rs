//! Separable Gaussian smoothing.

use crate::error::{Error, Result};
use crate::image::{PixelKind, RasterImage};

/// Sampled Gaussian of radius `ceil(3 sigma)` normalized to unit sum.
pub fn gaussian_kernel(sigma: f64) -> Result<Vec<f64>> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::param(format!("sigma must be positive, got {sigma}")));
    }
    let radius = (3.0 * sigma).ceil() as i64;
    let weights: Vec<f64> = (-radius..=radius)
        .map(|i| (-((i * i) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = weights.iter().sum();
    Ok(weights.into_iter().map(|w| w / sum).collect())
}

/// Blurs each channel independently with edge replication at the borders.
///
/// The horizontal pass keeps full precision; only the final output is
/// rounded back to 8 bits. Masks are rejected since blurring them leaves
/// the 0/1 domain.
pub fn gaussian_blur(image: &RasterImage, sigma: f64) -> Result<RasterImage> {
    if image.kind() == PixelKind::Mask1 {
        return Err(Error::Unsupported("gaussian_blur on a Mask1 image".into()));
    }
    let kernel = gaussian_kernel(sigma)?;
    let radius = (kernel.len() / 2) as i64;
    let (w, h, c) = (image.width(), image.height(), image.channels());
    let src = image.data();
    let clamp = |v: i64, n: usize| v.clamp(0, n as i64 - 1) as usize;

    let mut horizontal = vec![0f64; w * h * c];
    for y in 0..h {
        let row = &src[y * w * c..(y + 1) * w * c];
        for x in 0..w {
            for ch in 0..c {
                let mut acc = 0.0;
                for (k, weight) in kernel.iter().enumerate() {
                    let sx = clamp(x as i64 + k as i64 - radius, w);
                    acc += weight * row[sx * c + ch] as f64;
                }
                horizontal[(y * w + x) * c + ch] = acc;
            }
        }
    }

    let mut out = vec![0u8; w * h * c];
    for y in 0..h {
        for x in 0..w {
            for ch in 0..c {
                let mut acc = 0.0;
                for (k, weight) in kernel.iter().enumerate() {
                    let sy = clamp(y as i64 + k as i64 - radius, h);
                    acc += weight * horizontal[(sy * w + x) * c + ch];
                }
                out[(y * w + x) * c + ch] = acc.round().clamp(0.0, 255.0) as u8;
            }
        }
    }
    RasterImage::new(w, h, image.kind(), out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rejects_non_positive_sigma() {
        let img = RasterImage::filled(3, 3, PixelKind::Gray8, 1);
        assert!(gaussian_blur(&img, 0.0).is_err());
        assert!(gaussian_blur(&img, -1.0).is_err());
        assert!(gaussian_blur(&img, f64::NAN).is_err());
    }

    #[test]
    fn constant_image_is_unchanged() {
        for kind in [PixelKind::Gray8, PixelKind::Rgb8, PixelKind::Hsv8] {
            let img = RasterImage::filled(9, 6, kind, 173);
            for sigma in [0.3, 1.0, 1.5, 4.0] {
                assert_eq!(gaussian_blur(&img, sigma).unwrap(), img);
            }
        }
    }

    #[test]
    fn single_pixel_image_is_unchanged() {
        let img = RasterImage::new(1, 1, PixelKind::Rgb8, vec![10, 200, 33]).unwrap();
        assert_eq!(gaussian_blur(&img, 2.0).unwrap(), img);
    }

    #[test]
    fn impulse_response_matches_two_dimensional_kernel() {
        // Oracle: the 7x7 kernel sampled directly in 2D and normalized.
        let sigma = 1.0f64;
        let mut kernel2d = [[0f64; 7]; 7];
        let mut total = 0.0;
        for (j, row) in kernel2d.iter_mut().enumerate() {
            for (i, v) in row.iter_mut().enumerate() {
                let (dx, dy) = (i as f64 - 3.0, j as f64 - 3.0);
                *v = (-(dx * dx + dy * dy) / (2.0 * sigma * sigma)).exp();
                total += *v;
            }
        }
        let img = RasterImage::from_fn_gray(7, 7, |x, y| if (x, y) == (3, 3) { 255 } else { 0 });
        let out = gaussian_blur(&img, sigma).unwrap();
        for y in 0..7 {
            for x in 0..7 {
                let expected = (255.0 * kernel2d[y][x] / total).round() as u8;
                assert_eq!(out.get(x, y), expected, "at ({x},{y})");
            }
        }
        assert_eq!(out.get(3, 3), 41);
    }

    fn framed_image(w: usize, h: usize, frame: usize, border: u8, seed: u64) -> RasterImage {
        let mut state = seed | 1;
        RasterImage::from_fn_gray(w, h, |x, y| {
            state = state.wrapping_mul(0x5851F42D4C957F2D).wrapping_add(x as u64 * 31 + y as u64);
            let inside = x >= frame && y >= frame && x + frame < w && y + frame < h;
            if inside { (state >> 56) as u8 } else { border }
        })
    }

    proptest! {
        // With edge replication the mean is only conserved when the border
        // band the kernel can reach is constant, so the frame is constant.
        #[test]
        fn mean_is_preserved_up_to_rounding(
            w in 14usize..40, h in 14usize..40, border in any::<u8>(), seed in any::<u64>(),
            sigma in 0.3f64..1.5,
        ) {
            let radius = (3.0 * sigma).ceil() as usize;
            let img = framed_image(w, h, radius, border, seed);
            let out = gaussian_blur(&img, sigma).unwrap();
            let mean = |im: &RasterImage| im.data().iter().map(|&v| v as f64).sum::<f64>() / (w * h) as f64;
            prop_assert!((mean(&img) - mean(&out)).abs() <= 1.0);
        }
    }
}
