//! Color space conversions.

use crate::error::Result;
use crate::image::{PixelKind, RasterImage};

/// Hexcone HSV of one RGB pixel, every component scaled to `0..=255`.
///
/// Hue covers the full byte: 360 degrees map onto 256 steps and the value is
/// truncated. Saturation is `255 * (max - min) / max`, rounded.
pub fn rgb_pixel_to_hsv([r, g, b]: [u8; 3]) -> [u8; 3] {
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let delta = (max - min) as f64;
    if max == min {
        return [0, 0, max];
    }
    let (r, g, b) = (r as f64, g as f64, b as f64);
    let degrees = if max as f64 == r {
        60.0 * ((g - b) / delta)
    } else if max as f64 == g {
        120.0 + 60.0 * ((b - r) / delta)
    } else {
        240.0 + 60.0 * ((r - g) / delta)
    }
    .rem_euclid(360.0);
    let h = ((degrees * 256.0 / 360.0) as u32).min(255) as u8;
    let s = ((255.0 * delta / max as f64).round() as u32).min(255) as u8;
    [h, s, max]
}

/// Inverse of [`rgb_pixel_to_hsv`] up to 8-bit quantization.
pub fn hsv_pixel_to_rgb([h, s, v]: [u8; 3]) -> [u8; 3] {
    let degrees = h as f64 * 360.0 / 256.0;
    let v = v as f64;
    let chroma = v * s as f64 / 255.0;
    let sector = degrees / 60.0;
    let x = chroma * (1.0 - (sector.rem_euclid(2.0) - 1.0).abs());
    let (r, g, b) = match sector as u32 {
        0 => (chroma, x, 0.0),
        1 => (x, chroma, 0.0),
        2 => (0.0, chroma, x),
        3 => (0.0, x, chroma),
        4 => (x, 0.0, chroma),
        _ => (chroma, 0.0, x),
    };
    let m = v - chroma;
    let q = |c: f64| (c + m).round().clamp(0.0, 255.0) as u8;
    [q(r), q(g), q(b)]
}

/// BT.601 luma `0.299 R + 0.587 G + 0.114 B`, rounded half up.
pub fn rgb_pixel_to_gray([r, g, b]: [u8; 3]) -> u8 {
    // Fixed point with 1e6 denominators keeps the rounding exact.
    let scaled = 299_000 * r as u32 + 587_000 * g as u32 + 114_000 * b as u32;
    ((scaled + 500_000) / 1_000_000) as u8
}

pub fn rgb_to_hsv(image: &RasterImage) -> Result<RasterImage> {
    image.expect_kind(PixelKind::Rgb8)?;
    let data = image
        .data()
        .chunks_exact(3)
        .flat_map(|p| rgb_pixel_to_hsv([p[0], p[1], p[2]]))
        .collect();
    RasterImage::new(image.width(), image.height(), PixelKind::Hsv8, data)
}

pub fn rgb_to_gray(image: &RasterImage) -> Result<RasterImage> {
    image.expect_kind(PixelKind::Rgb8)?;
    let data = image
        .data()
        .chunks_exact(3)
        .map(|p| rgb_pixel_to_gray([p[0], p[1], p[2]]))
        .collect();
    RasterImage::new(image.width(), image.height(), PixelKind::Gray8, data)
}

/// Replicates gray (or scales a mask to 0/255) into three channels.
pub fn to_rgb(image: &RasterImage) -> RasterImage {
    match image.kind() {
        PixelKind::Rgb8 => image.clone(),
        PixelKind::Hsv8 => {
            let data = image
                .data()
                .chunks_exact(3)
                .flat_map(|p| hsv_pixel_to_rgb([p[0], p[1], p[2]]))
                .collect();
            RasterImage::new(image.width(), image.height(), PixelKind::Rgb8, data)
                .expect("same geometry")
        }
        PixelKind::Gray8 | PixelKind::Mask1 => {
            let scale = if image.kind() == PixelKind::Mask1 { 255 } else { 1 };
            let data = image.data().iter().flat_map(|&v| [v * scale; 3]).collect();
            RasterImage::new(image.width(), image.height(), PixelKind::Rgb8, data)
                .expect("same geometry")
        }
    }
}
