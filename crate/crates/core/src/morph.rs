//! Binary erosion and dilation with square structuring elements.
//!
//! Pixels outside the image count as background, so erosion never keeps a
//! pixel whose structuring element leaves the image.

use crate::error::{Error, Result};
use crate::image::{PixelKind, RasterImage};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MorphOp {
    Erode,
    Dilate,
}

pub fn morph(mask: &RasterImage, op: MorphOp, size: usize) -> Result<RasterImage> {
    mask.expect_kind(PixelKind::Mask1)?;
    if size < 3 || size.is_multiple_of(2) {
        return Err(Error::param(format!(
            "structuring element side must be odd and >= 3, got {size}"
        )));
    }
    let r = size / 2;
    let (w, h) = (mask.width(), mask.height());
    let src = mask.data();

    // Separable: a square element is a row pass followed by a column pass.
    let pass = |input: &[u8], along_x: bool| -> Vec<u8> {
        let mut out = vec![0u8; w * h];
        for y in 0..h {
            for x in 0..w {
                let (pos, len) = if along_x { (x, w) } else { (y, h) };
                let lo = pos as i64 - r as i64;
                let hi = pos + r;
                let at = |p: usize| if along_x { input[y * w + p] } else { input[p * w + x] };
                out[y * w + x] = match op {
                    MorphOp::Erode => {
                        (lo >= 0 && hi < len && (lo as usize..=hi).all(|p| at(p) == 1)) as u8
                    }
                    MorphOp::Dilate => {
                        (lo.max(0) as usize..=hi.min(len - 1)).any(|p| at(p) == 1) as u8
                    }
                };
            }
        }
        out
    };
    let rows = pass(src, true);
    let data = pass(&rows, false);
    RasterImage::new(w, h, PixelKind::Mask1, data)
}

pub fn erode(mask: &RasterImage, size: usize) -> Result<RasterImage> {
    morph(mask, MorphOp::Erode, size)
}

pub fn dilate(mask: &RasterImage, size: usize) -> Result<RasterImage> {
    morph(mask, MorphOp::Dilate, size)
}

/// Erosion followed by dilation.
pub fn open(mask: &RasterImage, size: usize) -> Result<RasterImage> {
    dilate(&erode(mask, size)?, size)
}

pub fn complement(mask: &RasterImage) -> Result<RasterImage> {
    mask.expect_kind(PixelKind::Mask1)?;
    let data = mask.data().iter().map(|&v| 1 - v).collect();
    RasterImage::new(mask.width(), mask.height(), PixelKind::Mask1, data)
}

/// Sets every background pixel not 4-connected to the image border.
pub fn fill_holes(mask: &RasterImage) -> Result<RasterImage> {
    mask.expect_kind(PixelKind::Mask1)?;
    let (w, h) = (mask.width(), mask.height());
    let src = mask.data();
    let mut outside = vec![false; w * h];
    let mut stack = Vec::new();
    for y in 0..h {
        for x in 0..w {
            if (x == 0 || y == 0 || x == w - 1 || y == h - 1) && src[y * w + x] == 0 {
                outside[y * w + x] = true;
                stack.push((x, y));
            }
        }
    }
    while let Some((x, y)) = stack.pop() {
        let neighbors = [
            (x.wrapping_sub(1), y),
            (x + 1, y),
            (x, y.wrapping_sub(1)),
            (x, y + 1),
        ];
        for (nx, ny) in neighbors {
            if nx < w && ny < h && src[ny * w + nx] == 0 && !outside[ny * w + nx] {
                outside[ny * w + nx] = true;
                stack.push((nx, ny));
            }
        }
    }
    let data = outside.iter().map(|&o| (!o) as u8).collect();
    RasterImage::new(w, h, PixelKind::Mask1, data)
}
