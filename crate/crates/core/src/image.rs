//! The pixel container shared by every pipeline.

use crate::error::{Error, Result};

/// Pixel layout of a [`RasterImage`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PixelKind {
    Rgb8,
    Gray8,
    /// H, S, V each in `0..=255`; hue is full range (360 degrees map to 256 steps).
    Hsv8,
    /// One byte per pixel, every value exactly 0 or 1.
    Mask1,
}

impl PixelKind {
    pub fn channels(self) -> usize {
        match self {
            PixelKind::Rgb8 | PixelKind::Hsv8 => 3,
            PixelKind::Gray8 | PixelKind::Mask1 => 1,
        }
    }
}

/// Row-major 8-bit raster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RasterImage {
    width: usize,
    height: usize,
    kind: PixelKind,
    data: Vec<u8>,
}

impl RasterImage {
    pub fn new(width: usize, height: usize, kind: PixelKind, data: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::param(format!(
                "image dimensions must be positive, got {width}x{height}"
            )));
        }
        let expected = width * height * kind.channels();
        if data.len() != expected {
            return Err(Error::param(format!(
                "{kind:?} {width}x{height} needs {expected} bytes, got {}",
                data.len()
            )));
        }
        if kind == PixelKind::Mask1 {
            if let Some(pos) = data.iter().position(|&v| v > 1) {
                return Err(Error::param(format!(
                    "mask pixel {pos} has value {}, expected 0 or 1",
                    data[pos]
                )));
            }
        }
        Ok(RasterImage {
            width,
            height,
            kind,
            data,
        })
    }

    /// An image with every channel of every pixel set to `value`.
    pub fn filled(width: usize, height: usize, kind: PixelKind, value: u8) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be positive");
        let value = if kind == PixelKind::Mask1 { value.min(1) } else { value };
        RasterImage {
            width,
            height,
            kind,
            data: vec![value; width * height * kind.channels()],
        }
    }

    pub fn from_fn_rgb(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> [u8; 3]) -> Self {
        let mut data = Vec::with_capacity(width * height * 3);
        for y in 0..height {
            for x in 0..width {
                data.extend_from_slice(&f(x, y));
            }
        }
        RasterImage::new(width, height, PixelKind::Rgb8, data).expect("well-formed rgb image")
    }

    pub fn from_fn_gray(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> u8) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        RasterImage::new(width, height, PixelKind::Gray8, data).expect("well-formed gray image")
    }

    pub fn from_fn_mask(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y) as u8);
            }
        }
        RasterImage::new(width, height, PixelKind::Mask1, data).expect("well-formed mask")
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn kind(&self) -> PixelKind {
        self.kind
    }

    pub fn channels(&self) -> usize {
        self.kind.channels()
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn into_data(self) -> Vec<u8> {
        self.data
    }

    pub fn in_bounds(&self, x: i64, y: i64) -> bool {
        x >= 0 && y >= 0 && (x as usize) < self.width && (y as usize) < self.height
    }

    /// Channel values of the pixel at `(x, y)`.
    pub fn pixel(&self, x: usize, y: usize) -> &[u8] {
        let c = self.channels();
        let i = (y * self.width + x) * c;
        &self.data[i..i + c]
    }

    /// First channel of the pixel at `(x, y)`; the value for single-channel kinds.
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[(y * self.width + x) * self.channels()]
    }

    pub(crate) fn set_pixel(&mut self, x: usize, y: usize, value: &[u8]) {
        let c = self.channels();
        let i = (y * self.width + x) * c;
        self.data[i..i + c].copy_from_slice(value);
    }

    pub(crate) fn expect_kind(&self, expected: PixelKind) -> Result<()> {
        if self.kind == expected {
            Ok(())
        } else {
            Err(Error::KindMismatch {
                expected,
                found: self.kind,
            })
        }
    }

    /// Number of set pixels in a mask (or non-zero bytes otherwise).
    pub fn count_nonzero(&self) -> usize {
        self.data.iter().filter(|&&v| v != 0).count()
    }
}
