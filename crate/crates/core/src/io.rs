//! PPM (P6), PGM (P5) and PNG codecs.
//!
//! PPM/PGM round trips are bit-exact. PNG is an interchange convenience that
//! accepts 8-bit gray, gray+alpha, RGB and RGBA (alpha is dropped).

use std::path::Path;

use crate::error::{Error, Result};
use crate::image::{PixelKind, RasterImage};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImageFormat {
    Ppm,
    Pgm,
    Png,
}

impl ImageFormat {
    /// Picks a format from a file extension (`.ppm`, `.pgm`, `.png`).
    pub fn from_path(path: &Path) -> Result<Self> {
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .map(|e| e.to_ascii_lowercase());
        match ext.as_deref() {
            Some("ppm") => Ok(ImageFormat::Ppm),
            Some("pgm") => Ok(ImageFormat::Pgm),
            Some("png") => Ok(ImageFormat::Png),
            _ => Err(Error::Unsupported(format!(
                "cannot infer image format from '{}' (expected .ppm, .pgm or .png)",
                path.display()
            ))),
        }
    }

    /// Sniffs the format from the leading magic bytes.
    pub fn detect(bytes: &[u8]) -> Option<Self> {
        if bytes.starts_with(b"P6") {
            Some(ImageFormat::Ppm)
        } else if bytes.starts_with(b"P5") {
            Some(ImageFormat::Pgm)
        } else if bytes.starts_with(&[0x89, b'P', b'N', b'G']) {
            Some(ImageFormat::Png)
        } else {
            None
        }
    }
}

pub fn decode(bytes: &[u8], format: ImageFormat) -> Result<RasterImage> {
    match format {
        ImageFormat::Ppm => decode_pnm(bytes, b"P6", PixelKind::Rgb8),
        ImageFormat::Pgm => decode_pnm(bytes, b"P5", PixelKind::Gray8),
        ImageFormat::Png => decode_png(bytes),
    }
}

/// Decodes any supported format, identified by its magic bytes.
pub fn decode_any(bytes: &[u8]) -> Result<RasterImage> {
    let format = ImageFormat::detect(bytes)
        .ok_or_else(|| Error::decode(0, "unrecognized image signature"))?;
    decode(bytes, format)
}

pub fn encode(image: &RasterImage, format: ImageFormat) -> Result<Vec<u8>> {
    match (format, image.kind()) {
        (ImageFormat::Ppm, PixelKind::Rgb8) => Ok(encode_pnm(image, "P6")),
        (ImageFormat::Pgm, PixelKind::Gray8) => Ok(encode_pnm(image, "P5")),
        (ImageFormat::Png, PixelKind::Rgb8 | PixelKind::Gray8) => encode_png(image),
        (format, kind) => Err(Error::Unsupported(format!(
            "cannot encode a {kind:?} image as {format:?}"
        ))),
    }
}

pub fn read_image(path: impl AsRef<Path>) -> Result<RasterImage> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    match ImageFormat::detect(&bytes) {
        Some(format) => decode(&bytes, format),
        None => decode(&bytes, ImageFormat::from_path(path)?),
    }
}

pub fn write_image(path: impl AsRef<Path>, image: &RasterImage) -> Result<()> {
    let path = path.as_ref();
    let bytes = encode(image, ImageFormat::from_path(path)?)?;
    std::fs::write(path, bytes).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

struct HeaderReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl HeaderReader<'_> {
    fn skip_whitespace_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<usize> {
        self.skip_whitespace_and_comments();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::decode(start, format!("expected {what}")));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::decode(start, format!("{what} out of range")))
    }
}

fn decode_pnm(bytes: &[u8], magic: &[u8; 2], kind: PixelKind) -> Result<RasterImage> {
    if !bytes.starts_with(magic) {
        return Err(Error::decode(
            0,
            format!("missing '{}' signature", String::from_utf8_lossy(magic)),
        ));
    }
    let mut header = HeaderReader { bytes, pos: 2 };
    let width = header.number("width")?;
    let height = header.number("height")?;
    let maxval_at = header.pos;
    let maxval = header.number("maxval")?;
    if maxval != 255 {
        return Err(Error::decode(
            maxval_at,
            format!("only maxval 255 is supported, got {maxval}"),
        ));
    }
    if width == 0 || height == 0 {
        return Err(Error::decode(2, format!("empty image {width}x{height}")));
    }
    // Exactly one whitespace byte separates the header from the raster.
    match bytes.get(header.pos) {
        Some(b) if b.is_ascii_whitespace() => header.pos += 1,
        _ => return Err(Error::decode(header.pos, "expected whitespace after maxval")),
    }
    let needed = width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(kind.channels()))
        .ok_or_else(|| Error::decode(2, "image dimensions overflow"))?;
    let payload = &bytes[header.pos..];
    if payload.len() < needed {
        return Err(Error::decode(
            bytes.len(),
            format!(
                "truncated payload: {width}x{height} needs {needed} bytes, found {}",
                payload.len()
            ),
        ));
    }
    RasterImage::new(width, height, kind, payload[..needed].to_vec())
}

fn encode_pnm(image: &RasterImage, magic: &str) -> Vec<u8> {
    let mut out = format!("{magic}\n{} {}\n255\n", image.width(), image.height()).into_bytes();
    out.extend_from_slice(image.data());
    out
}

fn png_error(err: impl std::fmt::Display) -> Error {
    Error::decode(0, format!("png: {err}"))
}

fn decode_png(bytes: &[u8]) -> Result<RasterImage> {
    let mut decoder = png::Decoder::new(std::io::Cursor::new(bytes));
    decoder.set_transformations(png::Transformations::EXPAND | png::Transformations::STRIP_16);
    let mut reader = decoder.read_info().map_err(png_error)?;
    let mut buf = vec![0; reader.output_buffer_size().ok_or_else(|| png_error("image too large"))?];
    let info = reader.next_frame(&mut buf).map_err(png_error)?;
    let (width, height) = (info.width as usize, info.height as usize);
    let buf = &buf[..info.buffer_size()];
    let (kind, data) = match info.color_type {
        png::ColorType::Grayscale => (PixelKind::Gray8, buf.to_vec()),
        png::ColorType::GrayscaleAlpha => (PixelKind::Gray8, buf.iter().step_by(2).copied().collect()),
        png::ColorType::Rgb => (PixelKind::Rgb8, buf.to_vec()),
        png::ColorType::Rgba => (
            PixelKind::Rgb8,
            buf.chunks_exact(4).flat_map(|p| [p[0], p[1], p[2]]).collect(),
        ),
        other => return Err(png_error(format!("unsupported color type {other:?}"))),
    };
    RasterImage::new(width, height, kind, data)
}

fn encode_png(image: &RasterImage) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    {
        let mut encoder = png::Encoder::new(&mut out, image.width() as u32, image.height() as u32);
        encoder.set_color(match image.kind() {
            PixelKind::Gray8 => png::ColorType::Grayscale,
            _ => png::ColorType::Rgb,
        });
        encoder.set_depth(png::BitDepth::Eight);
        let mut writer = encoder
            .write_header()
            .map_err(|e| Error::Unsupported(format!("png: {e}")))?;
        writer
            .write_image_data(image.data())
            .map_err(|e| Error::Unsupported(format!("png: {e}")))?;
    }
    Ok(out)
}
