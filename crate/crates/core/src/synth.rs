//! Synthetic scenes with known geometry, for tests and demos.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::draw::Rgb;
use crate::image::{PixelKind, RasterImage};

/// Solid RGB canvas.
pub fn canvas(width: usize, height: usize, color: Rgb) -> RasterImage {
    RasterImage::from_fn_rgb(width, height, |_, _| color)
}

/// Paints every pixel whose center satisfies `inside`.
pub fn fill_where(image: &mut RasterImage, color: Rgb, mut inside: impl FnMut(f64, f64) -> bool) {
    let (w, h) = (image.width(), image.height());
    for y in 0..h {
        for x in 0..w {
            if inside(x as f64, y as f64) {
                image.set_pixel(x, y, &color);
            }
        }
    }
}

pub fn fill_disk(image: &mut RasterImage, cx: f64, cy: f64, r: f64, color: Rgb) {
    fill_where(image, color, |x, y| (x - cx).powi(2) + (y - cy).powi(2) <= r * r);
}

/// Fills a simple polygon using the even-odd rule at pixel centers.
pub fn fill_polygon(image: &mut RasterImage, vertices: &[(f64, f64)], color: Rgb) {
    fill_where(image, color, |x, y| point_in_polygon(x, y, vertices));
}

fn point_in_polygon(x: f64, y: f64, vertices: &[(f64, f64)]) -> bool {
    let n = vertices.len();
    let mut inside = false;
    for i in 0..n {
        let (x1, y1) = vertices[i];
        let (x2, y2) = vertices[(i + 1) % n];
        if (y1 > y) != (y2 > y) && x < x1 + (y - y1) * (x2 - x1) / (y2 - y1) {
            inside = !inside;
        }
    }
    inside
}

/// Corners of a `w` x `h` rectangle centered on `(cx, cy)` and rotated by
/// `angle` radians, in drawing order.
pub fn rotated_rect(cx: f64, cy: f64, w: f64, h: f64, angle: f64) -> Vec<(f64, f64)> {
    let (s, c) = angle.sin_cos();
    [(-w, -h), (w, -h), (w, h), (-w, h)]
        .iter()
        .map(|&(dx, dy)| (cx + 0.5 * (dx * c - dy * s), cy + 0.5 * (dx * s + dy * c)))
        .collect()
}

/// Regular polygon with `n` vertices on a circle of radius `r`.
pub fn regular_polygon(cx: f64, cy: f64, r: f64, n: usize, angle: f64) -> Vec<(f64, f64)> {
    (0..n)
        .map(|k| {
            let a = angle + k as f64 * std::f64::consts::TAU / n as f64;
            (cx + r * a.cos(), cy + r * a.sin())
        })
        .collect()
}

/// Independent uniform noise per pixel and channel.
pub fn noise(width: usize, height: usize, seed: u64) -> RasterImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = (0..width * height * 3).map(|_| rng.random()).collect();
    RasterImage::new(width, height, PixelKind::Rgb8, data).expect("valid noise image")
}

/// Piecewise-constant random blocks with random colored rectangles and
/// disks on top: plenty of corners at several scales.
pub fn texture(width: usize, height: usize, seed: u64) -> RasterImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cell = 8;
    let cols = width.div_ceil(cell);
    let blocks: Vec<Rgb> = (0..cols * height.div_ceil(cell))
        .map(|_| [rng.random(), rng.random(), rng.random()])
        .collect();
    let mut img = RasterImage::from_fn_rgb(width, height, |x, y| blocks[(y / cell) * cols + x / cell]);
    let shapes = (width * height / 400).max(4);
    for _ in 0..shapes {
        let color: Rgb = [rng.random(), rng.random(), rng.random()];
        let cx = rng.random_range(0.0..width as f64);
        let cy = rng.random_range(0.0..height as f64);
        let size = rng.random_range(4.0..(width.min(height) as f64 / 4.0).max(5.0));
        if rng.random_bool(0.5) {
            fill_disk(&mut img, cx, cy, size / 2.0, color);
        } else {
            let angle = rng.random_range(0.0..std::f64::consts::PI);
            let aspect = rng.random_range(0.4..1.0);
            fill_polygon(&mut img, &rotated_rect(cx, cy, size, size * aspect, angle), color);
        }
    }
    img
}

/// Copies `src` into `dst` with its top-left corner at `(ox, oy)`, clipped.
pub fn paste(dst: &mut RasterImage, src: &RasterImage, ox: i64, oy: i64) {
    for y in 0..src.height() {
        for x in 0..src.width() {
            let (tx, ty) = (ox + x as i64, oy + y as i64);
            if dst.in_bounds(tx, ty) {
                let px = src.pixel(x, y).to_vec();
                dst.set_pixel(tx as usize, ty as usize, &px);
            }
        }
    }
}

/// Halves both sides by averaging 2x2 blocks (odd trailing rows and columns
/// are dropped). Pixel centers map as `p' = (p + 0.5) / 2 - 0.5`.
pub fn half_size(image: &RasterImage) -> RasterImage {
    let c = image.channels();
    let (w, h) = (image.width() / 2, image.height() / 2);
    let mut data = Vec::with_capacity(w * h * c);
    for y in 0..h {
        for x in 0..w {
            for ch in 0..c {
                let sum: u32 = [(0, 0), (1, 0), (0, 1), (1, 1)]
                    .iter()
                    .map(|&(dx, dy)| image.pixel(2 * x + dx, 2 * y + dy)[ch] as u32)
                    .sum();
                data.push(((sum + 2) / 4) as u8);
            }
        }
    }
    RasterImage::new(w.max(1), h.max(1), image.kind(), data).expect("half-size buffer")
}

/// Quarter turn clockwise: `(x, y)` moves to `(height - 1 - y, x)`.
pub fn rotate_cw(image: &RasterImage) -> RasterImage {
    let (w, h, c) = (image.width(), image.height(), image.channels());
    let mut data = Vec::with_capacity(w * h * c);
    for ny in 0..w {
        for nx in 0..h {
            data.extend_from_slice(image.pixel(ny, h - 1 - nx));
        }
    }
    RasterImage::new(h, w, image.kind(), data).expect("rotated buffer")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disk_area_is_close_to_pi_r_squared() {
        let mut img = canvas(60, 60, [0, 0, 0]);
        fill_disk(&mut img, 30.0, 30.0, 20.0, [255, 255, 255]);
        let lit = (0..60 * 60).filter(|i| img.data()[i * 3] == 255).count() as f64;
        assert!((lit - std::f64::consts::PI * 400.0).abs() < 20.0, "{lit}");
    }

    #[test]
    fn axis_aligned_rect_covers_expected_pixels() {
        let mut img = canvas(20, 20, [0, 0, 0]);
        fill_polygon(&mut img, &rotated_rect(10.0, 10.0, 8.0, 4.0, 0.0), [9, 9, 9]);
        let lit = (0..400).filter(|i| img.data()[i * 3] == 9).count();
        assert_eq!(lit, 32);
    }

    #[test]
    fn textures_are_seeded() {
        assert_eq!(texture(50, 40, 7), texture(50, 40, 7));
        assert_ne!(texture(50, 40, 7), texture(50, 40, 8));
    }

    #[test]
    fn half_size_averages_blocks() {
        let img = RasterImage::from_fn_gray(5, 4, |x, y| (x * 10 + y * 40) as u8);
        let half = half_size(&img);
        assert_eq!((half.width(), half.height()), (2, 2));
        // Block at (1, 1) holds 100, 110, 140, 150.
        assert_eq!(half.get(1, 1), 125);
    }

    #[test]
    fn rotation_moves_pixels_clockwise() {
        let img = RasterImage::from_fn_gray(3, 2, |x, y| (x + 3 * y) as u8);
        let r = rotate_cw(&img);
        assert_eq!((r.width(), r.height()), (2, 3));
        for y in 0..2 {
            for x in 0..3 {
                assert_eq!(r.get(2 - 1 - y, x), img.get(x, y));
            }
        }
        let four = rotate_cw(&rotate_cw(&rotate_cw(&rotate_cw(&img))));
        assert_eq!(four, img);
    }
}
