//! Sobel gradients and Canny edge detection.

use crate::error::{Error, Result};
use crate::image::{PixelKind, RasterImage};

/// Per-pixel 3x3 Sobel responses of a gray image, borders replicated.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub width: usize,
    pub height: usize,
    pub gx: Vec<i32>,
    pub gy: Vec<i32>,
}

impl Gradients {
    /// L1 magnitude `|gx| + |gy|`, in raw Sobel units (at most 2040).
    pub fn magnitude(&self, i: usize) -> i32 {
        self.gx[i].abs() + self.gy[i].abs()
    }
}

pub fn sobel(gray: &RasterImage) -> Result<Gradients> {
    gray.expect_kind(PixelKind::Gray8)?;
    let (w, h) = (gray.width(), gray.height());
    let src = gray.data();
    let at = |x: i64, y: i64| -> i32 {
        let x = x.clamp(0, w as i64 - 1) as usize;
        let y = y.clamp(0, h as i64 - 1) as usize;
        src[y * w + x] as i32
    };
    let mut gx = vec![0; w * h];
    let mut gy = vec![0; w * h];
    for y in 0..h as i64 {
        for x in 0..w as i64 {
            let i = y as usize * w + x as usize;
            gx[i] = (at(x + 1, y - 1) + 2 * at(x + 1, y) + at(x + 1, y + 1))
                - (at(x - 1, y - 1) + 2 * at(x - 1, y) + at(x - 1, y + 1));
            gy[i] = (at(x - 1, y + 1) + 2 * at(x, y + 1) + at(x + 1, y + 1))
                - (at(x - 1, y - 1) + 2 * at(x, y - 1) + at(x + 1, y - 1));
        }
    }
    Ok(Gradients {
        width: w,
        height: h,
        gx,
        gy,
    })
}

/// Canny edges over the L1 Sobel magnitude.
///
/// `low` and `high` are hysteresis thresholds on the raw magnitude. A pixel
/// survives non-maximum suppression when it is strictly greater than its
/// predecessor along the quantized gradient direction and not smaller than
/// its successor, which keeps exactly one pixel of a symmetric ridge.
pub fn canny(gray: &RasterImage, low: u32, high: u32) -> Result<RasterImage> {
    if low > high {
        return Err(Error::param(format!(
            "canny low threshold {low} exceeds high threshold {high}"
        )));
    }
    let grad = sobel(gray)?;
    let (w, h) = (grad.width, grad.height);
    let mag: Vec<i32> = (0..w * h).map(|i| grad.magnitude(i)).collect();
    let mag_at = |x: i64, y: i64| -> i32 {
        if x < 0 || y < 0 || x >= w as i64 || y >= h as i64 {
            0
        } else {
            mag[y as usize * w + x as usize]
        }
    };

    // tan(22.5 deg) and tan(67.5 deg) in 1/1024 fixed point.
    const TAN_22_5: i64 = 424;
    const TAN_67_5: i64 = 2472;
    let mut thin = vec![0i32; w * h];
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            let m = mag[i];
            if m == 0 || (m as u32) < low {
                continue;
            }
            let (gx, gy) = (grad.gx[i] as i64, grad.gy[i] as i64);
            let ay = gy.abs();
            let (dx, dy) = if ay * 1024 <= TAN_22_5 * gx.abs() {
                (1, 0)
            } else if ay * 1024 >= TAN_67_5 * gx.abs() {
                (0, 1)
            } else if (gx > 0) == (gy > 0) {
                (1, 1)
            } else {
                (1, -1)
            };
            let (xi, yi) = (x as i64, y as i64);
            let before = mag_at(xi - dx, yi - dy);
            let after = mag_at(xi + dx, yi + dy);
            if m > before && m >= after {
                thin[i] = m;
            }
        }
    }

    let mut out = vec![0u8; w * h];
    let mut stack: Vec<usize> = (0..w * h)
        .filter(|&i| thin[i] > 0 && thin[i] as u32 >= high)
        .collect();
    for &i in &stack {
        out[i] = 1;
    }
    while let Some(i) = stack.pop() {
        let (x, y) = ((i % w) as i64, (i / w) as i64);
        for dy in -1..=1 {
            for dx in -1..=1 {
                let (nx, ny) = (x + dx, y + dy);
                if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                    continue;
                }
                let j = ny as usize * w + nx as usize;
                if out[j] == 0 && thin[j] > 0 && thin[j] as u32 >= low {
                    out[j] = 1;
                    stack.push(j);
                }
            }
        }
    }
    RasterImage::new(w, h, PixelKind::Mask1, out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filter::gaussian_blur;
    use proptest::prelude::*;

    #[test]
    fn rejects_inverted_thresholds() {
        let img = RasterImage::filled(4, 4, PixelKind::Gray8, 0);
        assert!(canny(&img, 100, 50).is_err());
    }

    #[test]
    fn constant_image_has_no_edges() {
        let img = RasterImage::filled(16, 12, PixelKind::Gray8, 90);
        assert_eq!(canny(&img, 50, 150).unwrap().count_nonzero(), 0);
    }

    #[test]
    fn weak_gradients_are_ignored() {
        // Horizontal ramp of 2 per column: Sobel magnitude 16 < low.
        let img = RasterImage::from_fn_gray(20, 20, |x, _| (x * 2) as u8);
        assert_eq!(canny(&img, 50, 150).unwrap().count_nonzero(), 0);
    }

    #[test]
    fn vertical_step_gives_single_line() {
        // Sobel gx is 1020 on columns 9 and 10; the tie keeps column 9.
        let img = RasterImage::from_fn_gray(20, 20, |x, _| if x < 10 { 0 } else { 255 });
        let edges = canny(&img, 50, 150).unwrap();
        for y in 0..20 {
            for x in 0..20 {
                assert_eq!(edges.get(x, y), (x == 9) as u8, "at ({x},{y})");
            }
        }
    }

    fn label_components(mask: &RasterImage) -> Vec<Vec<usize>> {
        let (w, h) = (mask.width(), mask.height());
        let mut seen = vec![false; w * h];
        let mut comps = Vec::new();
        for start in 0..w * h {
            if mask.data()[start] == 0 || seen[start] {
                continue;
            }
            seen[start] = true;
            let mut stack = vec![start];
            let mut comp = Vec::new();
            while let Some(i) = stack.pop() {
                comp.push(i);
                let (x, y) = ((i % w) as i64, (i / w) as i64);
                for dy in -1..=1 {
                    for dx in -1..=1 {
                        if mask.in_bounds(x + dx, y + dy) {
                            let j = (y + dy) as usize * w + (x + dx) as usize;
                            if mask.data()[j] == 1 && !seen[j] {
                                seen[j] = true;
                                stack.push(j);
                            }
                        }
                    }
                }
            }
            comps.push(comp);
        }
        comps
    }

    proptest! {
        #[test]
        fn edges_respect_hysteresis(seed in any::<u64>(), low in 20u32..200, span in 0u32..300) {
            let high = low + span;
            let mut state = seed | 1;
            let noisy = RasterImage::from_fn_gray(24, 24, |_, _| {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
                (state >> 56) as u8
            });
            let img = gaussian_blur(&noisy, 1.0).unwrap();
            let grad = sobel(&img).unwrap();
            let edges = canny(&img, low, high).unwrap();
            for i in 0..24 * 24 {
                if edges.data()[i] == 1 {
                    prop_assert!(grad.magnitude(i) as u32 >= low);
                }
            }
            for comp in label_components(&edges) {
                prop_assert!(comp.iter().any(|&i| grad.magnitude(i) as u32 >= high));
            }
        }
    }
}
