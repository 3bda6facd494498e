//! Outer border following over 8-connected foreground components.

use crate::error::Result;
use crate::image::{PixelKind, RasterImage};

/// Integer pixel coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pixel {
    pub x: i32,
    pub y: i32,
}

impl Pixel {
    pub fn new(x: i32, y: i32) -> Self {
        Pixel { x, y }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Contour {
    pub points: Vec<Pixel>,
    pub closed: bool,
}

impl Contour {
    /// Absolute shoelace area of the point sequence.
    pub fn area(&self) -> f64 {
        let n = self.points.len();
        if n < 3 {
            return 0.0;
        }
        let twice: i64 = (0..n)
            .map(|i| {
                let (a, b) = (self.points[i], self.points[(i + 1) % n]);
                a.x as i64 * b.y as i64 - b.x as i64 * a.y as i64
            })
            .sum();
        twice.abs() as f64 / 2.0
    }

    pub fn perimeter(&self) -> f64 {
        let n = self.points.len();
        if n < 2 {
            return 0.0;
        }
        let segments = if self.closed { n } else { n - 1 };
        (0..segments)
            .map(|i| {
                let (a, b) = (self.points[i], self.points[(i + 1) % n]);
                (((a.x - b.x).pow(2) + (a.y - b.y).pow(2)) as f64).sqrt()
            })
            .sum()
    }

    /// Inclusive bounding box `(min, max)`.
    pub fn bounding_box(&self) -> (Pixel, Pixel) {
        let min_x = self.points.iter().map(|p| p.x).min().unwrap_or(0);
        let min_y = self.points.iter().map(|p| p.y).min().unwrap_or(0);
        let max_x = self.points.iter().map(|p| p.x).max().unwrap_or(0);
        let max_y = self.points.iter().map(|p| p.y).max().unwrap_or(0);
        (Pixel::new(min_x, min_y), Pixel::new(max_x, max_y))
    }

    /// Area centroid, or the vertex mean for degenerate outlines.
    pub fn centroid(&self) -> (f64, f64) {
        let pts: Vec<(f64, f64)> = self.points.iter().map(|p| (p.x as f64, p.y as f64)).collect();
        polygon_centroid(&pts)
    }
}

pub(crate) fn polygon_centroid(pts: &[(f64, f64)]) -> (f64, f64) {
    let n = pts.len();
    let (mut a, mut cx, mut cy) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let (p, q) = (pts[i], pts[(i + 1) % n]);
        let cross = p.0 * q.1 - q.0 * p.1;
        a += cross;
        cx += (p.0 + q.0) * cross;
        cy += (p.1 + q.1) * cross;
    }
    if a.abs() < 1e-9 {
        let k = n.max(1) as f64;
        return (
            pts.iter().map(|p| p.0).sum::<f64>() / k,
            pts.iter().map(|p| p.1).sum::<f64>() / k,
        );
    }
    (cx / (3.0 * a), cy / (3.0 * a))
}

// Clockwise on screen (y grows downward), starting east.
const DIRS: [(i32, i32); 8] = [
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
    (-1, 0),
    (-1, -1),
    (0, -1),
    (1, -1),
];

fn direction(from: Pixel, to: Pixel) -> usize {
    let d = (to.x - from.x, to.y - from.y);
    DIRS.iter().position(|&v| v == d).expect("points are 8-neighbors")
}

/// Traces one closed outer contour per 8-connected component.
///
/// Contours are ordered by their starting pixel, the component's topmost
/// then leftmost pixel. Contours whose shoelace area is below `min_area`
/// are discarded.
pub fn find_contours(mask: &RasterImage, min_area: f64) -> Result<Vec<Contour>> {
    mask.expect_kind(PixelKind::Mask1)?;
    let (w, h) = (mask.width() as i32, mask.height() as i32);
    let data = mask.data();
    let fg = |p: Pixel| p.x >= 0 && p.y >= 0 && p.x < w && p.y < h && data[(p.y * w + p.x) as usize] == 1;

    let mut visited = vec![false; data.len()];
    let mut contours = Vec::new();
    let mut stack = Vec::new();
    for y in 0..h {
        for x in 0..w {
            let idx = (y * w + x) as usize;
            if data[idx] == 0 || visited[idx] {
                continue;
            }
            // Mark the whole component so it is traced exactly once.
            visited[idx] = true;
            stack.push(Pixel::new(x, y));
            while let Some(p) = stack.pop() {
                for (dx, dy) in DIRS {
                    let q = Pixel::new(p.x + dx, p.y + dy);
                    if fg(q) && !visited[(q.y * w + q.x) as usize] {
                        visited[(q.y * w + q.x) as usize] = true;
                        stack.push(q);
                    }
                }
            }
            let contour = Contour {
                points: trace_outer(Pixel::new(x, y), &fg),
                closed: true,
            };
            if contour.area() >= min_area {
                contours.push(contour);
            }
        }
    }
    Ok(contours)
}

/// Border following from a start pixel whose west neighbor is background.
fn trace_outer(start: Pixel, fg: &impl Fn(Pixel) -> bool) -> Vec<Pixel> {
    let step = |p: Pixel, d: usize| Pixel::new(p.x + DIRS[d].0, p.y + DIRS[d].1);
    // The last contour point: first foreground neighbor counterclockwise from west.
    let Some(last) = (0..8).map(|k| step(start, (4 + 8 - k) % 8)).find(|&q| fg(q)) else {
        return vec![start];
    };
    let mut points = Vec::new();
    let (mut prev, mut cur) = (last, start);
    loop {
        let back = direction(cur, prev);
        let next = (1..=8)
            .map(|k| step(cur, (back + k) % 8))
            .find(|&q| fg(q))
            .expect("a component with two pixels has a neighbor");
        points.push(cur);
        if next == start && cur == last {
            return points;
        }
        prev = cur;
        cur = next;
    }
}
