//! Stroke rasterization for result annotations.

use crate::contours::Contour;
use crate::error::{Error, Result};
use crate::image::{PixelKind, RasterImage};

pub type Rgb = [u8; 3];

#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    Contour(Contour),
    /// Closed polygon through real-valued vertices.
    Polygon(Vec<(f64, f64)>),
    Circle { cx: f64, cy: f64, r: f64 },
    Line { from: (f64, f64), to: (f64, f64) },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stroke {
    pub shape: Shape,
    pub color: Rgb,
    pub thickness: u32,
}

/// Strokes to paint over an image, validated on insertion.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overlay {
    strokes: Vec<Stroke>,
}

impl Overlay {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, shape: Shape, color: Rgb, thickness: u32) -> Result<()> {
        if thickness == 0 {
            return Err(Error::param("stroke thickness must be at least 1"));
        }
        let finite = match &shape {
            Shape::Contour(_) => true,
            Shape::Polygon(pts) => pts.iter().all(|p| p.0.is_finite() && p.1.is_finite()),
            Shape::Circle { cx, cy, r } => cx.is_finite() && cy.is_finite() && r.is_finite(),
            Shape::Line { from, to } => [from.0, from.1, to.0, to.1].iter().all(|v| v.is_finite()),
        };
        if !finite {
            return Err(Error::param("stroke coordinates must be finite"));
        }
        self.strokes.push(Stroke {
            shape,
            color,
            thickness,
        });
        Ok(())
    }

    pub fn strokes(&self) -> &[Stroke] {
        &self.strokes
    }

    pub fn is_empty(&self) -> bool {
        self.strokes.is_empty()
    }
}

struct Canvas {
    image: RasterImage,
    color: Rgb,
    thickness: i64,
}

impl Canvas {
    fn plot(&mut self, x: i64, y: i64) {
        let lo = -(self.thickness - 1) / 2;
        let hi = self.thickness / 2;
        for dy in lo..=hi {
            for dx in lo..=hi {
                let (px, py) = (x + dx, y + dy);
                if self.image.in_bounds(px, py) {
                    self.image.set_pixel(px as usize, py as usize, &self.color);
                }
            }
        }
    }

    fn line(&mut self, (x0, y0): (i64, i64), (x1, y1): (i64, i64)) {
        let (dx, dy) = ((x1 - x0).abs(), -(y1 - y0).abs());
        let (sx, sy) = (if x0 < x1 { 1 } else { -1 }, if y0 < y1 { 1 } else { -1 });
        let (mut x, mut y, mut err) = (x0, y0, dx + dy);
        loop {
            self.plot(x, y);
            if x == x1 && y == y1 {
                break;
            }
            let e2 = 2 * err;
            if e2 >= dy {
                err += dy;
                x += sx;
            }
            if e2 <= dx {
                err += dx;
                y += sy;
            }
        }
    }

    fn circle(&mut self, cx: i64, cy: i64, r: i64) {
        if r <= 0 {
            self.plot(cx, cy);
            return;
        }
        let (mut x, mut y, mut err) = (r, 0i64, 1 - r);
        while x >= y {
            for (px, py) in [(x, y), (y, x), (-y, x), (-x, y), (-x, -y), (-y, -x), (y, -x), (x, -y)] {
                self.plot(cx + px, cy + py);
            }
            y += 1;
            if err < 0 {
                err += 2 * y + 1;
            } else {
                x -= 1;
                err += 2 * (y - x) + 1;
            }
        }
    }
}

fn round(p: (f64, f64)) -> (i64, i64) {
    (p.0.round() as i64, p.1.round() as i64)
}

/// Paints the overlay on a copy of `image`; strokes leaving the image are clipped.
pub fn annotate(image: &RasterImage, overlay: &Overlay) -> Result<RasterImage> {
    image.expect_kind(PixelKind::Rgb8)?;
    let mut canvas = Canvas {
        image: image.clone(),
        color: [0; 3],
        thickness: 1,
    };
    for stroke in &overlay.strokes {
        canvas.color = stroke.color;
        canvas.thickness = stroke.thickness as i64;
        match &stroke.shape {
            Shape::Contour(contour) => {
                let pts: Vec<(i64, i64)> = contour.points.iter().map(|p| (p.x as i64, p.y as i64)).collect();
                draw_polyline(&mut canvas, &pts, contour.closed);
            }
            Shape::Polygon(vertices) => {
                let pts: Vec<(i64, i64)> = vertices.iter().copied().map(round).collect();
                draw_polyline(&mut canvas, &pts, true);
            }
            Shape::Circle { cx, cy, r } => {
                // Thick rings are concentric one-pixel rings, so the
                // square stamp is not used here.
                let thickness = canvas.thickness;
                canvas.thickness = 1;
                let (cx, cy) = round((*cx, *cy));
                let r = r.round() as i64;
                for offset in -(thickness - 1) / 2..=thickness / 2 {
                    canvas.circle(cx, cy, r + offset);
                }
            }
            Shape::Line { from, to } => canvas.line(round(*from), round(*to)),
        }
    }
    Ok(canvas.image)
}

fn draw_polyline(canvas: &mut Canvas, pts: &[(i64, i64)], closed: bool) {
    match pts {
        [] => {}
        [p] => canvas.plot(p.0, p.1),
        _ => {
            for pair in pts.windows(2) {
                canvas.line(pair[0], pair[1]);
            }
            if closed {
                canvas.line(pts[pts.len() - 1], pts[0]);
            }
        }
    }
}
