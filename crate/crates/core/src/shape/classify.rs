//! Vertex-count and angle/aspect based polygon labeling.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{signed_area, Point};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ShapeKind {
    Circle,
    Triangle,
    Square,
    Rectangle,
    Other,
}

impl ShapeKind {
    pub const ALL: [ShapeKind; 5] = [
        ShapeKind::Circle,
        ShapeKind::Triangle,
        ShapeKind::Square,
        ShapeKind::Rectangle,
        ShapeKind::Other,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ShapeKind::Circle => "Circle",
            ShapeKind::Triangle => "Triangle",
            ShapeKind::Square => "Square",
            ShapeKind::Rectangle => "Rectangle",
            ShapeKind::Other => "Other",
        }
    }

    /// Case-insensitive name lookup.
    pub fn parse(name: &str) -> Result<Self> {
        let name = name.trim();
        ShapeKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(name))
            .ok_or_else(|| {
                Error::param(format!(
                    "unknown shape '{name}'; valid shapes: Circle, Triangle, Square, Rectangle, Other"
                ))
            })
    }
}

impl std::fmt::Display for ShapeKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifyParams {
    /// Largest `|cos|` of an interior angle that still counts as right.
    pub right_angle_cos_tol: f64,
    /// Side ratios at or above `1 - square_ratio_tol` are squares.
    pub square_ratio_tol: f64,
}

impl Default for ClassifyParams {
    fn default() -> Self {
        ClassifyParams {
            right_angle_cos_tol: 0.3,
            square_ratio_tol: 0.05,
        }
    }
}

/// Labels a simple polygon by its vertex count, then for quadrilaterals by
/// the cosines of the interior angles and the ratio of opposite side pairs.
pub fn classify_polygon(vertices: &[Point], params: &ClassifyParams) -> Result<ShapeKind> {
    let n = vertices.len();
    if n < 3 {
        return Err(Error::DegeneratePolygon(format!("{n} vertices")));
    }
    let sides: Vec<f64> = (0..n)
        .map(|i| vertices[i].distance(vertices[(i + 1) % n]))
        .collect();
    let longest = sides.iter().cloned().fold(0.0, f64::max);
    if let Some(i) = sides.iter().position(|&s| s <= 1e-9 * longest.max(1.0)) {
        return Err(Error::DegeneratePolygon(format!("edge {i} has zero length")));
    }
    if signed_area(vertices).abs() <= 1e-9 * longest * longest {
        return Err(Error::DegeneratePolygon("zero area".into()));
    }
    match n {
        3 => Ok(ShapeKind::Triangle),
        4 => {
            let right_angled = (0..4).all(|i| {
                let v = vertices[i];
                let a = vertices[(i + 3) % 4].sub(v);
                let b = vertices[(i + 1) % 4].sub(v);
                (a.dot(b) / (a.norm() * b.norm())).abs() <= params.right_angle_cos_tol
            });
            if !right_angled {
                return Ok(ShapeKind::Other);
            }
            let pair_a = (sides[0] + sides[2]) / 2.0;
            let pair_b = (sides[1] + sides[3]) / 2.0;
            let ratio = pair_a.min(pair_b) / pair_a.max(pair_b);
            Ok(if ratio >= 1.0 - params.square_ratio_tol {
                ShapeKind::Square
            } else {
                ShapeKind::Rectangle
            })
        }
        _ => Ok(ShapeKind::Other),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn poly(raw: &[(f64, f64)]) -> Vec<Point> {
        raw.iter().map(|&p| p.into()).collect()
    }

    fn classify(raw: &[(f64, f64)]) -> Result<ShapeKind> {
        classify_polygon(&poly(raw), &ClassifyParams::default())
    }

    fn pentagon() -> Vec<(f64, f64)> {
        (0..5)
            .map(|k| {
                let a = k as f64 * std::f64::consts::TAU / 5.0;
                (10.0 * a.cos(), 10.0 * a.sin())
            })
            .collect()
    }

    #[test]
    fn reference_labels() {
        assert_eq!(classify(&[(0.0, 0.0), (4.0, 0.0), (2.0, 3.0)]).unwrap(), ShapeKind::Triangle);
        assert_eq!(
            classify(&[(0.0, 0.0), (10.0, 0.0), (10.0, 10.0), (0.0, 10.0)]).unwrap(),
            ShapeKind::Square
        );
        assert_eq!(
            classify(&[(0.0, 0.0), (40.0, 0.0), (40.0, 20.0), (0.0, 20.0)]).unwrap(),
            ShapeKind::Rectangle
        );
        assert_eq!(classify(&pentagon()).unwrap(), ShapeKind::Other);
    }

    #[test]
    fn skewed_quadrilateral_is_other() {
        assert_eq!(
            classify(&[(0.0, 0.0), (10.0, 0.0), (20.0, 10.0), (10.0, 10.0)]).unwrap(),
            ShapeKind::Other
        );
    }

    #[test]
    fn degenerate_polygons_error() {
        assert!(classify(&[(0.0, 0.0), (1.0, 1.0)]).is_err());
        assert!(classify(&[(0.0, 0.0), (0.0, 0.0), (2.0, 3.0)]).is_err());
        assert!(classify(&[(0.0, 0.0), (1.0, 1.0), (2.0, 2.0)]).is_err());
    }

    #[test]
    fn names_parse_case_insensitively() {
        assert_eq!(ShapeKind::parse("rectangle").unwrap(), ShapeKind::Rectangle);
        assert_eq!(ShapeKind::parse(" CIRCLE ").unwrap(), ShapeKind::Circle);
        assert!(ShapeKind::parse("hexagon").is_err());
    }

    proptest! {
        #[test]
        fn label_is_similarity_invariant(
            which in 0usize..4,
            scale in 0.05f64..50.0,
            angle in 0.0f64..std::f64::consts::TAU,
            tx in -500.0f64..500.0,
            ty in -500.0f64..500.0,
        ) {
            let base = match which {
                0 => vec![(0.0, 0.0), (4.0, 0.0), (2.0, 3.0)],
                1 => vec![(0.0, 0.0), (10.0, 0.0), (10.0, 10.0), (0.0, 10.0)],
                2 => vec![(0.0, 0.0), (40.0, 0.0), (40.0, 20.0), (0.0, 20.0)],
                _ => pentagon(),
            };
            let expected = classify(&base).unwrap();
            let (s, c) = angle.sin_cos();
            let moved: Vec<(f64, f64)> = base
                .iter()
                .map(|&(x, y)| (scale * (c * x - s * y) + tx, scale * (s * x + c * y) + ty))
                .collect();
            prop_assert_eq!(classify(&moved).unwrap(), expected);
        }
    }
}
