//! The 60-point BRISK sampling pattern and its pair tables.

use std::f64::consts::PI;
use std::sync::OnceLock;

/// Ring radii at unit scale, before `RADIUS_FACTOR`.
pub const RING_RADII: [f64; 5] = [0.0, 2.9, 4.9, 7.4, 10.8];
pub const RING_COUNTS: [usize; 5] = [1, 10, 14, 15, 20];
pub const RADIUS_FACTOR: f64 = 0.85;
/// Smoothing sigma of the center sample, before `SIGMA_FACTOR`.
pub const CENTER_SIGMA: f64 = 0.5;
pub const SIGMA_FACTOR: f64 = 1.3;
/// Pairs closer than this (unit scale, pattern units) give descriptor bits.
pub const D_MAX: f64 = 5.85;
/// Pairs farther than this give the orientation estimate.
pub const D_MIN: f64 = 8.2;
pub const POINTS: usize = 60;
pub const DESCRIPTOR_BITS: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PatternPoint {
    pub x: f64,
    pub y: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PointPair {
    pub i: usize,
    pub j: usize,
}

#[derive(Debug)]
pub struct Pattern {
    pub points: Vec<PatternPoint>,
    /// The first `DESCRIPTOR_BITS` pairs shorter than `D_MAX`.
    pub short_pairs: Vec<PointPair>,
    /// All pairs longer than `D_MIN`.
    pub long_pairs: Vec<PointPair>,
    /// Short pairs before truncation to `DESCRIPTOR_BITS`.
    pub short_pairs_available: usize,
    /// Largest `radius + sigma` over the points.
    pub extent: f64,
}

impl Pattern {
    fn build() -> Pattern {
        let mut points = Vec::with_capacity(POINTS);
        for (ring, (&radius, &n)) in RING_RADII.iter().zip(&RING_COUNTS).enumerate() {
            let r = radius * RADIUS_FACTOR;
            let sigma = if ring == 0 {
                SIGMA_FACTOR * CENTER_SIGMA
            } else {
                SIGMA_FACTOR * r * (PI / n as f64).sin()
            };
            let beta = PI / n as f64 * (ring % 2) as f64;
            for k in 0..n {
                let a = 2.0 * PI * k as f64 / n as f64 + beta;
                points.push(PatternPoint {
                    x: r * a.cos(),
                    y: r * a.sin(),
                    sigma,
                });
            }
        }
        let mut short = Vec::new();
        let mut long_pairs = Vec::new();
        for i in 1..points.len() {
            for j in 0..i {
                let d = (points[i].x - points[j].x).hypot(points[i].y - points[j].y);
                if d < D_MAX {
                    short.push(PointPair { i, j });
                } else if d > D_MIN {
                    long_pairs.push(PointPair { i, j });
                }
            }
        }
        let short_pairs_available = short.len();
        short.truncate(DESCRIPTOR_BITS);
        let extent = points.iter().map(|p| p.x.hypot(p.y) + p.sigma).fold(0.0, f64::max);
        Pattern {
            points,
            short_pairs: short,
            long_pairs,
            short_pairs_available,
            extent,
        }
    }
}

/// The shared pattern at unit scale.
pub fn pattern() -> &'static Pattern {
    static PATTERN: OnceLock<Pattern> = OnceLock::new();
    PATTERN.get_or_init(Pattern::build)
}
