//! RANSAC homography estimation and perspective mapping.

use nalgebra::{DMatrix, Matrix3, Vector3};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point;

/// Determinants at or below this (after normalization) count as singular.
pub const SINGULAR_DET: f64 = 1e-9;
/// Projective denominators at or below this map to infinity.
pub const INFINITY_W: f64 = 1e-12;
/// Sine of the smallest angle three sample points may span.
const COLLINEAR_SIN: f64 = 1e-3;

/// 3x3 projective map, row-major, scaled so the bottom-right entry is 1
/// whenever it is non-zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Homography {
    rows: [[f64; 3]; 3],
}

impl Homography {
    pub fn identity() -> Self {
        Homography {
            rows: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
        }
    }

    pub fn translation(tx: f64, ty: f64) -> Self {
        Homography {
            rows: [[1.0, 0.0, tx], [0.0, 1.0, ty], [0.0, 0.0, 1.0]],
        }
    }

    /// Normalizes and rejects non-finite or singular matrices.
    pub fn from_rows(rows: [[f64; 3]; 3]) -> Result<Self> {
        Self::from_matrix(Matrix3::from_fn(|r, c| rows[r][c]))
    }

    fn from_matrix(m: Matrix3<f64>) -> Result<Self> {
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::EstimationFailure("non-finite matrix entry".into()));
        }
        let m = if m[(2, 2)] != 0.0 {
            m / m[(2, 2)]
        } else {
            let norm = m.norm();
            if norm == 0.0 {
                return Err(Error::EstimationFailure("zero matrix".into()));
            }
            m / norm
        };
        let det = m.determinant();
        if det.abs() <= SINGULAR_DET {
            return Err(Error::EstimationFailure(format!("singular matrix (det = {det:e})")));
        }
        Ok(Homography {
            rows: [0, 1, 2].map(|r| [0, 1, 2].map(|c| m[(r, c)])),
        })
    }

    pub fn rows(&self) -> &[[f64; 3]; 3] {
        &self.rows
    }

    fn matrix(&self) -> Matrix3<f64> {
        Matrix3::from_fn(|r, c| self.rows[r][c])
    }

    /// The map applying `self` first and `next` second.
    pub fn then(&self, next: &Homography) -> Result<Homography> {
        Self::from_matrix(next.matrix() * self.matrix())
    }

    pub fn inverse(&self) -> Result<Homography> {
        let inv = self
            .matrix()
            .try_inverse()
            .ok_or_else(|| Error::EstimationFailure("matrix is not invertible".into()))?;
        Self::from_matrix(inv)
    }

    /// Maps one point; `None` when it lands at infinity.
    pub fn apply(&self, p: Point) -> Option<Point> {
        let h = &self.rows;
        let w = h[2][0] * p.x + h[2][1] * p.y + h[2][2];
        if w.abs() <= INFINITY_W {
            return None;
        }
        Some(Point::new(
            (h[0][0] * p.x + h[0][1] * p.y + h[0][2]) / w,
            (h[1][0] * p.x + h[1][1] * p.y + h[1][2]) / w,
        ))
    }
}

pub fn perspective_transform(points: &[Point], h: &Homography) -> Result<Vec<Point>> {
    points
        .iter()
        .enumerate()
        .map(|(index, &p)| {
            h.apply(p).ok_or_else(|| {
                let r = h.rows[2];
                Error::PointAtInfinity {
                    index,
                    w: r[0] * p.x + r[1] * p.y + r[2],
                }
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RansacParams {
    pub reproj_threshold: f64,
    pub max_iterations: usize,
    pub confidence: f64,
    pub seed: u64,
}

impl Default for RansacParams {
    fn default() -> Self {
        RansacParams {
            reproj_threshold: 3.0,
            max_iterations: 2000,
            confidence: 0.995,
            seed: 0,
        }
    }
}

impl RansacParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.reproj_threshold > 0.0) || !self.reproj_threshold.is_finite() {
            return Err(Error::param(format!(
                "reproj_threshold must be positive, got {}",
                self.reproj_threshold
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::param("max_iterations must be at least 1"));
        }
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return Err(Error::param(format!("confidence must lie in (0, 1), got {}", self.confidence)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HomographyEstimate {
    pub homography: Homography,
    /// One flag per input pair.
    pub inliers: Vec<bool>,
}

impl HomographyEstimate {
    pub fn inlier_count(&self) -> usize {
        self.inliers.iter().filter(|&&b| b).count()
    }
}

/// Similarity taking the points to centroid 0 and RMS distance sqrt(2).
fn normalizer(points: &[Point]) -> Matrix3<f64> {
    let n = points.len() as f64;
    let cx = points.iter().map(|p| p.x).sum::<f64>() / n;
    let cy = points.iter().map(|p| p.y).sum::<f64>() / n;
    let rms = (points.iter().map(|p| (p.x - cx).powi(2) + (p.y - cy).powi(2)).sum::<f64>() / n).sqrt();
    let s = if rms > 0.0 { std::f64::consts::SQRT_2 / rms } else { 1.0 };
    Matrix3::new(s, 0.0, -s * cx, 0.0, s, -s * cy, 0.0, 0.0, 1.0)
}

fn transform(t: &Matrix3<f64>, p: Point) -> Point {
    let v = t * Vector3::new(p.x, p.y, 1.0);
    Point::new(v.x / v.z, v.y / v.z)
}

/// Normalized direct linear transform over all given pairs.
fn dlt(src: &[Point], dst: &[Point]) -> Result<Homography> {
    let (ts, td) = (normalizer(src), normalizer(dst));
    let rows = (2 * src.len()).max(9);
    let mut a = DMatrix::<f64>::zeros(rows, 9);
    for (k, (&p, &q)) in src.iter().zip(dst).enumerate() {
        let (p, q) = (transform(&ts, p), transform(&td, q));
        let r = 2 * k;
        a.row_mut(r)
            .copy_from_slice(&[-p.x, -p.y, -1.0, 0.0, 0.0, 0.0, q.x * p.x, q.x * p.y, q.x]);
        a.row_mut(r + 1)
            .copy_from_slice(&[0.0, 0.0, 0.0, -p.x, -p.y, -1.0, q.y * p.x, q.y * p.y, q.y]);
    }
    let svd = a.svd(false, true);
    let v_t = svd
        .v_t
        .ok_or_else(|| Error::EstimationFailure("singular value decomposition failed".into()))?;
    let smallest = svd.singular_values.argmin().0;
    let h = v_t.row(smallest);
    let hn = Matrix3::new(h[0], h[1], h[2], h[3], h[4], h[5], h[6], h[7], h[8]);
    let td_inv = td
        .try_inverse()
        .ok_or_else(|| Error::EstimationFailure("degenerate point spread".into()))?;
    Homography::from_matrix(td_inv * hn * ts)
}

fn collinear(a: Point, b: Point, c: Point) -> bool {
    let (u, v) = (b.sub(a), c.sub(a));
    u.cross(v).abs() <= COLLINEAR_SIN * u.norm() * v.norm()
}

fn degenerate(points: [Point; 4]) -> bool {
    (0..4).any(|skip| {
        let t: Vec<Point> = (0..4).filter(|&k| k != skip).map(|k| points[k]).collect();
        collinear(t[0], t[1], t[2])
    })
}

/// Flags pairs whose forward and backward reprojection errors both stay
/// within `threshold`.
fn classify(h: &Homography, inv: &Homography, pairs: &[(Point, Point)], threshold: f64) -> Vec<bool> {
    pairs
        .iter()
        .map(|&(p, q)| {
            let forward = h.apply(p).map(|m| m.distance(q));
            let backward = inv.apply(q).map(|m| m.distance(p));
            matches!((forward, backward), (Some(f), Some(b)) if f <= threshold && b <= threshold)
        })
        .collect()
}

fn count(flags: &[bool]) -> usize {
    flags.iter().filter(|&&b| b).count()
}

fn iterations_needed(inliers: usize, total: usize, confidence: f64, cap: usize) -> usize {
    let w = inliers as f64 / total as f64;
    let p_good = w.powi(4);
    if p_good >= 1.0 {
        return 1;
    }
    if p_good <= 0.0 {
        return cap;
    }
    let n = (1.0 - confidence).ln() / (1.0 - p_good).ln();
    if n.is_finite() { (n.ceil() as usize).clamp(1, cap) } else { cap }
}

fn refit(pairs: &[(Point, Point)], flags: &[bool]) -> Result<Homography> {
    let (src, dst): (Vec<Point>, Vec<Point>) = pairs.iter().zip(flags).filter(|(_, &f)| f).map(|(&pq, _)| pq).unzip();
    dlt(&src, &dst)
}

/// Estimates the map from object points to scene points with RANSAC over
/// minimal four-pair samples, then refits on the inliers by least squares.
pub fn find_homography(pairs: &[(Point, Point)], params: &RansacParams) -> Result<HomographyEstimate> {
    params.validate()?;
    if pairs.len() < 4 {
        return Err(Error::InsufficientData {
            needed: 4,
            got: pairs.len(),
        });
    }
    if pairs.iter().any(|(p, q)| !(p.x.is_finite() && p.y.is_finite() && q.x.is_finite() && q.y.is_finite())) {
        return Err(Error::param("correspondences must be finite"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut best: Option<(Homography, Vec<bool>, usize)> = None;
    let mut budget = params.max_iterations;
    let mut iteration = 0;
    while iteration < budget {
        iteration += 1;
        let sample = rand::seq::index::sample(&mut rng, pairs.len(), 4);
        let picked: [(Point, Point); 4] = [0, 1, 2, 3].map(|k| pairs[sample.index(k)]);
        if degenerate(picked.map(|pq| pq.0)) || degenerate(picked.map(|pq| pq.1)) {
            continue;
        }
        let (src, dst): (Vec<Point>, Vec<Point>) = picked.iter().copied().unzip();
        let Ok(h) = dlt(&src, &dst) else { continue };
        let Ok(inv) = h.inverse() else { continue };
        let flags = classify(&h, &inv, pairs, params.reproj_threshold);
        let n = count(&flags);
        if n >= 4 && best.as_ref().is_none_or(|b| n > b.2) {
            budget = iterations_needed(n, pairs.len(), params.confidence, params.max_iterations);
            best = Some((h, flags, n));
        }
    }
    let (mut h, mut flags, mut n) =
        best.ok_or_else(|| Error::EstimationFailure("every sample was degenerate or inconsistent".into()))?;

    // Least-squares refits while the consensus keeps growing.
    for _ in 0..4 {
        let Ok(fit) = refit(pairs, &flags) else { break };
        let Ok(inv) = fit.inverse() else { break };
        let refit_flags = classify(&fit, &inv, pairs, params.reproj_threshold);
        let m = count(&refit_flags);
        if m < n {
            break;
        }
        let grew = m > n;
        (h, flags, n) = (fit, refit_flags, m);
        if !grew {
            break;
        }
    }
    Ok(HomographyEstimate {
        homography: h,
        inliers: flags,
    })
}
