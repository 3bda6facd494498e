//! Douglas-Peucker polyline simplification.

use crate::error::{Error, Result};
use crate::geometry::{distance_to_line, Point};

/// Simplifies an open polyline, keeping both endpoints.
///
/// The interior point farthest from the endpoint chord is kept (the first
/// one on ties) whenever its distance exceeds `epsilon`, and both halves
/// are simplified recursively. The output is an order-preserving
/// subsequence of the input.
pub fn douglas_peucker(points: &[Point], epsilon: f64) -> Result<Vec<Point>> {
    Ok(douglas_peucker_indices(points, epsilon)?
        .into_iter()
        .map(|i| points[i])
        .collect())
}

/// Like [`douglas_peucker`] but returns the indices of the kept points.
pub fn douglas_peucker_indices(points: &[Point], epsilon: f64) -> Result<Vec<usize>> {
    if points.len() < 2 {
        return Err(Error::param(format!(
            "douglas_peucker needs at least 2 points, got {}",
            points.len()
        )));
    }
    if !(epsilon >= 0.0) {
        return Err(Error::param(format!("epsilon must be non-negative, got {epsilon}")));
    }
    let mut keep = vec![false; points.len()];
    keep[0] = true;
    keep[points.len() - 1] = true;
    simplify_segment(points, 0, points.len() - 1, epsilon, &mut keep);
    Ok((0..points.len()).filter(|&i| keep[i]).collect())
}

fn simplify_segment(points: &[Point], first: usize, last: usize, epsilon: f64, keep: &mut [bool]) {
    if last <= first + 1 {
        return;
    }
    let (a, b) = (points[first], points[last]);
    let mut farthest = (first, -1.0);
    for (i, &p) in points.iter().enumerate().take(last).skip(first + 1) {
        let d = distance_to_line(p, a, b);
        if d > farthest.1 {
            farthest = (i, d);
        }
    }
    if farthest.1 > epsilon {
        keep[farthest.0] = true;
        simplify_segment(points, first, farthest.0, epsilon, keep);
        simplify_segment(points, farthest.0, last, epsilon, keep);
    }
}

/// Simplifies a closed ring given without a repeated closing point.
///
/// The ring is split at the point farthest from `points[0]` (lowest index on
/// ties); the half running back to `points[0]` is closed explicitly. Returns
/// indices into `points`, starting with 0.
pub fn douglas_peucker_closed_indices(points: &[Point], epsilon: f64) -> Result<Vec<usize>> {
    if points.len() < 2 {
        return Err(Error::param(format!(
            "douglas_peucker needs at least 2 points, got {}",
            points.len()
        )));
    }
    if !(epsilon >= 0.0) {
        return Err(Error::param(format!("epsilon must be non-negative, got {epsilon}")));
    }
    let start = points[0];
    let mut split = 0;
    let mut best = 0.0;
    for (i, p) in points.iter().enumerate().skip(1) {
        let d = p.distance(start);
        if d > best {
            best = d;
            split = i;
        }
    }
    if split == 0 {
        return Ok(vec![0]);
    }
    let first_half = douglas_peucker_indices(&points[..=split], epsilon)?;
    let mut second: Vec<Point> = points[split..].to_vec();
    second.push(start);
    let second_half = douglas_peucker_indices(&second, epsilon)?;

    let mut out = first_half;
    // Skip the shared split point and the closing copy of the start.
    out.extend(
        second_half[1..second_half.len() - 1]
            .iter()
            .map(|&i| i + split),
    );
    Ok(out)
}

pub fn douglas_peucker_closed(points: &[Point], epsilon: f64) -> Result<Vec<Point>> {
    Ok(douglas_peucker_closed_indices(points, epsilon)?
        .into_iter()
        .map(|i| points[i])
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(raw: &[(f64, f64)]) -> Vec<Point> {
        raw.iter().map(|&p| p.into()).collect()
    }

    #[test]
    fn collinear_interior_is_removed() {
        let out = douglas_peucker(&pts(&[(0.0, 0.0), (1.0, 0.0), (2.0, 0.0)]), 0.1).unwrap();
        assert_eq!(out, pts(&[(0.0, 0.0), (2.0, 0.0)]));
    }

    #[test]
    fn corner_beyond_epsilon_is_kept() {
        // (5,0) lies 5/sqrt(2) = 3.54 from the chord (0,0)-(5,5).
        let input = pts(&[(0.0, 0.0), (5.0, 0.0), (5.0, 5.0)]);
        assert_eq!(douglas_peucker(&input, 1.0).unwrap(), input);
        assert_eq!(douglas_peucker(&input, 3.6).unwrap().len(), 2);
    }

    #[test]
    fn rejects_short_input_and_negative_epsilon() {
        assert!(douglas_peucker(&pts(&[(0.0, 0.0)]), 1.0).is_err());
        assert!(douglas_peucker(&pts(&[(0.0, 0.0), (1.0, 1.0)]), -1.0).is_err());
    }

    #[test]
    fn rasterized_square_reduces_to_corners() {
        // 40-point outline of an axis-aligned 10x10 square, clockwise.
        let mut ring = Vec::new();
        for x in 0..10 {
            ring.push((x as f64, 0.0));
        }
        for y in 0..10 {
            ring.push((10.0, y as f64));
        }
        for x in (1..=10).rev() {
            ring.push((x as f64, 10.0));
        }
        for y in (1..=10).rev() {
            ring.push((0.0, y as f64));
        }
        assert_eq!(ring.len(), 40);
        let ring = pts(&ring);
        let out = douglas_peucker_closed(&ring, 0.02 * 40.0).unwrap();
        assert_eq!(out, pts(&[(0.0, 0.0), (10.0, 0.0), (10.0, 10.0), (0.0, 10.0)]));
    }

    #[test]
    fn degenerate_ring_collapses() {
        let ring = pts(&[(3.0, 3.0), (3.0, 3.0)]);
        assert_eq!(douglas_peucker_closed_indices(&ring, 1.0).unwrap(), vec![0]);
    }
}
