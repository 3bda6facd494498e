use objdetect::shape::{detect_shapes, ShapeKind, ShapeParams};
use objdetect::synth::{canvas, fill_disk, fill_polygon, regular_polygon, rotated_rect};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// One random shape on a plain background; returns whether the detector got
/// the label (and for circles the geometry) right.
fn trial(rng: &mut ChaCha8Rng, kind: ShapeKind) -> Result<(), String> {
    let size = 160;
    let bg = [rng.random_range(0..80u8), rng.random_range(0..80u8), rng.random_range(0..80u8)];
    let fg = [rng.random_range(170..=255u8), rng.random_range(170..=255u8), rng.random_range(170..=255u8)];
    let mut img = canvas(size, size, bg);
    let extent = rng.random_range(24.0..50.0);
    let cx = rng.random_range(extent + 8.0..size as f64 - extent - 8.0);
    let cy = rng.random_range(extent + 8.0..size as f64 - extent - 8.0);
    let angle = rng.random_range(0.0..std::f64::consts::TAU);
    let aspect: f64 = rng.random_range(0.4..0.7);
    match kind {
        ShapeKind::Circle => fill_disk(&mut img, cx, cy, extent, fg),
        ShapeKind::Triangle => fill_polygon(&mut img, &regular_polygon(cx, cy, extent, 3, angle), fg),
        ShapeKind::Square => {
            let side = extent * std::f64::consts::SQRT_2;
            fill_polygon(&mut img, &rotated_rect(cx, cy, side, side, angle), fg)
        }
        _ => {
            let w = 2.0 * extent / (1.0 + aspect * aspect).sqrt();
            fill_polygon(&mut img, &rotated_rect(cx, cy, w, w * aspect, angle), fg)
        }
    }
    let result = detect_shapes(&img, &ShapeKind::ALL, &ShapeParams::default()).map_err(|e| e.to_string())?;
    let labels: Vec<ShapeKind> = result.polygons.iter().map(|p| p.label).collect();
    if kind == ShapeKind::Circle {
        let ok = result.circles.len() == 1
            && labels.is_empty()
            && (result.circles[0].cx - cx).abs() <= 2.0
            && (result.circles[0].cy - cy).abs() <= 2.0
            && (result.circles[0].r - extent).abs() <= 2.0;
        if !ok {
            return Err(format!("circle ({cx:.1},{cy:.1},{extent:.1}): {:?} {labels:?}", result.circles));
        }
    } else if !(result.circles.is_empty() && labels == [kind]) {
        return Err(format!("{kind} c=({cx},{cy}) bg={bg:?} fg={fg:?} extent {extent} angle {angle} aspect {aspect}: {:?} {labels:?} {:?}", result.circles, result.polygons.iter().map(|p| (p.vertices.clone(), p.source.perimeter())).collect::<Vec<_>>()));
    }
    Ok(())
}

#[test]
fn random_single_shapes_are_labelled() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let kinds = [ShapeKind::Circle, ShapeKind::Triangle, ShapeKind::Square, ShapeKind::Rectangle];
    let failures: Vec<String> = (0..120)
        .filter_map(|i| trial(&mut rng, kinds[i % 4]).err())
        .collect();
    assert!(failures.is_empty(), "{} failures:\n{}", failures.len(), failures.join("\n"));
}

#[test]
fn pentagons_and_hexagons_are_other() {
    for n in [5, 6] {
        let mut img = canvas(160, 160, [20, 20, 20]);
        fill_polygon(&mut img, &regular_polygon(80.0, 80.0, 45.0, n, 0.3), [230, 230, 230]);
        let result = detect_shapes(&img, &ShapeKind::ALL, &ShapeParams::default()).unwrap();
        let labels: Vec<ShapeKind> = result.polygons.iter().map(|p| p.label).collect();
        assert_eq!(labels, [ShapeKind::Other], "{n}-gon: {:?}", result.circles);
    }
}
