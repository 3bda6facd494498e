use objdetect::convert::rgb_to_gray;
use objdetect::features::{
    brisk_describe, brisk_detect, detect_object, hamming_distance, BriskParams, Homography, MatchParams,
    NotFoundReason,
};
use objdetect::geometry::Point;
use objdetect::image::RasterImage;
use objdetect::synth::{half_size, noise, paste, rotate_cw, texture};

const OBJECT_W: usize = 144;
const OBJECT_H: usize = 96;

fn object() -> RasterImage {
    texture(OBJECT_W, OBJECT_H, 21)
}

fn corners() -> [Point; 4] {
    let (w, h) = (OBJECT_W as f64, OBJECT_H as f64);
    [Point::new(0.0, 0.0), Point::new(w, 0.0), Point::new(w, h), Point::new(0.0, h)]
}

fn worst_corner_error(polygon: &[Point; 4], truth: &Homography) -> f64 {
    corners()
        .iter()
        .zip(polygon)
        .map(|(&c, p)| truth.apply(c).unwrap().distance(*p))
        .fold(0.0, f64::max)
}

#[test]
fn self_match_recovers_the_frame() {
    let r = detect_object(&object(), &object(), &MatchParams::default()).unwrap();
    assert!(r.found, "{:?}", r.reason);
    let err = worst_corner_error(&r.polygon.unwrap(), &Homography::identity());
    assert!(err <= 3.0, "corner error {err}");
}

#[test]
fn half_scale_paste_is_located() {
    let mut scene = texture(320, 260, 77);
    paste(&mut scene, &half_size(&object()), 40, 60);
    // Pixel centers: p' = (p + 0.5) / 2 - 0.5 + offset.
    let truth = Homography::from_rows([[0.5, 0.0, 39.75], [0.0, 0.5, 59.75], [0.0, 0.0, 1.0]]).unwrap();
    let r = detect_object(&object(), &scene, &MatchParams::default()).unwrap();
    assert!(r.found, "{:?}", r.reason);
    let err = worst_corner_error(&r.polygon.unwrap(), &truth);
    assert!(err <= 5.0, "corner error {err}");
}

#[test]
fn quarter_turn_paste_is_located() {
    let mut scene = texture(300, 300, 78);
    let (ox, oy) = (70.0, 50.0);
    paste(&mut scene, &rotate_cw(&object()), ox as i64, oy as i64);
    // (x, y) -> (h - 1 - y, x) inside the rotated image.
    let truth =
        Homography::from_rows([[0.0, -1.0, OBJECT_H as f64 - 1.0 + ox], [1.0, 0.0, oy], [0.0, 0.0, 1.0]]).unwrap();
    let r = detect_object(&object(), &scene, &MatchParams::default()).unwrap();
    assert!(r.found, "{:?}", r.reason);
    let err = worst_corner_error(&r.polygon.unwrap(), &truth);
    assert!(err <= 5.0, "corner error {err}");
}

#[test]
fn noise_scene_is_rejected() {
    let r = detect_object(&object(), &noise(320, 260, 5), &MatchParams::default()).unwrap();
    assert!(!r.found);
    assert!(matches!(
        r.reason,
        Some(NotFoundReason::TooFewGoodMatches | NotFoundReason::TooFewInliers)
    ));
}

#[test]
fn same_seed_same_result() {
    let mut scene = texture(320, 260, 77);
    paste(&mut scene, &half_size(&object()), 40, 60);
    let params = MatchParams { seed: 99, ..Default::default() };
    let a = detect_object(&object(), &scene, &params).unwrap();
    let b = detect_object(&object(), &scene, &params).unwrap();
    assert_eq!(a, b);
}

#[test]
fn rotated_patch_descriptors_stay_close() {
    let patch = rgb_to_gray(&texture(160, 160, 31)).unwrap();
    let turned = rgb_to_gray(&rotate_cw(&texture(160, 160, 31))).unwrap();
    let params = BriskParams::default();
    let a = brisk_describe(&patch, &brisk_detect(&patch, &params).unwrap()).unwrap();
    let b = brisk_describe(&turned, &brisk_detect(&turned, &params).unwrap()).unwrap();
    let n = patch.height() as f64;
    let mut pairs = 0;
    let mut close = 0;
    for (ka, da) in &a {
        let (tx, ty) = (n - 1.0 - ka.y, ka.x);
        let partner = b
            .iter()
            .filter(|(kb, _)| (kb.x - tx).hypot(kb.y - ty) <= 1.5 && (kb.scale / ka.scale).ln().abs() < 0.3)
            .min_by(|(p, _), (q, _)| {
                let dp = (p.x - tx).hypot(p.y - ty);
                let dq = (q.x - tx).hypot(q.y - ty);
                dp.total_cmp(&dq)
            });
        if let Some((_, db)) = partner {
            pairs += 1;
            if hamming_distance(da, db) <= 100 {
                close += 1;
            }
        }
    }
    assert!(pairs >= 20, "only {pairs} correspondences");
    assert!(2 * close >= pairs, "{close} of {pairs} within 100 bits");
}
