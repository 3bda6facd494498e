//! Locating an object image inside a scene image.

use serde::{Deserialize, Serialize};

use crate::convert::rgb_to_gray;
use crate::draw::{annotate, Overlay, Rgb, Shape};
use crate::error::{Error, Result};
use crate::features::describe::{brisk_describe, BinaryDescriptor};
use crate::features::detect::{brisk_detect, BriskParams, Keypoint};
use crate::features::homography::{find_homography, perspective_transform, Homography, RansacParams};
use crate::features::matching::{filter_good_matches, match_descriptors, FeatureMatch, GoodMatchPolicy};
use crate::geometry::Point;
use crate::image::RasterImage;
use crate::synth::paste;

pub const MATCH_COLOR: Rgb = [0, 255, 0];

/// All knobs of the object pipeline in one flat set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MatchParams {
    pub threshold: u32,
    pub octaves: u32,
    pub max_good: usize,
    pub ratio: f64,
    pub distance_floor: f64,
    pub reproj_threshold: f64,
    pub max_iterations: usize,
    pub confidence: f64,
    pub min_inliers: usize,
    pub seed: u64,
}

impl Default for MatchParams {
    fn default() -> Self {
        let (brisk, policy, ransac) = (BriskParams::default(), GoodMatchPolicy::default(), RansacParams::default());
        MatchParams {
            threshold: brisk.threshold,
            octaves: brisk.octaves,
            max_good: policy.max_good,
            ratio: policy.ratio,
            distance_floor: policy.distance_floor,
            reproj_threshold: ransac.reproj_threshold,
            max_iterations: ransac.max_iterations,
            confidence: ransac.confidence,
            min_inliers: 10,
            seed: ransac.seed,
        }
    }
}

impl MatchParams {
    pub fn brisk(&self) -> BriskParams {
        BriskParams {
            threshold: self.threshold,
            octaves: self.octaves,
        }
    }

    pub fn policy(&self) -> GoodMatchPolicy {
        GoodMatchPolicy {
            max_good: self.max_good,
            ratio: self.ratio,
            distance_floor: self.distance_floor,
        }
    }

    pub fn ransac(&self) -> RansacParams {
        RansacParams {
            reproj_threshold: self.reproj_threshold,
            max_iterations: self.max_iterations,
            confidence: self.confidence,
            seed: self.seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.brisk().validate()?;
        self.policy().validate()?;
        self.ransac().validate()?;
        if self.min_inliers < 4 {
            return Err(Error::param(format!("min_inliers must be at least 4, got {}", self.min_inliers)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NotFoundReason {
    TooFewKeypoints,
    TooFewGoodMatches,
    HomographyFailed,
    TooFewInliers,
}

impl NotFoundReason {
    pub fn code(self) -> &'static str {
        match self {
            NotFoundReason::TooFewKeypoints => "too_few_keypoints",
            NotFoundReason::TooFewGoodMatches => "too_few_good_matches",
            NotFoundReason::HomographyFailed => "homography_failed",
            NotFoundReason::TooFewInliers => "too_few_inliers",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObjectMatchResult {
    pub found: bool,
    pub reason: Option<NotFoundReason>,
    pub object_keypoints: Vec<Keypoint>,
    pub scene_keypoints: Vec<Keypoint>,
    /// Good matches, ascending by distance.
    pub matches: Vec<FeatureMatch>,
    /// Per good match; empty when no homography was estimated.
    pub inliers: Vec<bool>,
    pub homography: Option<Homography>,
    /// Object corners `(0,0) (w,0) (w,h) (0,h)` in scene coordinates.
    pub polygon: Option<[Point; 4]>,
    /// Object on the left, scene on the right.
    pub annotated: RasterImage,
}

impl ObjectMatchResult {
    pub fn inlier_count(&self) -> usize {
        self.inliers.iter().filter(|&&b| b).count()
    }
}

/// Detects and describes keypoints of a gray image.
pub fn extract_features(gray: &RasterImage, params: &BriskParams) -> Result<(Vec<Keypoint>, Vec<BinaryDescriptor>)> {
    let keypoints = brisk_detect(gray, params)?;
    Ok(brisk_describe(gray, &keypoints)?.into_iter().unzip())
}

fn side_by_side(object: &RasterImage, scene: &RasterImage) -> RasterImage {
    let mut canvas = RasterImage::from_fn_rgb(
        object.width() + scene.width(),
        object.height().max(scene.height()),
        |_, _| [0, 0, 0],
    );
    paste(&mut canvas, object, 0, 0);
    paste(&mut canvas, scene, object.width() as i64, 0);
    canvas
}

pub fn detect_object(object: &RasterImage, scene: &RasterImage, params: &MatchParams) -> Result<ObjectMatchResult> {
    params.validate()?;
    let (object_gray, scene_gray) = (rgb_to_gray(object)?, rgb_to_gray(scene)?);
    let (object_keypoints, object_desc) = extract_features(&object_gray, &params.brisk())?;
    let (scene_keypoints, scene_desc) = extract_features(&scene_gray, &params.brisk())?;

    let mut result = ObjectMatchResult {
        found: false,
        reason: None,
        object_keypoints,
        scene_keypoints,
        matches: Vec::new(),
        inliers: Vec::new(),
        homography: None,
        polygon: None,
        annotated: side_by_side(object, scene),
    };

    if result.object_keypoints.len() < 4 || result.scene_keypoints.len() < 4 {
        result.reason = Some(NotFoundReason::TooFewKeypoints);
    } else {
        result.matches = filter_good_matches(&match_descriptors(&object_desc, &scene_desc).matches, &params.policy())?;
        if result.matches.len() < 4 {
            result.reason = Some(NotFoundReason::TooFewGoodMatches);
        } else {
            locate(&mut result, object, params);
        }
    }

    let offset = object.width() as f64;
    let mut overlay = Overlay::new();
    for m in &result.matches {
        let (a, b) = (result.object_keypoints[m.object_index], result.scene_keypoints[m.scene_index]);
        overlay.push(
            Shape::Line {
                from: (a.x, a.y),
                to: (b.x + offset, b.y),
            },
            MATCH_COLOR,
            1,
        )?;
    }
    if let Some(poly) = result.polygon {
        overlay.push(Shape::Polygon(poly.iter().map(|p| (p.x + offset, p.y)).collect()), MATCH_COLOR, 2)?;
    }
    result.annotated = annotate(&result.annotated, &overlay)?;
    Ok(result)
}

fn locate(result: &mut ObjectMatchResult, object: &RasterImage, params: &MatchParams) {
    let pairs: Vec<(Point, Point)> = result
        .matches
        .iter()
        .map(|m| {
            let (a, b) = (result.object_keypoints[m.object_index], result.scene_keypoints[m.scene_index]);
            (Point::new(a.x, a.y), Point::new(b.x, b.y))
        })
        .collect();
    let estimate = match find_homography(&pairs, &params.ransac()) {
        Ok(e) => e,
        Err(_) => {
            result.reason = Some(NotFoundReason::HomographyFailed);
            return;
        }
    };
    let (w, h) = (object.width() as f64, object.height() as f64);
    let corners = [Point::new(0.0, 0.0), Point::new(w, 0.0), Point::new(w, h), Point::new(0.0, h)];
    let Ok(mapped) = perspective_transform(&corners, &estimate.homography) else {
        result.reason = Some(NotFoundReason::HomographyFailed);
        return;
    };
    let inliers = estimate.inlier_count();
    result.inliers = estimate.inliers;
    result.homography = Some(estimate.homography);
    if inliers < params.min_inliers {
        result.reason = Some(NotFoundReason::TooFewInliers);
        return;
    }
    result.found = true;
    result.polygon = Some([mapped[0], mapped[1], mapped[2], mapped[3]]);
}
