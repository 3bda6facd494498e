//! BRISK keypoints and descriptors, matching and homography estimation.

pub mod pattern;
pub mod detect;
pub mod describe;
pub mod matching;
pub mod homography;
pub mod object;

pub use describe::{brisk_describe, descriptor_dump, BinaryDescriptor};
pub use detect::{brisk_detect, BriskParams, Keypoint};
pub use homography::{find_homography, perspective_transform, Homography, HomographyEstimate, RansacParams};
pub use matching::{filter_good_matches, hamming_distance, match_descriptors, FeatureMatch, GoodMatchPolicy, MatchOutcome};
pub use object::{detect_object, extract_features, MatchParams, NotFoundReason, ObjectMatchResult};
