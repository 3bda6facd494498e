//! Brute-force Hamming matching and good-match selection.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::describe::BinaryDescriptor;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureMatch {
    pub object_index: usize,
    pub scene_index: usize,
    pub distance: u32,
}

pub fn hamming_distance(a: &BinaryDescriptor, b: &BinaryDescriptor) -> u32 {
    a.words().iter().zip(b.words()).map(|(x, y)| (x ^ y).count_ones()).sum()
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MatchOutcome {
    pub matches: Vec<FeatureMatch>,
    /// Set when object descriptors had no scene descriptors to match against.
    pub empty_scene: bool,
}

/// Nearest scene descriptor for every object descriptor. Ties go to the
/// lowest scene index.
pub fn match_descriptors(object: &[BinaryDescriptor], scene: &[BinaryDescriptor]) -> MatchOutcome {
    if scene.is_empty() {
        return MatchOutcome {
            matches: Vec::new(),
            empty_scene: !object.is_empty(),
        };
    }
    let matches = object
        .iter()
        .enumerate()
        .map(|(object_index, d)| {
            let mut best = FeatureMatch {
                object_index,
                scene_index: 0,
                distance: u32::MAX,
            };
            for (scene_index, s) in scene.iter().enumerate() {
                let distance = hamming_distance(d, s);
                if distance < best.distance {
                    best.scene_index = scene_index;
                    best.distance = distance;
                }
            }
            best
        })
        .collect();
    MatchOutcome {
        matches,
        empty_scene: false,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GoodMatchPolicy {
    pub max_good: usize,
    /// Cutoff as a multiple of the smallest distance.
    pub ratio: f64,
    /// The cutoff never drops below this.
    pub distance_floor: f64,
}

impl Default for GoodMatchPolicy {
    fn default() -> Self {
        GoodMatchPolicy {
            max_good: 50,
            ratio: 3.0,
            distance_floor: 20.0,
        }
    }
}

impl GoodMatchPolicy {
    pub fn validate(&self) -> Result<()> {
        if self.max_good < 4 {
            return Err(Error::param(format!("max_good must be at least 4, got {}", self.max_good)));
        }
        if !(self.ratio >= 1.0) || !self.ratio.is_finite() {
            return Err(Error::param(format!("ratio must be a finite value >= 1, got {}", self.ratio)));
        }
        if !(self.distance_floor >= 0.0) || !self.distance_floor.is_finite() {
            return Err(Error::param(format!(
                "distance_floor must be a finite value >= 0, got {}",
                self.distance_floor
            )));
        }
        Ok(())
    }

    pub fn cutoff(&self, min_distance: u32) -> f64 {
        (self.ratio * min_distance as f64).max(self.distance_floor)
    }
}

/// Keeps matches within `max(ratio * min, floor)`, ascending by distance
/// (stable on input order), at most `max_good` of them.
pub fn filter_good_matches(matches: &[FeatureMatch], policy: &GoodMatchPolicy) -> Result<Vec<FeatureMatch>> {
    policy.validate()?;
    let Some(min) = matches.iter().map(|m| m.distance).min() else {
        return Ok(Vec::new());
    };
    let cutoff = policy.cutoff(min);
    let mut good: Vec<FeatureMatch> = matches.iter().copied().filter(|m| m.distance as f64 <= cutoff).collect();
    good.sort_by_key(|m| m.distance);
    good.truncate(policy.max_good);
    Ok(good)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(object_index: usize, distance: u32) -> FeatureMatch {
        FeatureMatch {
            object_index,
            scene_index: 0,
            distance,
        }
    }

    #[test]
    fn hamming_examples() {
        let zero = BinaryDescriptor::zeros();
        assert_eq!(hamming_distance(&zero, &zero), 0);
        assert_eq!(hamming_distance(&zero, &BinaryDescriptor::ones()), 512);
        let mut flipped = zero;
        for bit in [3, 100, 511] {
            flipped.set_bit(bit, true);
        }
        assert_eq!(hamming_distance(&zero, &flipped), 3);
    }

    #[test]
    fn identical_sets_match_themselves() {
        let set: Vec<_> = (0..6u64).map(|k| BinaryDescriptor::from_words([k * 7919; 8])).collect();
        let out = match_descriptors(&set, &set);
        assert!(!out.empty_scene);
        for (i, mm) in out.matches.iter().enumerate() {
            assert_eq!((mm.object_index, mm.scene_index, mm.distance), (i, i, 0));
        }
    }

    #[test]
    fn empty_inputs() {
        let d = [BinaryDescriptor::zeros()];
        assert_eq!(match_descriptors(&[], &d), MatchOutcome::default());
        let out = match_descriptors(&d, &[]);
        assert!(out.matches.is_empty() && out.empty_scene);
        assert!(!match_descriptors(&[], &[]).empty_scene);
    }

    #[test]
    fn ties_go_to_the_lowest_scene_index() {
        let scene = [BinaryDescriptor::ones(), BinaryDescriptor::zeros(), BinaryDescriptor::zeros()];
        let out = match_descriptors(&[BinaryDescriptor::zeros()], &scene);
        assert_eq!(out.matches[0].scene_index, 1);
    }

    #[test]
    fn good_match_rule() {
        let policy = GoodMatchPolicy::default();
        let zeros: Vec<_> = (0..80).map(|i| m(i, 0)).collect();
        assert_eq!(filter_good_matches(&zeros, &policy).unwrap().len(), 50);
        let kept = filter_good_matches(&[m(0, 100), m(1, 10)], &policy).unwrap();
        assert_eq!(kept, vec![m(1, 10)]);
        assert!(filter_good_matches(&[], &policy).unwrap().is_empty());
        // The floor lifts a tiny cutoff.
        let kept = filter_good_matches(&[m(0, 1), m(1, 20), m(2, 21)], &policy).unwrap();
        assert_eq!(kept.len(), 2);
    }

    #[test]
    fn policy_bounds_are_checked() {
        for bad in [
            GoodMatchPolicy { max_good: 3, ..Default::default() },
            GoodMatchPolicy { ratio: 0.5, ..Default::default() },
            GoodMatchPolicy { distance_floor: -1.0, ..Default::default() },
            GoodMatchPolicy { ratio: f64::NAN, ..Default::default() },
        ] {
            assert!(filter_good_matches(&[m(0, 1)], &bad).is_err());
        }
    }
}
