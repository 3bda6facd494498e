//! Detection of regions whose HSV values fall inside a named color range.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::contours::{find_contours, Contour};
use crate::convert::{rgb_pixel_to_hsv, rgb_to_hsv};
use crate::draw::{annotate, Overlay, Rgb, Shape};
use crate::error::{Error, Result};
use crate::filter::gaussian_blur;
use crate::image::{PixelKind, RasterImage};
use crate::morph::{dilate, erode};

/// Inclusive HSV box plus the RGB used to outline matches.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColorRange {
    pub name: String,
    pub min: [u8; 3],
    pub max: [u8; 3],
    pub highlight: Rgb,
}

impl ColorRange {
    pub fn contains(&self, hsv: [u8; 3]) -> bool {
        (0..3).all(|c| self.min[c] <= hsv[c] && hsv[c] <= self.max[c])
    }

    pub fn is_degenerate(&self) -> bool {
        self.min == self.max
    }

    pub fn midpoint(&self) -> [u8; 3] {
        std::array::from_fn(|c| ((self.min[c] as u16 + self.max[c] as u16) / 2) as u8)
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.trim().is_empty() {
            return Err(Error::ColorTable("color name is empty".into()));
        }
        if (0..3).any(|c| self.min[c] > self.max[c]) {
            return Err(Error::ColorTable(format!(
                "{}: minimum {:?} exceeds maximum {:?}",
                self.name, self.min, self.max
            )));
        }
        let hsv = rgb_pixel_to_hsv(self.highlight);
        if !self.contains(hsv) {
            return Err(Error::ColorTable(format!(
                "{}: highlight {:?} has HSV {:?} outside {:?}..{:?}",
                self.name, self.highlight, hsv, self.min, self.max
            )));
        }
        Ok(())
    }
}

/// An ordered, validated set of color ranges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColorTable {
    ranges: Vec<ColorRange>,
}

impl Default for ColorTable {
    fn default() -> Self {
        ColorTable {
            ranges: default_color_table(),
        }
    }
}

impl ColorTable {
    pub fn new(ranges: Vec<ColorRange>) -> Result<Self> {
        if ranges.is_empty() {
            return Err(Error::ColorTable("table has no entries".into()));
        }
        for (i, range) in ranges.iter().enumerate() {
            range.validate()?;
            if ranges[..i].iter().any(|r| r.name.eq_ignore_ascii_case(&range.name)) {
                return Err(Error::ColorTable(format!("duplicate color '{}'", range.name)));
            }
        }
        Ok(ColorTable { ranges })
    }

    /// Parses a JSON array of `{name, min, max, highlight}` objects.
    pub fn from_json(text: &str) -> Result<Self> {
        let ranges: Vec<ColorRange> =
            serde_json::from_str(text).map_err(|e| Error::ColorTable(e.to_string()))?;
        ColorTable::new(ranges)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        ColorTable::from_json(&text)
    }

    pub fn ranges(&self) -> &[ColorRange] {
        &self.ranges
    }

    pub fn names(&self) -> Vec<String> {
        self.ranges.iter().map(|r| r.name.clone()).collect()
    }

    /// Case-insensitive lookup.
    pub fn get(&self, name: &str) -> Result<&ColorRange> {
        self.ranges
            .iter()
            .find(|r| r.name.eq_ignore_ascii_case(name.trim()))
            .ok_or_else(|| Error::UnknownColor {
                name: name.to_string(),
                valid: self.names(),
            })
    }
}

/// The eleven shipped ranges, in their canonical order.
///
/// Hue follows the full-byte convention. The hue layout is kept verbatim
/// even where it disagrees with the usual hue wheel; override the table
/// when other ranges are needed.
pub fn default_color_table() -> Vec<ColorRange> {
    let entry = |name: &str, min: [u8; 3], max: [u8; 3], highlight: Rgb| ColorRange {
        name: name.to_string(),
        min,
        max,
        highlight,
    };
    vec![
        entry("Black", [0, 0, 0], [0, 0, 0], [0, 0, 0]),
        entry("White", [0, 0, 236], [0, 0, 255], [255, 255, 255]),
        entry("Gray", [0, 0, 1], [255, 50, 235], [128, 128, 128]),
        entry("Blue", [0, 50, 0], [41, 255, 255], [255, 85, 0]),
        entry("Green", [42, 0, 0], [88, 255, 255], [0, 255, 0]),
        entry("Yellow", [89, 50, 0], [97, 255, 255], [0, 255, 42]),
        entry("Orange", [98, 50, 0], [119, 255, 210], [0, 210, 105]),
        entry("Beige", [99, 0, 0], [120, 11, 255], [245, 255, 250]),
        entry("Red", [120, 140, 0], [128, 255, 255], [0, 255, 240]),
        entry("Pink", [120, 0, 241], [149, 255, 255], [0, 200, 255]),
        entry("Violet", [150, 0, 0], [200, 255, 255], [128, 0, 255]),
    ]
}

/// Per-pixel inclusive range test on an HSV image.
pub fn threshold_color(hsv: &RasterImage, range: &ColorRange) -> Result<RasterImage> {
    hsv.expect_kind(PixelKind::Hsv8)?;
    let data = hsv
        .data()
        .chunks_exact(3)
        .map(|p| range.contains([p[0], p[1], p[2]]) as u8)
        .collect();
    RasterImage::new(hsv.width(), hsv.height(), PixelKind::Mask1, data)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ColorParams {
    pub sigma: f64,
    /// Side of the square element used for the opening.
    pub se_size: usize,
    pub min_area: f64,
    pub stroke_thickness: u32,
}

impl Default for ColorParams {
    fn default() -> Self {
        ColorParams {
            sigma: 1.5,
            se_size: 3,
            min_area: 100.0,
            stroke_thickness: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ColorMatch {
    pub range: ColorRange,
    pub regions: Vec<Contour>,
    /// Set pixels of the opened mask.
    pub pixel_count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ColorDetectionResult {
    pub colors: Vec<ColorMatch>,
    pub annotated: RasterImage,
}

/// HSV conversion, blur, range threshold, opening, then contour tracing.
///
/// Every requested color is thresholded independently, so overlapping
/// ranges may claim the same pixel.
pub fn detect_color_objects(
    image: &RasterImage,
    colors: &[impl AsRef<str>],
    params: &ColorParams,
    table: &ColorTable,
) -> Result<ColorDetectionResult> {
    image.expect_kind(PixelKind::Rgb8)?;
    let ranges = colors
        .iter()
        .map(|name| table.get(name.as_ref()).cloned())
        .collect::<Result<Vec<_>>>()?;
    if params.min_area < 0.0 {
        return Err(Error::param("min_area must be non-negative"));
    }

    let blurred = gaussian_blur(&rgb_to_hsv(image)?, params.sigma)?;
    let mut overlay = Overlay::new();
    let mut matches = Vec::with_capacity(ranges.len());
    for range in ranges {
        let raw = threshold_color(&blurred, &range)?;
        let opened = dilate(&erode(&raw, params.se_size)?, params.se_size)?;
        let regions = find_contours(&opened, params.min_area)?;
        for region in &regions {
            overlay.push(Shape::Contour(region.clone()), range.highlight, params.stroke_thickness)?;
        }
        matches.push(ColorMatch {
            pixel_count: opened.count_nonzero(),
            range,
            regions,
        });
    }
    Ok(ColorDetectionResult {
        colors: matches,
        annotated: annotate(image, &overlay)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convert::hsv_pixel_to_rgb;
    use proptest::prelude::*;

    fn table() -> ColorTable {
        ColorTable::default()
    }

    #[test]
    fn default_table_is_valid_and_ordered() {
        let names = table().names();
        assert_eq!(
            names,
            ["Black", "White", "Gray", "Blue", "Green", "Yellow", "Orange", "Beige", "Red", "Pink", "Violet"]
        );
        for range in default_color_table() {
            range.validate().unwrap();
        }
    }

    #[test]
    fn table_lookups() {
        let t = table();
        let green = t.get("green").unwrap();
        assert_eq!((green.min, green.max), ([42, 0, 0], [88, 255, 255]));
        let red = t.get("Red").unwrap();
        assert_eq!((red.min, red.max), ([120, 140, 0], [128, 255, 255]));
        let black = t.get("BLACK").unwrap();
        assert_eq!((black.min, black.max), ([0, 0, 0], [0, 0, 0]));
        assert!(black.is_degenerate());
    }

    #[test]
    fn unknown_color_lists_valid_names() {
        let err = table().get("Chartreuse").unwrap_err();
        let text = err.to_string();
        assert!(text.contains("Chartreuse") && text.contains("Violet"), "{text}");
    }

    #[test]
    fn threshold_bounds_are_inclusive() {
        let green = table().get("Green").unwrap().clone();
        let img = RasterImage::new(3, 1, PixelKind::Hsv8, vec![60, 128, 128, 89, 128, 128, 42, 0, 0]).unwrap();
        let mask = threshold_color(&img, &green).unwrap();
        assert_eq!(mask.data(), &[1, 0, 1]);
    }

    #[test]
    fn black_selects_only_exact_black() {
        let black = table().get("Black").unwrap().clone();
        let img = RasterImage::new(4, 1, PixelKind::Hsv8, vec![0, 0, 0, 0, 0, 1, 1, 0, 0, 0, 1, 0]).unwrap();
        assert_eq!(threshold_color(&img, &black).unwrap().data(), &[1, 0, 0, 0]);
    }

    #[test]
    fn table_json_round_trip_and_validation() {
        let json = serde_json::to_string(&default_color_table()).unwrap();
        assert_eq!(ColorTable::from_json(&json).unwrap(), table());

        let inverted = r#"[{"name":"X","min":[10,0,0],"max":[5,255,255],"highlight":[0,0,0]}]"#;
        assert!(ColorTable::from_json(inverted).is_err());
        let bad_highlight = r#"[{"name":"X","min":[10,0,0],"max":[20,255,255],"highlight":[255,0,0]}]"#;
        assert!(ColorTable::from_json(bad_highlight).is_err());
        let dup = r#"[{"name":"A","min":[0,0,0],"max":[0,0,0],"highlight":[0,0,0]},
                      {"name":"a","min":[0,0,0],"max":[0,0,0],"highlight":[0,0,0]}]"#;
        assert!(ColorTable::from_json(dup).is_err());
        assert!(ColorTable::from_json("{}").is_err());
    }

    fn swatch_image(swatch_hsv: [u8; 3], at: (usize, usize)) -> RasterImage {
        let rgb = hsv_pixel_to_rgb(swatch_hsv);
        RasterImage::from_fn_rgb(100, 100, |x, y| {
            if x >= at.0 && x < at.0 + 40 && y >= at.1 && y < at.1 + 40 {
                rgb
            } else {
                [0, 0, 0]
            }
        })
    }

    /// Direct 2D evaluation of blur, threshold and opening for one range.
    fn brute_force_count(img: &RasterImage, range: &ColorRange, sigma: f64) -> usize {
        let (w, h) = (img.width() as i64, img.height() as i64);
        let r = (3.0 * sigma).ceil() as i64;
        let hsv: Vec<[u8; 3]> = img
            .data()
            .chunks_exact(3)
            .map(|p| rgb_pixel_to_hsv([p[0], p[1], p[2]]))
            .collect();
        let mut raw = vec![false; (w * h) as usize];
        for y in 0..h {
            for x in 0..w {
                let (mut acc, mut total) = ([0f64; 3], 0.0);
                for dy in -r..=r {
                    for dx in -r..=r {
                        let wgt = (-((dx * dx + dy * dy) as f64) / (2.0 * sigma * sigma)).exp();
                        let sx = (x + dx).clamp(0, w - 1);
                        let sy = (y + dy).clamp(0, h - 1);
                        let p = hsv[(sy * w + sx) as usize];
                        for c in 0..3 {
                            acc[c] += wgt * p[c] as f64;
                        }
                        total += wgt;
                    }
                }
                let v = acc.map(|a| (a / total).round() as u8);
                raw[(y * w + x) as usize] = range.contains(v);
            }
        }
        let at = |m: &[bool], x: i64, y: i64| x >= 0 && y >= 0 && x < w && y < h && m[(y * w + x) as usize];
        let mut eroded = vec![false; raw.len()];
        let mut opened = vec![false; raw.len()];
        for y in 0..h {
            for x in 0..w {
                eroded[(y * w + x) as usize] =
                    (-1..=1).all(|dy| (-1..=1).all(|dx| at(&raw, x + dx, y + dy)));
            }
        }
        for y in 0..h {
            for x in 0..w {
                opened[(y * w + x) as usize] =
                    (-1..=1).any(|dy| (-1..=1).any(|dx| at(&eroded, x + dx, y + dy)));
            }
        }
        opened.iter().filter(|&&v| v).count()
    }

    #[test]
    fn green_swatch_on_black() {
        // Blurring the hue channel towards the black background's hue 0
        // pulls the swatch rim below the Green minimum of 42, so one pixel
        // is lost on every side: 38 x 38 rather than 40 x 40.
        let img = swatch_image([60, 255, 255], (30, 30));
        let table = table();
        let result = detect_color_objects(&img, &["Green"], &ColorParams::default(), &table).unwrap();
        let green = &result.colors[0];
        assert_eq!(green.regions.len(), 1);
        let expected = brute_force_count(&img, table.get("Green").unwrap(), 1.5);
        assert_eq!(expected, 1444);
        assert_eq!(green.pixel_count, expected);
        assert_ne!(result.annotated, img);
    }

    #[test]
    fn swatch_on_range_reflected_background_keeps_its_size() {
        // A background whose hue mirrors the swatch across the range edge
        // puts the threshold crossing exactly halfway through the blur ramp.
        let swatch = hsv_pixel_to_rgb([65, 255, 255]);
        let background = hsv_pixel_to_rgb([19, 255, 255]);
        let img = RasterImage::from_fn_rgb(100, 100, |x, y| {
            if (30..70).contains(&x) && (30..70).contains(&y) { swatch } else { background }
        });
        let table = table();
        let result = detect_color_objects(&img, &["Green"], &ColorParams::default(), &table).unwrap();
        let green = &result.colors[0];
        assert_eq!(green.regions.len(), 1);
        assert_eq!(green.pixel_count, brute_force_count(&img, table.get("Green").unwrap(), 1.5));
        assert!((green.pixel_count as f64 - 1600.0).abs() <= 80.0, "{}", green.pixel_count);
    }

    #[test]
    fn black_image_has_no_pink() {
        let img = RasterImage::filled(50, 50, PixelKind::Rgb8, 0);
        let result = detect_color_objects(&img, &["Pink"], &ColorParams::default(), &table()).unwrap();
        assert!(result.colors[0].regions.is_empty());
        assert_eq!(result.colors[0].pixel_count, 0);
    }

    #[test]
    fn two_colors_are_detected_independently() {
        let green = hsv_pixel_to_rgb([60, 255, 255]);
        let red = hsv_pixel_to_rgb([124, 200, 200]);
        let img = RasterImage::from_fn_rgb(120, 60, |x, y| {
            if (10..40).contains(&y) && (10..40).contains(&x) {
                green
            } else if (10..40).contains(&y) && (70..100).contains(&x) {
                red
            } else {
                [0, 0, 0]
            }
        });
        let result = detect_color_objects(&img, &["Green", "red"], &ColorParams::default(), &table()).unwrap();
        assert_eq!(result.colors.len(), 2);
        assert_eq!(result.colors[0].range.name, "Green");
        assert_eq!(result.colors[1].range.name, "Red");
        assert_eq!(result.colors[0].regions.len(), 1);
        assert_eq!(result.colors[1].regions.len(), 1);
        assert!(result.colors[0].regions[0].bounding_box().0.x < 40);
        assert!(result.colors[1].regions[0].bounding_box().0.x >= 60);
    }

    #[test]
    fn unknown_name_fails_the_pipeline() {
        let img = RasterImage::filled(8, 8, PixelKind::Rgb8, 0);
        assert!(matches!(
            detect_color_objects(&img, &["Teal"], &ColorParams::default(), &table()),
            Err(Error::UnknownColor { .. })
        ));
    }

    proptest! {
        #[test]
        fn opened_mask_stays_within_dilated_threshold(seed in any::<u64>()) {
            let mut state = seed | 1;
            let img = RasterImage::from_fn_rgb(32, 32, |_, _| {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                let [a, b, c, ..] = state.to_be_bytes();
                [a, b, c]
            });
            let params = ColorParams { min_area: 0.0, ..ColorParams::default() };
            let blurred = gaussian_blur(&rgb_to_hsv(&img).unwrap(), params.sigma).unwrap();
            for range in default_color_table() {
                let raw = threshold_color(&blurred, &range).unwrap();
                let opened = dilate(&erode(&raw, 3).unwrap(), 3).unwrap();
                let grown = dilate(&raw, 3).unwrap();
                for i in 0..32 * 32 {
                    prop_assert!(opened.data()[i] <= grown.data()[i]);
                }
            }
            let a = detect_color_objects(&img, &["Gray", "Green"], &params, &table()).unwrap();
            let b = detect_color_objects(&img, &["Gray", "Green"], &params, &table()).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}
