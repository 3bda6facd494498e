//! Browser bindings: color, shape and feature matching on canvas pixels.
//!
//! Images cross the boundary as RGBA bytes, the layout of `ImageData`.
//! Results come back as a canonical JSON report plus an annotated RGBA
//! image.

use objdetect::color::{detect_color_objects, ColorParams, ColorTable};
use objdetect::convert::hsv_pixel_to_rgb;
use objdetect::features::{detect_object, MatchParams};
use objdetect::image::{PixelKind, RasterImage};
use objdetect::report::{color_report, match_report, shape_report, to_canonical_json};
use objdetect::shape::{detect_shapes, ShapeKind, ShapeParams};
use objdetect::synth::{canvas, fill_disk, fill_polygon, half_size, paste, regular_polygon, rotated_rect, texture};
use serde_json::json;
use wasm_bindgen::prelude::*;

/// A report with its annotated image.
#[wasm_bindgen]
#[derive(Debug, Clone)]
pub struct Outcome {
    report: String,
    width: usize,
    height: usize,
    rgba: Vec<u8>,
}

#[wasm_bindgen]
impl Outcome {
    #[wasm_bindgen(getter)]
    pub fn report(&self) -> String {
        self.report.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn width(&self) -> usize {
        self.width
    }

    #[wasm_bindgen(getter)]
    pub fn height(&self) -> usize {
        self.height
    }

    #[wasm_bindgen(getter)]
    pub fn rgba(&self) -> Vec<u8> {
        self.rgba.clone()
    }
}

impl Outcome {
    fn new(report: serde_json::Value, annotated: &RasterImage) -> Self {
        Outcome {
            report: to_canonical_json(&report),
            width: annotated.width(),
            height: annotated.height(),
            rgba: to_rgba(annotated),
        }
    }
}

pub fn from_rgba(rgba: &[u8], width: usize, height: usize) -> Result<RasterImage, String> {
    if rgba.len() != width * height * 4 {
        return Err(format!("expected {} RGBA bytes for {width}x{height}, got {}", width * height * 4, rgba.len()));
    }
    let rgb = rgba.chunks_exact(4).flat_map(|p| [p[0], p[1], p[2]]).collect();
    RasterImage::new(width, height, PixelKind::Rgb8, rgb).map_err(|e| e.to_string())
}

pub fn to_rgba(image: &RasterImage) -> Vec<u8> {
    let rgb = objdetect::convert::to_rgb(image);
    rgb.data().chunks_exact(3).flat_map(|p| [p[0], p[1], p[2], 255]).collect()
}

fn params<T: serde::de::DeserializeOwned + Default>(text: &str) -> Result<T, String> {
    if text.trim().is_empty() {
        return Ok(T::default());
    }
    serde_json::from_str(text).map_err(|e| format!("invalid parameters: {e}"))
}

fn names(list: &str) -> Vec<&str> {
    list.split(',').map(str::trim).filter(|s| !s.is_empty()).collect()
}

pub fn run_colors(rgba: &[u8], width: usize, height: usize, colors: &str, params_json: &str) -> Result<Outcome, String> {
    let image = from_rgba(rgba, width, height)?;
    let params: ColorParams = params(params_json)?;
    let result = detect_color_objects(&image, &names(colors), &params, &ColorTable::default()).map_err(|e| e.to_string())?;
    Ok(Outcome::new(color_report(&image, &result, &params), &result.annotated))
}

pub fn run_shapes(rgba: &[u8], width: usize, height: usize, shapes: &str, params_json: &str) -> Result<Outcome, String> {
    let image = from_rgba(rgba, width, height)?;
    let params: ShapeParams = params(params_json)?;
    let wanted = names(shapes)
        .into_iter()
        .map(ShapeKind::parse)
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    let result = detect_shapes(&image, &wanted, &params).map_err(|e| e.to_string())?;
    Ok(Outcome::new(shape_report(&image, &result, &params), &result.annotated))
}

#[allow(clippy::too_many_arguments)]
pub fn run_match(
    object: &[u8],
    object_width: usize,
    object_height: usize,
    scene: &[u8],
    scene_width: usize,
    scene_height: usize,
    params_json: &str,
) -> Result<Outcome, String> {
    let object = from_rgba(object, object_width, object_height)?;
    let scene = from_rgba(scene, scene_width, scene_height)?;
    let params: MatchParams = params(params_json)?;
    params.validate().map_err(|e| e.to_string())?;
    let result = detect_object(&object, &scene, &params).map_err(|e| e.to_string())?;
    Ok(Outcome::new(match_report(&object, &scene, &result, &params), &result.annotated))
}

/// Built-in demo images: `swatches`, `shapes`, `object` and `scene`.
pub fn sample(name: &str) -> Result<RasterImage, String> {
    Ok(match name {
        "swatches" => {
            let table = ColorTable::default();
            let mid = |name: &str| table.get(name).map(|r| hsv_pixel_to_rgb(r.midpoint())).map_err(|e| e.to_string());
            let mut img = canvas(240, 160, [250, 250, 250]);
            fill_polygon(&mut img, &rotated_rect(60.0, 80.0, 60.0, 60.0, 0.0), mid("Green")?);
            fill_polygon(&mut img, &rotated_rect(130.0, 60.0, 40.0, 50.0, 0.2), mid("Pink")?);
            fill_disk(&mut img, 190.0, 110.0, 28.0, mid("Blue")?);
            img
        }
        "shapes" => {
            let mut img = canvas(320, 200, [25, 25, 35]);
            let white = [235, 235, 235];
            fill_disk(&mut img, 60.0, 60.0, 35.0, white);
            fill_polygon(&mut img, &regular_polygon(170.0, 65.0, 45.0, 3, 0.3), white);
            fill_polygon(&mut img, &rotated_rect(260.0, 70.0, 60.0, 60.0, 0.4), white);
            fill_polygon(&mut img, &rotated_rect(110.0, 150.0, 110.0, 50.0, -0.15), white);
            img
        }
        "object" => texture(144, 96, 21),
        "scene" => {
            let mut img = texture(320, 260, 77);
            paste(&mut img, &half_size(&texture(144, 96, 21)), 40, 60);
            img
        }
        other => return Err(format!("unknown sample '{other}'")),
    })
}

/// The built-in color table as JSON: `[{name, highlight}]`.
pub fn color_table_json() -> String {
    let table = ColorTable::default();
    let colors: Vec<_> = table.ranges().iter().map(|r| json!({ "name": r.name, "highlight": r.highlight })).collect();
    serde_json::Value::Array(colors).to_string()
}

#[wasm_bindgen(js_name = detectColors)]
pub fn detect_colors(rgba: &[u8], width: usize, height: usize, colors: &str, params_json: &str) -> Result<Outcome, JsError> {
    run_colors(rgba, width, height, colors, params_json).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = detectShapes)]
pub fn detect_shapes_js(rgba: &[u8], width: usize, height: usize, shapes: &str, params_json: &str) -> Result<Outcome, JsError> {
    run_shapes(rgba, width, height, shapes, params_json).map_err(|e| JsError::new(&e))
}

#[allow(clippy::too_many_arguments)]
#[wasm_bindgen(js_name = matchObjects)]
pub fn match_objects(
    object: &[u8],
    object_width: usize,
    object_height: usize,
    scene: &[u8],
    scene_width: usize,
    scene_height: usize,
    params_json: &str,
) -> Result<Outcome, JsError> {
    run_match(object, object_width, object_height, scene, scene_width, scene_height, params_json).map_err(|e| JsError::new(&e))
}

/// A built-in demo image as an `Outcome` with an empty report.
#[wasm_bindgen(js_name = sampleImage)]
pub fn sample_image(name: &str) -> Result<Outcome, JsError> {
    let img = sample(name).map_err(|e| JsError::new(&e))?;
    Ok(Outcome {
        report: String::new(),
        width: img.width(),
        height: img.height(),
        rgba: to_rgba(&img),
    })
}

#[wasm_bindgen(js_name = colorTable)]
pub fn color_table() -> String {
    color_table_json()
}
