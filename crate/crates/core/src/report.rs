//! Versioned JSON result documents with byte-stable formatting.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::color::{ColorDetectionResult, ColorParams};
use crate::contours::Contour;
use crate::error::{Error, Result};
use crate::features::{MatchParams, ObjectMatchResult};
use crate::geometry::Point;
use crate::image::RasterImage;
use crate::shape::{ShapeDetectionResult, ShapeParams};

pub const SCHEMA_VERSION: u32 = 1;

/// The shipped JSON Schema for result documents.
pub const SCHEMA: &str = include_str!("../schema/result-v1.schema.json");

fn to_value(params: &impl Serialize) -> Value {
    serde_json::to_value(params).expect("parameter structs serialize")
}

fn size(image: &RasterImage) -> Value {
    json!({ "width": image.width(), "height": image.height() })
}

fn point(p: Point) -> Value {
    json!([p.x, p.y])
}

fn contour_value(c: &Contour) -> Value {
    let (mut x0, mut y0, mut x1, mut y1) = (i32::MAX, i32::MAX, i32::MIN, i32::MIN);
    for p in &c.points {
        (x0, y0, x1, y1) = (x0.min(p.x), y0.min(p.y), x1.max(p.x), y1.max(p.y));
    }
    json!({
        "area": c.area(),
        "bbox": { "x": x0, "y": y0, "width": x1 - x0 + 1, "height": y1 - y0 + 1 },
        "points": c.points.iter().map(|p| json!([p.x, p.y])).collect::<Vec<_>>(),
    })
}

pub fn color_report(image: &RasterImage, result: &ColorDetectionResult, params: &ColorParams) -> Value {
    let mut detections = Vec::new();
    let mut colors = Vec::new();
    for m in &result.colors {
        colors.push(json!({
            "name": m.range.name,
            "highlight": m.range.highlight,
            "pixel_count": m.pixel_count,
            "region_count": m.regions.len(),
        }));
        for region in &m.regions {
            let mut v = contour_value(region);
            v["type"] = json!("color_region");
            v["color"] = json!(m.range.name);
            detections.push(v);
        }
    }
    json!({
        "schema_version": SCHEMA_VERSION,
        "pipeline": "color",
        "params": to_value(params),
        "image": size(image),
        "colors": colors,
        "detections": detections,
    })
}

pub fn shape_report(image: &RasterImage, result: &ShapeDetectionResult, params: &ShapeParams) -> Value {
    let mut detections: Vec<Value> = result
        .circles
        .iter()
        .map(|c| json!({ "type": "circle", "label": "Circle", "cx": c.cx, "cy": c.cy, "r": c.r, "votes": c.votes }))
        .collect();
    for p in &result.polygons {
        detections.push(json!({
            "type": p.label.name().to_ascii_lowercase(),
            "label": p.label.name(),
            "vertices": p.vertices.iter().map(|&v| point(v)).collect::<Vec<_>>(),
            "centroid": point(p.centroid()),
            "contour_area": p.source.area(),
        }));
    }
    json!({
        "schema_version": SCHEMA_VERSION,
        "pipeline": "shape",
        "params": to_value(params),
        "image": size(image),
        "detections": detections,
    })
}

pub fn match_report(object: &RasterImage, scene: &RasterImage, result: &ObjectMatchResult, params: &MatchParams) -> Value {
    let detections: Vec<Value> = result
        .matches
        .iter()
        .enumerate()
        .map(|(k, m)| {
            let (a, b) = (result.object_keypoints[m.object_index], result.scene_keypoints[m.scene_index]);
            json!({
                "type": "match",
                "object_index": m.object_index,
                "scene_index": m.scene_index,
                "distance": m.distance,
                "object": [a.x, a.y],
                "scene": [b.x, b.y],
                "inlier": result.inliers.get(k).copied().unwrap_or(false),
            })
        })
        .collect();
    json!({
        "schema_version": SCHEMA_VERSION,
        "pipeline": "match",
        "params": to_value(params),
        "object": size(object),
        "scene": size(scene),
        "found": result.found,
        "reason": result.reason.map(|r| r.code()),
        "homography": result.homography.map(|h| json!(h.rows())),
        "polygon": result.polygon.map(|p| p.iter().map(|&q| point(q)).collect::<Vec<_>>()),
        "counts": {
            "object_keypoints": result.object_keypoints.len(),
            "scene_keypoints": result.scene_keypoints.len(),
            "good_matches": result.matches.len(),
            "inliers": result.inlier_count(),
        },
        "detections": detections,
    })
}

fn write_float(out: &mut String, v: f64) {
    let text = format!("{v:.6}");
    out.push_str(if text == "-0.000000" { "0.000000" } else { &text });
}

fn write_value(out: &mut String, value: &Value, indent: usize) {
    let pad = |out: &mut String, n: usize| out.extend(std::iter::repeat_n("  ", n));
    match value {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => match (n.as_i64(), n.as_u64()) {
            (Some(i), _) if !n.is_f64() => write!(out, "{i}").expect("string write"),
            (_, Some(u)) if !n.is_f64() => write!(out, "{u}").expect("string write"),
            _ => write_float(out, n.as_f64().unwrap_or(f64::NAN)),
        },
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(items) => {
            if items.iter().all(|v| !v.is_object() && !v.is_array()) {
                out.push('[');
                for (k, v) in items.iter().enumerate() {
                    if k > 0 {
                        out.push_str(", ");
                    }
                    write_value(out, v, indent);
                }
                out.push(']');
                return;
            }
            out.push_str("[\n");
            for (k, v) in items.iter().enumerate() {
                pad(out, indent + 1);
                write_value(out, v, indent + 1);
                out.push_str(if k + 1 < items.len() { ",\n" } else { "\n" });
            }
            pad(out, indent);
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push_str("{\n");
            for (k, key) in keys.iter().enumerate() {
                pad(out, indent + 1);
                out.push_str(&Value::String((*key).clone()).to_string());
                out.push_str(": ");
                write_value(out, &map[*key], indent + 1);
                out.push_str(if k + 1 < keys.len() { ",\n" } else { "\n" });
            }
            pad(out, indent);
            out.push('}');
        }
    }
}

/// Sorted keys, two-space indentation, every float with six decimals.
pub fn to_canonical_json(value: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, value, 0);
    out.push('\n');
    out
}

pub fn write_result_json(value: &Value, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, to_canonical_json(value)).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Adds a top-level field, replacing any existing one.
pub fn with_field(mut value: Value, key: &str, field: Value) -> Value {
    if let Value::Object(map) = &mut value {
        map.insert(key.to_string(), field);
    } else {
        let mut map = Map::new();
        map.insert(key.to_string(), field);
        value = Value::Object(map);
    }
    value
}
