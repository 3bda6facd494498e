//! Routes, request decoding and error mapping.

use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use axum::body::Bytes;
use axum::extract::{DefaultBodyLimit, Multipart, Path, State};
use axum::http::{header, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use objdetect::color::{detect_color_objects, ColorParams, ColorTable};
use objdetect::convert::to_rgb;
use objdetect::error::Error;
use objdetect::features::{detect_object, MatchParams};
use objdetect::image::RasterImage;
use objdetect::io::{decode_any, encode, ImageFormat};
use objdetect::report::{color_report, match_report, shape_report, to_canonical_json, with_field};
use objdetect::shape::{detect_shapes, ShapeKind, ShapeParams};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use tower_http::cors::{AllowOrigin, Any, CorsLayer};
use tower_http::services::ServeDir;

use crate::store::{ImageStore, Pinned, ID_LEN};

/// Room for multipart boundaries and headers on top of the image bytes.
const MULTIPART_OVERHEAD: usize = 64 * 1024;

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub upload_limit: usize,
    pub capacity: usize,
    pub deadline: Duration,
    pub table: ColorTable,
    /// Allowed CORS origin; any origin when unset.
    pub cors_origin: Option<String>,
    /// Directory served for paths outside `/api`.
    pub static_dir: Option<PathBuf>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            upload_limit: 20 * 1024 * 1024,
            capacity: 64,
            deadline: Duration::from_secs(30),
            table: ColorTable::default(),
            cors_origin: None,
            static_dir: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct AppState {
    pub store: ImageStore,
    table: Arc<ColorTable>,
    upload_limit: usize,
    deadline: Duration,
    /// Per-process salt for derived annotated-image ids.
    salt: [u8; 16],
}

impl AppState {
    pub fn new(config: &ServiceConfig) -> Self {
        AppState {
            store: ImageStore::new(config.capacity),
            table: Arc::new(config.table.clone()),
            upload_limit: config.upload_limit,
            deadline: config.deadline,
            salt: rand::random(),
        }
    }

    /// Same request, same id: identical requests get identical responses.
    fn derived_id(&self, parts: &[&str]) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.salt);
        for part in parts {
            hasher.update((part.len() as u64).to_le_bytes());
            hasher.update(part.as_bytes());
        }
        let digest = hasher.finalize();
        let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
        hex[..ID_LEN].to_string()
    }
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    body: Value,
}

impl ApiError {
    fn new(status: StatusCode, code: &str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            body: json!({ "error": code, "message": message.into() }),
        }
    }

    fn field(field: &str, message: impl Into<String>) -> Self {
        let message = message.into();
        let mut e = Self::new(StatusCode::BAD_REQUEST, "invalid_request", format!("{field}: {message}"));
        e.body["fields"] = json!([{ "field": field, "message": message }]);
        e
    }

    fn not_found(id: &str) -> Self {
        Self::new(StatusCode::NOT_FOUND, "not_found", format!("no image with id '{id}'"))
    }

    fn too_large(limit: usize) -> Self {
        Self::new(StatusCode::PAYLOAD_TOO_LARGE, "payload_too_large", format!("uploads are limited to {limit} bytes"))
    }

    /// Maps a pipeline error; `field` names the request member the
    /// parameters came from.
    fn from_core(e: Error, field: &str) -> Self {
        match e {
            Error::Parameter(m) => Self::field(field, m),
            Error::UnknownColor { name, valid } => {
                let mut err = Self::field("colors", format!("unknown color '{name}'; valid names: {}", valid.join(", ")));
                err.body["valid"] = json!(valid);
                err
            }
            other => {
                let mut err = Self::new(StatusCode::INTERNAL_SERVER_ERROR, "processing_failed", other.to_string());
                err.body["reason"] = json!(reason_code(&other));
                err
            }
        }
    }
}

fn reason_code(e: &Error) -> &'static str {
    match e {
        Error::Decode { .. } => "decode_error",
        Error::Unsupported(_) => "unsupported",
        Error::KindMismatch { .. } => "kind_mismatch",
        Error::Parameter(_) => "invalid_parameter",
        Error::UnknownColor { .. } => "unknown_color",
        Error::ColorTable(_) => "color_table",
        Error::DegeneratePolygon(_) => "degenerate_polygon",
        Error::InsufficientData { .. } => "insufficient_data",
        Error::EstimationFailure(_) => "estimation_failure",
        Error::PointAtInfinity { .. } => "point_at_infinity",
        Error::Io { .. } => "io_error",
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        json_response(self.status, &self.body)
    }
}

fn json_response(status: StatusCode, body: &Value) -> Response {
    (
        status,
        [(header::CONTENT_TYPE, HeaderValue::from_static("application/json"))],
        to_canonical_json(body),
    )
        .into_response()
}

type ApiResult = Result<Response, ApiError>;

/// Decodes a JSON body, reporting the path of the offending member.
fn parse_body<T: DeserializeOwned>(body: &[u8]) -> Result<T, ApiError> {
    let mut de = serde_json::Deserializer::from_slice(body);
    serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        let field = if path == "." { "body".to_string() } else { path };
        ApiError::field(&field, e.into_inner().to_string())
    })
}

fn pin(state: &AppState, id: &str) -> Result<Pinned, ApiError> {
    state.store.pin(id).ok_or_else(|| ApiError::not_found(id))
}

/// Runs `job` off the async workers under the request deadline.
async fn compute<T, F>(state: &AppState, job: F) -> Result<T, ApiError>
where
    T: Send + 'static,
    F: FnOnce() -> Result<T, ApiError> + Send + 'static,
{
    match tokio::time::timeout(state.deadline, tokio::task::spawn_blocking(job)).await {
        Err(_) => Err(ApiError::new(
            StatusCode::SERVICE_UNAVAILABLE,
            "deadline_exceeded",
            format!("request exceeded the {:.1} s deadline", state.deadline.as_secs_f64()),
        )),
        Ok(Err(join)) => {
            let mut err = ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "processing_failed", join.to_string());
            err.body["reason"] = json!("worker_failed");
            Err(err)
        }
        Ok(Ok(result)) => result,
    }
}

fn store_annotated(state: &AppState, parts: &[&str], annotated: RasterImage, report: Value) -> Response {
    let id = state.derived_id(parts);
    let size = annotated.data().len();
    state.store.put_with_id(&id, annotated, size);
    json_response(StatusCode::OK, &with_field(report, "annotated_id", json!(id)))
}

async fn upload(State(state): State<AppState>, mut multipart: Multipart) -> ApiResult {
    let mut bytes = None;
    while let Some(field) = multipart.next_field().await.map_err(multipart_error)? {
        if field.file_name().is_some() || matches!(field.name(), Some("image" | "file")) {
            bytes = Some(field.bytes().await.map_err(multipart_error)?);
            break;
        }
    }
    let bytes = bytes.ok_or_else(|| ApiError::field("image", "no image part in the upload"))?;
    if bytes.len() > state.upload_limit {
        return Err(ApiError::too_large(state.upload_limit));
    }
    let size = bytes.len();
    let pixels = compute(&state, move || {
        decode_any(&bytes).map(|img| to_rgb(&img)).map_err(|e| ApiError::field("image", e.to_string()))
    })
    .await?;
    let stored = state.store.put(pixels, size);
    Ok(json_response(
        StatusCode::CREATED,
        &json!({ "id": stored.id, "width": stored.pixels.width(), "height": stored.pixels.height() }),
    ))
}

fn multipart_error(e: axum::extract::multipart::MultipartError) -> ApiError {
    if e.status() == StatusCode::PAYLOAD_TOO_LARGE {
        ApiError::new(StatusCode::PAYLOAD_TOO_LARGE, "payload_too_large", e.body_text())
    } else {
        ApiError::field("image", e.body_text())
    }
}

async fn colors(State(state): State<AppState>) -> Response {
    let colors: Vec<Value> = state
        .table
        .ranges()
        .iter()
        .map(|r| json!({ "name": r.name, "highlight": r.highlight, "min": r.min, "max": r.max }))
        .collect();
    json_response(StatusCode::OK, &json!({ "colors": colors }))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ColorRequest {
    image_id: String,
    colors: Vec<String>,
    #[serde(default)]
    params: ColorParams,
}

async fn detect_color(State(state): State<AppState>, body: Bytes) -> ApiResult {
    let req: ColorRequest = parse_body(&body)?;
    if req.colors.is_empty() {
        return Err(ApiError::field("colors", "select at least one color"));
    }
    for name in &req.colors {
        state.table.get(name).map_err(|e| ApiError::from_core(e, "colors"))?;
    }
    let image = pin(&state, &req.image_id)?;
    let table = state.table.clone();
    let (colors, params) = (req.colors.clone(), req.params.clone());
    let (annotated, report) = compute(&state, move || {
        let result = detect_color_objects(&image.pixels, &colors, &params, &table).map_err(|e| ApiError::from_core(e, "params"))?;
        let report = color_report(&image.pixels, &result, &params);
        Ok((result.annotated, report))
    })
    .await?;
    let key = to_canonical_json(&report["params"]);
    Ok(store_annotated(&state, &["color", &req.image_id, &req.colors.join("\n"), &key], annotated, report))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ShapeRequest {
    image_id: String,
    shapes: Vec<String>,
    #[serde(default)]
    params: ShapeParams,
}

async fn detect_shape(State(state): State<AppState>, body: Bytes) -> ApiResult {
    let req: ShapeRequest = parse_body(&body)?;
    let wanted = req
        .shapes
        .iter()
        .map(|s| ShapeKind::parse(s))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| ApiError::from_core(e, "shapes"))?;
    if wanted.is_empty() {
        return Err(ApiError::field("shapes", "select at least one shape"));
    }
    let image = pin(&state, &req.image_id)?;
    let params = req.params.clone();
    let names: Vec<&str> = wanted.iter().map(|k| k.name()).collect();
    let (annotated, report) = compute(&state, move || {
        let result = detect_shapes(&image.pixels, &wanted, &params).map_err(|e| ApiError::from_core(e, "params"))?;
        let report = shape_report(&image.pixels, &result, &params);
        Ok((result.annotated, report))
    })
    .await?;
    let key = to_canonical_json(&report["params"]);
    Ok(store_annotated(&state, &["shape", &req.image_id, &names.join("\n"), &key], annotated, report))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MatchRequest {
    object_id: String,
    scene_id: String,
    #[serde(default)]
    params: MatchParams,
    seed: Option<u64>,
}

async fn match_objects(State(state): State<AppState>, body: Bytes) -> ApiResult {
    let req: MatchRequest = parse_body(&body)?;
    let mut params = req.params;
    if let Some(seed) = req.seed {
        params.seed = seed;
    }
    params.validate().map_err(|e| ApiError::from_core(e, "params"))?;
    let object = pin(&state, &req.object_id)?;
    let scene = pin(&state, &req.scene_id)?;
    let (annotated, report) = compute(&state, move || {
        let result = detect_object(&object.pixels, &scene.pixels, &params).map_err(|e| ApiError::from_core(e, "params"))?;
        let report = match_report(&object.pixels, &scene.pixels, &result, &params);
        Ok((result.annotated, report))
    })
    .await?;
    let key = to_canonical_json(&report["params"]);
    Ok(store_annotated(&state, &["match", &req.object_id, &req.scene_id, &key], annotated, report))
}

async fn image_png(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult {
    let image = pin(&state, &id)?;
    let png = compute(&state, move || {
        encode(&image.pixels, ImageFormat::Png).map_err(|e| ApiError::from_core(e, "image"))
    })
    .await?;
    Ok(([(header::CONTENT_TYPE, HeaderValue::from_static("image/png"))], png).into_response())
}

async fn delete_image(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult {
    if state.store.delete(&id) {
        Ok(StatusCode::NO_CONTENT.into_response())
    } else {
        Err(ApiError::not_found(&id))
    }
}

async fn unknown_api() -> ApiError {
    ApiError::new(StatusCode::NOT_FOUND, "not_found", "no such endpoint")
}

pub fn router(config: &ServiceConfig) -> Router {
    router_with_state(AppState::new(config), config)
}

pub fn router_with_state(state: AppState, config: &ServiceConfig) -> Router {
    let cors = CorsLayer::new()
        .allow_methods(Any)
        .allow_headers(Any)
        .allow_origin(match &config.cors_origin {
            Some(origin) => match HeaderValue::from_str(origin) {
                Ok(v) => AllowOrigin::exact(v),
                Err(_) => AllowOrigin::any(),
            },
            None => AllowOrigin::any(),
        });
    let api = Router::new()
        .route("/images", post(upload))
        .route("/images/{id}", get(image_png).delete(delete_image))
        .route("/colors", get(colors))
        .route("/detect/color", post(detect_color))
        .route("/detect/shape", post(detect_shape))
        .route("/match", post(match_objects))
        .fallback(unknown_api)
        .layer(DefaultBodyLimit::max(config.upload_limit + MULTIPART_OVERHEAD))
        .with_state(state);
    let app = Router::new().nest("/api", api);
    let app = match &config.static_dir {
        Some(dir) => app.fallback_service(ServeDir::new(dir)),
        None => app,
    };
    app.layer(cors)
}
