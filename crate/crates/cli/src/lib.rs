//! The `objdetect` command line: `color`, `shape` and `match` subcommands.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{ArgGroup, Args, Parser, Subcommand};
use objdetect::color::{detect_color_objects, ColorParams, ColorTable};
use objdetect::features::{detect_object, MatchParams};
use objdetect::image::RasterImage;
use objdetect::io::{read_image, write_image};
use objdetect::report::{color_report, match_report, shape_report, write_result_json};
use objdetect::shape::{detect_shapes, ShapeKind, ShapeParams};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;
use thiserror::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_PROCESSING: i32 = 3;
pub const EXIT_NOT_FOUND: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Processing(objdetect::error::Error),
    #[error("{path}: {source}")]
    Input {
        path: String,
        #[source]
        source: objdetect::error::Error,
    },
}

impl From<objdetect::error::Error> for CliError {
    fn from(e: objdetect::error::Error) -> Self {
        use objdetect::error::Error;
        match e {
            Error::Parameter(_) | Error::UnknownColor { .. } => CliError::Usage(e.to_string()),
            other => CliError::Processing(other),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Processing(_) | CliError::Input { .. } => EXIT_PROCESSING,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "objdetect", version, about = "Detect objects in images by color, shape or local features")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Find regions whose HSV values fall in named color ranges.
    Color(ColorArgs),
    /// Find circles, triangles, squares and rectangles.
    Shape(ShapeArgs),
    /// Locate an object image inside a scene image.
    Match(MatchArgs),
}

#[derive(Debug, Args)]
pub struct Outputs {
    /// Annotated image (.ppm, .pgm or .png).
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Result document.
    #[arg(long, value_name = "PATH")]
    pub json: Option<PathBuf>,
    /// Override any parameter by name; repeatable.
    #[arg(long = "param", value_name = "KEY=VALUE")]
    pub params: Vec<String>,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("output").args(["out", "json"]).required(true).multiple(true)))]
pub struct ColorArgs {
    #[arg(long, value_name = "PATH")]
    pub image: PathBuf,
    /// Comma-separated color names, case-insensitive.
    #[arg(long, value_delimiter = ',', required = true, value_name = "C1,C2")]
    pub colors: Vec<String>,
    /// JSON color table replacing the built-in one.
    #[arg(long, env = "OBJDETECT_TABLE", value_name = "PATH")]
    pub table: Option<PathBuf>,
    #[arg(long, value_name = "N")]
    pub min_area: Option<f64>,
    #[arg(long, value_name = "X")]
    pub sigma: Option<f64>,
    #[command(flatten)]
    pub outputs: Outputs,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("output").args(["out", "json"]).required(true).multiple(true)))]
pub struct ShapeArgs {
    #[arg(long, value_name = "PATH")]
    pub image: PathBuf,
    /// Comma-separated shape names: Circle, Triangle, Square, Rectangle, Other.
    #[arg(long, value_delimiter = ',', required = true, value_name = "S1,S2")]
    pub shapes: Vec<String>,
    /// Polygon simplification tolerance as a fraction of the perimeter.
    #[arg(long, value_name = "X")]
    pub dp_eps: Option<f64>,
    #[arg(long, value_name = "N")]
    pub r_min: Option<usize>,
    #[arg(long, value_name = "N")]
    pub r_max: Option<usize>,
    #[command(flatten)]
    pub outputs: Outputs,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("output").args(["out", "json"]).required(true).multiple(true)))]
pub struct MatchArgs {
    #[arg(long, value_name = "PATH")]
    pub object: PathBuf,
    #[arg(long, value_name = "PATH")]
    pub scene: PathBuf,
    /// FAST threshold of the keypoint detector.
    #[arg(long, value_name = "N")]
    pub threshold: Option<u32>,
    #[arg(long, value_name = "N")]
    pub max_good: Option<usize>,
    /// RANSAC seed.
    #[arg(long, value_name = "N")]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub outputs: Outputs,
}

/// Applies `key=value` overrides to a parameter struct. Values parse as
/// JSON, falling back to a bare string.
pub fn apply_overrides<T: Serialize + DeserializeOwned>(params: T, overrides: &[String]) -> Result<T, CliError> {
    if overrides.is_empty() {
        return Ok(params);
    }
    let Value::Object(mut map) = serde_json::to_value(&params).expect("parameters serialize") else {
        unreachable!("parameter structs serialize to objects")
    };
    for item in overrides {
        let (key, raw) = item
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("--param expects KEY=VALUE, got '{item}'")))?;
        let key = key.trim();
        if !map.contains_key(key) {
            let mut known: Vec<&String> = map.keys().collect();
            known.sort();
            let known: Vec<&str> = known.iter().map(|k| k.as_str()).collect();
            return Err(CliError::Usage(format!(
                "unknown parameter '{key}'; known parameters: {}",
                known.join(", ")
            )));
        }
        let value = serde_json::from_str(raw.trim()).unwrap_or_else(|_| Value::String(raw.to_string()));
        map.insert(key.to_string(), value);
    }
    serde_json::from_value(Value::Object(map)).map_err(|e| CliError::Usage(format!("invalid parameter value: {e}")))
}

fn load(path: &Path) -> Result<RasterImage, CliError> {
    let image = read_image(path).map_err(|e| match e {
        objdetect::error::Error::Io { .. } => CliError::Processing(e),
        source => CliError::Input {
            path: path.display().to_string(),
            source,
        },
    })?;
    Ok(objdetect::convert::to_rgb(&image))
}

fn write_outputs(outputs: &Outputs, annotated: &RasterImage, doc: &Value) -> Result<(), CliError> {
    if let Some(path) = &outputs.out {
        write_image(path, annotated)?;
    }
    if let Some(path) = &outputs.json {
        write_result_json(doc, path)?;
    }
    Ok(())
}

/// Exit code plus an optional line for `stderr`.
pub type Outcome = (i32, Option<String>);

fn run_color(args: &ColorArgs) -> Result<Outcome, CliError> {
    let mut params = apply_overrides(ColorParams::default(), &args.outputs.params)?;
    if let Some(v) = args.min_area {
        params.min_area = v;
    }
    if let Some(v) = args.sigma {
        params.sigma = v;
    }
    let table = match &args.table {
        Some(path) => ColorTable::load(path).map_err(CliError::Processing)?,
        None => ColorTable::default(),
    };
    let colors: Vec<&str> = args.colors.iter().map(|c| c.trim()).filter(|c| !c.is_empty()).collect();
    if colors.is_empty() {
        return Err(CliError::Usage("--colors needs at least one name".into()));
    }
    for c in &colors {
        table.get(c)?;
    }
    let image = load(&args.image)?;
    let result = detect_color_objects(&image, &colors, &params, &table)?;
    write_outputs(&args.outputs, &result.annotated, &color_report(&image, &result, &params))?;
    Ok((EXIT_OK, None))
}

fn run_shape(args: &ShapeArgs) -> Result<Outcome, CliError> {
    let mut params = apply_overrides(ShapeParams::default(), &args.outputs.params)?;
    if let Some(v) = args.dp_eps {
        params.dp_epsilon_factor = v;
    }
    if let Some(v) = args.r_min {
        params.r_min = v;
    }
    if let Some(v) = args.r_max {
        params.r_max = Some(v);
    }
    let wanted = args
        .shapes
        .iter()
        .filter(|s| !s.trim().is_empty())
        .map(|s| ShapeKind::parse(s))
        .collect::<Result<Vec<_>, _>>()?;
    if wanted.is_empty() {
        return Err(CliError::Usage("--shapes needs at least one name".into()));
    }
    let image = load(&args.image)?;
    let result = detect_shapes(&image, &wanted, &params)?;
    write_outputs(&args.outputs, &result.annotated, &shape_report(&image, &result, &params))?;
    Ok((EXIT_OK, None))
}

fn run_match(args: &MatchArgs) -> Result<Outcome, CliError> {
    let mut params = apply_overrides(MatchParams::default(), &args.outputs.params)?;
    if let Some(v) = args.threshold {
        params.threshold = v;
    }
    if let Some(v) = args.max_good {
        params.max_good = v;
    }
    if let Some(v) = args.seed {
        params.seed = v;
    }
    params.validate()?;
    let object = load(&args.object)?;
    let scene = load(&args.scene)?;
    let result = detect_object(&object, &scene, &params)?;
    write_outputs(&args.outputs, &result.annotated, &match_report(&object, &scene, &result, &params))?;
    Ok(match result.reason {
        Some(reason) if !result.found => (EXIT_NOT_FOUND, Some(format!("object not found: {}", reason.code()))),
        _ => (EXIT_OK, None),
    })
}

pub fn execute(cli: &Cli) -> Result<Outcome, CliError> {
    match &cli.command {
        Command::Color(a) => run_color(a),
        Command::Shape(a) => run_shape(a),
        Command::Match(a) => run_match(a),
    }
}

/// Parses `argv`, runs the subcommand and reports on `stdout`/`stderr`.
pub fn run<I, T>(argv: I, stdout: &mut impl Write, stderr: &mut impl Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(stderr, "{text}");
                EXIT_USAGE
            } else {
                let _ = write!(stdout, "{text}");
                EXIT_OK
            };
        }
    };
    match execute(&cli) {
        Ok((code, note)) => {
            if let Some(note) = note {
                let _ = writeln!(stderr, "{note}");
            }
            code
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            if matches!(e, CliError::Usage(_)) {
                let _ = writeln!(stderr, "\nFor more information, try '--help'.");
            }
            e.exit_code()
        }
    }
}
