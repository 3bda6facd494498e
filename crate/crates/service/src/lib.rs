//! HTTP facade over the color, shape and feature-matching pipelines.

pub mod api;
pub mod store;

use std::path::PathBuf;
use std::time::Duration;

use clap::Parser;
use objdetect::color::ColorTable;

pub use api::{router, router_with_state, AppState, ServiceConfig};
pub use store::{ImageStore, Pinned, StoredImage};

#[derive(Debug, Parser)]
#[command(name = "objdetect-serve", version, about = "Serve the objdetect pipelines over HTTP")]
pub struct Args {
    #[arg(long, env = "OBJDETECT_BIND", default_value = "127.0.0.1:8080")]
    pub bind: String,
    /// Largest accepted upload, in bytes.
    #[arg(long, env = "OBJDETECT_UPLOAD_LIMIT", default_value_t = 20 * 1024 * 1024)]
    pub upload_limit: usize,
    /// Images kept before the least recently used is evicted.
    #[arg(long, env = "OBJDETECT_CAPACITY", default_value_t = 64, value_parser = clap::value_parser!(u64).range(1..))]
    pub capacity: u64,
    /// JSON color table replacing the built-in one.
    #[arg(long, env = "OBJDETECT_TABLE")]
    pub table: Option<PathBuf>,
    /// Per-request deadline in seconds.
    #[arg(long, env = "OBJDETECT_DEADLINE", default_value_t = 30.0)]
    pub deadline: f64,
    /// Origin allowed by CORS; any origin when omitted.
    #[arg(long, env = "OBJDETECT_CORS_ORIGIN")]
    pub cors_origin: Option<String>,
    /// Directory of static files (the browser UI).
    #[arg(long, env = "OBJDETECT_STATIC")]
    pub static_dir: Option<PathBuf>,
}

impl Args {
    pub fn config(&self) -> objdetect::error::Result<ServiceConfig> {
        let table = match &self.table {
            Some(path) => ColorTable::load(path)?,
            None => ColorTable::default(),
        };
        if !(self.deadline.is_finite() && self.deadline > 0.0) {
            return Err(objdetect::error::Error::Parameter("deadline must be a positive number of seconds".into()));
        }
        Ok(ServiceConfig {
            upload_limit: self.upload_limit,
            capacity: self.capacity as usize,
            deadline: Duration::from_secs_f64(self.deadline),
            table,
            cors_origin: self.cors_origin.clone(),
            static_dir: self.static_dir.clone(),
        })
    }
}
