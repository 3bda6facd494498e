pub mod color;
pub mod contours;
pub mod draw;
pub mod convert;
pub mod edges;
pub mod error;
pub mod features;
pub mod filter;
pub mod image;
pub mod io;
pub mod morph;
pub mod geometry;
pub mod report;
pub mod shape;
pub mod synth;
