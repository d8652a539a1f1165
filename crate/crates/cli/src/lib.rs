//! Command-line and HTTP front ends for the privjourney pipeline.

pub mod api;
pub mod error;
pub mod ops;

pub use error::AppError;
