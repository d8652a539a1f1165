//! Privacy design review engine: vulnerability-centered personas, speculative
//! journey stories anchored to user-flow steps, annotated storyboards, and
//! codebook-based coding of review findings.

pub mod coding;
pub mod config;
pub mod flow;
pub mod docio;
pub mod fixtures;
pub mod gateway;
pub mod journey;
pub mod persona;
pub mod report;
pub mod storyboard;
pub mod workspace;

pub use flow::{FeatureSpec, FlowStep, FunctionSpec, StepRef, UserFlow};
pub use report::{ValidationReport, Violation, ViolationKind};
