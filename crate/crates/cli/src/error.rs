//! One error type for the CLI and the HTTP API, carrying the module error
//! name and, for validation failures, the report.

use std::fmt;

use privjourney::coding::CodingError;
use privjourney::config::ConfigError;
use privjourney::fixtures::DemoError;
use privjourney::flow::FlowError;
use privjourney::gateway::{CacheError, GatewayError};
use privjourney::journey::JourneyError;
use privjourney::persona::PersonaError;
use privjourney::storyboard::StoryboardError;
use privjourney::workspace::WorkspaceError;
use privjourney::ValidationReport;
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct AppError {
    #[serde(rename = "error")]
    pub name: String,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<ValidationReport>,
}

impl AppError {
    pub fn new(name: impl Into<String>, message: impl Into<String>) -> Self {
        Self { name: name.into(), message: message.into(), report: None }
    }

    pub fn not_found(kind: &str, id: &str) -> Self {
        Self::new("NotFound", format!("NotFound: no {kind} `{id}`"))
    }

    pub fn bad_request(message: impl Into<String>) -> Self {
        Self::new("BadRequest", message)
    }

    fn with_report(mut self, report: Option<&ValidationReport>) -> Self {
        self.report = report.cloned();
        self
    }

    /// HTTP status for this error.
    pub fn status(&self) -> u16 {
        match self.name.as_str() {
            "NotFound" => 404,
            "CacheMissInReplayMode" => 409,
            "ProviderError" | "GenerationInvalid" => 502,
            "IoError" | "CacheError" | "CorruptEntry" | "DemoError" | "ConfigError" | "CodebookError" | "PersonaData" => 500,
            "BadRequest" => 400,
            _ => 422,
        }
    }
}

impl fmt::Display for AppError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.message.starts_with(&self.name) {
            f.write_str(&self.message)
        } else {
            write!(f, "{}: {}", self.name, self.message)
        }
    }
}

impl std::error::Error for AppError {}

macro_rules! from_named {
    ($($ty:ty),*) => {$(
        impl From<$ty> for AppError {
            fn from(e: $ty) -> Self {
                AppError::new(e.name(), e.to_string())
            }
        }
    )*};
}

from_named!(CodingError, ConfigError, GatewayError, PersonaError);

impl From<CacheError> for AppError {
    fn from(e: CacheError) -> Self {
        GatewayError::from(e).into()
    }
}

impl From<FlowError> for AppError {
    fn from(e: FlowError) -> Self {
        AppError::new(e.name(), e.to_string()).with_report(e.report())
    }
}

impl From<JourneyError> for AppError {
    fn from(e: JourneyError) -> Self {
        let report = match &e {
            JourneyError::InvalidPersona { report, .. } => Some(report),
            _ => None,
        };
        AppError::new(e.name(), e.to_string()).with_report(report)
    }
}

impl From<StoryboardError> for AppError {
    fn from(e: StoryboardError) -> Self {
        let report = match &e {
            StoryboardError::InvalidStory(report) => Some(report),
            _ => None,
        };
        AppError::new(e.name(), e.to_string()).with_report(report)
    }
}

impl From<DemoError> for AppError {
    fn from(e: DemoError) -> Self {
        match e {
            DemoError::Persona(e) => e.into(),
            DemoError::Journey(e) => e.into(),
            DemoError::Gateway(e) => e.into(),
            other => AppError::new("DemoError", other.to_string()),
        }
    }
}

impl From<WorkspaceError> for AppError {
    fn from(e: WorkspaceError) -> Self {
        match e {
            WorkspaceError::Flow(e) => e.into(),
            WorkspaceError::Persona(e) => e.into(),
            WorkspaceError::Coding(e) => e.into(),
            WorkspaceError::Demo(e) => e.into(),
            WorkspaceError::InvalidStory(report) => {
                AppError::new("InvalidStory", format!("InvalidStory: story failed validation\n{report}")).with_report(Some(&report))
            }
            other => AppError::new(other.name(), other.to_string()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn statuses() {
        assert_eq!(AppError::not_found("story", "x").status(), 404);
        assert_eq!(AppError::new("CacheMissInReplayMode", "").status(), 409);
        assert_eq!(AppError::new("ProviderError", "").status(), 502);
        assert_eq!(AppError::new("NonContiguousSteps", "").status(), 422);
        assert_eq!(AppError::new("IoError", "").status(), 500);
    }

    #[test]
    fn display_keeps_a_single_name_prefix() {
        assert_eq!(AppError::not_found("story", "x").to_string(), "NotFound: no story `x`");
        assert_eq!(AppError::bad_request("missing body").to_string(), "BadRequest: missing body");
    }
}
