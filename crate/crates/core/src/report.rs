//! Validation reports shared by every validator in the crate.
//!
//! Validators never fail: they return a [`ValidationReport`] listing each
//! invariant violation with a locator pointing at the offending field or step.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::flow::StepRef;

/// Machine-readable violation code. The serialized form is the name reported
/// by the CLI and the HTTP API.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ViolationKind {
    // feature documents
    MissingField,
    DuplicateId,
    NonContiguousSteps,
    MissingOutcome,
    AmbiguousOutcome,
    // personas
    InvalidValue,
    UnknownPersonaType,
    UnknownDimension,
    DanglingCatalogRef,
    UnsourcedEntry,
    // stories
    FeatureMismatch,
    UnknownFunction,
    DuplicateFunction,
    MissingChosenFlow,
    ExtraChosenFlow,
    UnknownFlow,
    DanglingStepRef,
    UnknownHarmCategory,
    UnsupportedLeakCategory,
    IdentityShape,
}

impl ViolationKind {
    pub fn name(self) -> &'static str {
        match self {
            ViolationKind::MissingField => "MissingField",
            ViolationKind::DuplicateId => "DuplicateId",
            ViolationKind::NonContiguousSteps => "NonContiguousSteps",
            ViolationKind::MissingOutcome => "MissingOutcome",
            ViolationKind::AmbiguousOutcome => "AmbiguousOutcome",
            ViolationKind::InvalidValue => "InvalidValue",
            ViolationKind::UnknownPersonaType => "UnknownPersonaType",
            ViolationKind::UnknownDimension => "UnknownDimension",
            ViolationKind::DanglingCatalogRef => "DanglingCatalogRef",
            ViolationKind::UnsourcedEntry => "UnsourcedEntry",
            ViolationKind::FeatureMismatch => "FeatureMismatch",
            ViolationKind::UnknownFunction => "UnknownFunction",
            ViolationKind::DuplicateFunction => "DuplicateFunction",
            ViolationKind::MissingChosenFlow => "MissingChosenFlow",
            ViolationKind::ExtraChosenFlow => "ExtraChosenFlow",
            ViolationKind::UnknownFlow => "UnknownFlow",
            ViolationKind::DanglingStepRef => "DanglingStepRef",
            ViolationKind::UnknownHarmCategory => "UnknownHarmCategory",
            ViolationKind::UnsupportedLeakCategory => "UnsupportedLeakCategory",
            ViolationKind::IdentityShape => "IdentityShape",
        }
    }
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One invariant violation.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    /// Dotted field path, e.g. `functions[1].flows[0].steps[2].action`.
    pub field: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<StepRef>,
    pub message: String,
}

impl Violation {
    pub fn new(kind: ViolationKind, field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            kind,
            field: field.into(),
            step: None,
            message: message.into(),
        }
    }

    pub fn at_step(mut self, step: StepRef) -> Self {
        self.step = Some(step);
        self
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at {}", self.kind, self.field)?;
        if let Some(step) = &self.step {
            write!(f, " ({step})")?;
        }
        write!(f, ": {}", self.message)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, violation: Violation) {
        self.violations.push(violation);
    }

    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn len(&self) -> usize {
        self.violations.len()
    }

    pub fn kinds(&self) -> Vec<ViolationKind> {
        self.violations.iter().map(|v| v.kind).collect()
    }

    pub fn has(&self, kind: ViolationKind) -> bool {
        self.violations.iter().any(|v| v.kind == kind)
    }

    /// Name of the first violation, used as the process-level error name.
    pub fn first_kind(&self) -> Option<ViolationKind> {
        self.violations.first().map(|v| v.kind)
    }

    pub fn extend(&mut self, other: ValidationReport) {
        self.violations.extend(other.violations);
    }

    /// One line per violation. Repair prompts embed this text verbatim.
    pub fn to_lines(&self) -> Vec<String> {
        self.violations.iter().map(ToString::to_string).collect()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for line in self.to_lines() {
            writeln!(f, "- {line}")?;
        }
        Ok(())
    }
}
