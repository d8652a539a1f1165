//! Feature / function / user-flow hierarchy and the canonical feature document.
//!
//! A feature document is a UTF-8 JSON object:
//!
//! ```json
//! {
//!   "feature_id": "wemusic-friend-activity",
//!   "name": "Friend Activity",
//!   "functions": [{
//!     "function_id": "private-session",
//!     "name": "Start a private listening session",
//!     "flows": [{
//!       "flow_id": "ps-enjoy",
//!       "title": "Enjoying private listening via Private Session",
//!       "steps": [{ "step": 1, "action": "...", "interface": "...", "system_action": "..." }],
//!       "endpoint": false,
//!       "false_reasoning": "..."
//!     }]
//!   }]
//! }
//! ```
//!
//! The canonical form is the pretty-printed document with the field order above
//! and a trailing newline; `system_action` and the unused reasoning field are
//! omitted when absent.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::report::{ValidationReport, Violation, ViolationKind};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSpec {
    pub feature_id: String,
    pub name: String,
    pub functions: Vec<FunctionSpec>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunctionSpec {
    pub function_id: String,
    pub name: String,
    pub flows: Vec<UserFlow>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserFlow {
    pub flow_id: String,
    pub title: String,
    pub steps: Vec<FlowStep>,
    /// Whether the flow concludes successfully.
    pub endpoint: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub true_reasoning: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub false_reasoning: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlowStep {
    pub step: u32,
    pub action: String,
    pub interface: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system_action: Option<String>,
}

/// Address of one step: `function_id / flow_id / step` (1-based).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct StepRef {
    pub function_id: String,
    pub flow_id: String,
    pub step: u32,
}

impl StepRef {
    pub fn new(function_id: impl Into<String>, flow_id: impl Into<String>, step: u32) -> Self {
        Self {
            function_id: function_id.into(),
            flow_id: flow_id.into(),
            step,
        }
    }
}

impl fmt::Display for StepRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}#{}", self.function_id, self.flow_id, self.step)
    }
}

impl UserFlow {
    /// The outcome text matching the endpoint flag, if present.
    pub fn outcome_reasoning(&self) -> Option<&str> {
        if self.endpoint {
            self.true_reasoning.as_deref()
        } else {
            self.false_reasoning.as_deref()
        }
    }
}

impl FunctionSpec {
    pub fn flow(&self, flow_id: &str) -> Option<&UserFlow> {
        self.flows.iter().find(|f| f.flow_id == flow_id)
    }
}

impl FeatureSpec {
    pub fn function(&self, function_id: &str) -> Option<&FunctionSpec> {
        self.functions.iter().find(|f| f.function_id == function_id)
    }

    pub fn flow(&self, function_id: &str, flow_id: &str) -> Option<&UserFlow> {
        self.function(function_id)?.flow(flow_id)
    }

    /// Every addressable step, in document order.
    pub fn step_refs(&self) -> impl Iterator<Item = StepRef> + '_ {
        self.functions.iter().flat_map(|func| {
            func.flows.iter().flat_map(move |flow| {
                (1..=flow.steps.len() as u32).map(move |i| StepRef::new(&func.function_id, &flow.flow_id, i))
            })
        })
    }

    pub fn step_count(&self) -> usize {
        self.functions
            .iter()
            .flat_map(|f| &f.flows)
            .map(|f| f.steps.len())
            .sum()
    }
}

#[derive(Debug, Error)]
pub enum FlowError {
    #[error("MalformedDocument: {0}")]
    MalformedDocument(String),
    #[error("{}: feature document failed validation\n{report}", report.first_kind().map(|k| k.name()).unwrap_or("Invalid"))]
    Invalid { report: ValidationReport },
    #[error("UnknownFunction: {0}")]
    UnknownFunction(String),
    #[error("UnknownFlow: {function_id}/{flow_id}")]
    UnknownFlow { function_id: String, flow_id: String },
    #[error("StepOutOfRange: {step_ref} (flow has {len} steps)")]
    StepOutOfRange { step_ref: StepRef, len: usize },
}

impl FlowError {
    pub fn name(&self) -> &'static str {
        match self {
            FlowError::MalformedDocument(_) => "MalformedDocument",
            FlowError::Invalid { report } => report.first_kind().map(|k| k.name()).unwrap_or("Invalid"),
            FlowError::UnknownFunction(_) => "UnknownFunction",
            FlowError::UnknownFlow { .. } => "UnknownFlow",
            FlowError::StepOutOfRange { .. } => "StepOutOfRange",
        }
    }

    pub fn report(&self) -> Option<&ValidationReport> {
        match self {
            FlowError::Invalid { report } => Some(report),
            _ => None,
        }
    }
}

// Lenient mirror of the document used while parsing, so that absent fields are
// reported as violations rather than as syntax errors.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFeature {
    feature_id: Option<String>,
    name: Option<String>,
    functions: Option<Vec<RawFunction>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFunction {
    function_id: Option<String>,
    name: Option<String>,
    flows: Option<Vec<RawFlow>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFlow {
    flow_id: Option<String>,
    title: Option<String>,
    steps: Option<Vec<RawStep>>,
    endpoint: Option<bool>,
    true_reasoning: Option<String>,
    false_reasoning: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStep {
    step: Option<u32>,
    action: Option<String>,
    interface: Option<String>,
    system_action: Option<String>,
}

/// Parse and validate a feature document.
pub fn parse_feature_document(raw: &str) -> Result<FeatureSpec, FlowError> {
    let de = &mut serde_json::Deserializer::from_str(raw);
    let doc: RawFeature = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        FlowError::MalformedDocument(format!("{path}: {}", e.inner()))
    })?;

    let mut report = ValidationReport::new();
    let mut missing = |field: String| {
        report.push(Violation::new(ViolationKind::MissingField, field.clone(), format!("`{field}` is absent")));
    };

    let functions = doc.functions.unwrap_or_else(|| {
        missing("functions".into());
        Vec::new()
    });
    let mut spec = FeatureSpec {
        feature_id: doc.feature_id.unwrap_or_default(),
        name: doc.name.unwrap_or_default(),
        functions: Vec::with_capacity(functions.len()),
    };
    for (fi, func) in functions.into_iter().enumerate() {
        let flows = func.flows.unwrap_or_else(|| {
            missing(format!("functions[{fi}].flows"));
            Vec::new()
        });
        let mut out = FunctionSpec {
            function_id: func.function_id.unwrap_or_default(),
            name: func.name.unwrap_or_default(),
            flows: Vec::with_capacity(flows.len()),
        };
        for (li, flow) in flows.into_iter().enumerate() {
            let steps = flow.steps.unwrap_or_else(|| {
                missing(format!("functions[{fi}].flows[{li}].steps"));
                Vec::new()
            });
            let endpoint = flow.endpoint.unwrap_or_else(|| {
                missing(format!("functions[{fi}].flows[{li}].endpoint"));
                false
            });
            let mut steps_out = Vec::with_capacity(steps.len());
            for (si, step) in steps.into_iter().enumerate() {
                let number = step.step.unwrap_or_else(|| {
                    missing(format!("functions[{fi}].flows[{li}].steps[{si}].step"));
                    0
                });
                steps_out.push(FlowStep {
                    step: number,
                    action: step.action.unwrap_or_default(),
                    interface: step.interface.unwrap_or_default(),
                    system_action: step.system_action,
                });
            }
            out.flows.push(UserFlow {
                flow_id: flow.flow_id.unwrap_or_default(),
                title: flow.title.unwrap_or_default(),
                steps: steps_out,
                endpoint,
                true_reasoning: flow.true_reasoning,
                false_reasoning: flow.false_reasoning,
            });
        }
        spec.functions.push(out);
    }

    report.extend(validate_feature(&spec));
    if report.is_empty() {
        Ok(spec)
    } else {
        Err(FlowError::Invalid { report })
    }
}

/// Serialize to the canonical document form.
pub fn to_canonical_document(spec: &FeatureSpec) -> String {
    let mut out = serde_json::to_string_pretty(spec).expect("feature specs always serialize");
    out.push('\n');
    out
}

fn blank(s: &str) -> bool {
    s.trim().is_empty()
}

/// Check every structural invariant; an empty report means the spec is valid.
pub fn validate_feature(spec: &FeatureSpec) -> ValidationReport {
    let mut report = ValidationReport::new();
    let missing = |field: String, what: &str| {
        Violation::new(ViolationKind::MissingField, field, format!("{what} must be non-empty"))
    };

    if blank(&spec.feature_id) {
        report.push(missing("feature_id".into(), "feature_id"));
    }
    if blank(&spec.name) {
        report.push(missing("name".into(), "name"));
    }
    if spec.functions.is_empty() {
        report.push(missing("functions".into(), "functions"));
    }

    let mut function_ids = HashSet::new();
    for (fi, func) in spec.functions.iter().enumerate() {
        let fpath = format!("functions[{fi}]");
        if blank(&func.function_id) {
            report.push(missing(format!("{fpath}.function_id"), "function_id"));
        } else if !function_ids.insert(func.function_id.as_str()) {
            report.push(Violation::new(
                ViolationKind::DuplicateId,
                format!("{fpath}.function_id"),
                format!("function_id `{}` is repeated", func.function_id),
            ));
        }
        if blank(&func.name) {
            report.push(missing(format!("{fpath}.name"), "name"));
        }
        if func.flows.is_empty() {
            report.push(missing(format!("{fpath}.flows"), "flows"));
        }

        let mut flow_ids = HashSet::new();
        for (li, flow) in func.flows.iter().enumerate() {
            let lpath = format!("{fpath}.flows[{li}]");
            if blank(&flow.flow_id) {
                report.push(missing(format!("{lpath}.flow_id"), "flow_id"));
            } else if !flow_ids.insert(flow.flow_id.as_str()) {
                report.push(Violation::new(
                    ViolationKind::DuplicateId,
                    format!("{lpath}.flow_id"),
                    format!("flow_id `{}` is repeated within function `{}`", flow.flow_id, func.function_id),
                ));
            }
            if blank(&flow.title) {
                report.push(missing(format!("{lpath}.title"), "title"));
            }
            if flow.steps.is_empty() {
                report.push(missing(format!("{lpath}.steps"), "steps"));
            }
            if let Some(si) = flow.steps.iter().enumerate().position(|(i, s)| s.step as usize != i + 1) {
                let found: Vec<String> = flow.steps.iter().map(|s| s.step.to_string()).collect();
                report.push(
                    Violation::new(
                        ViolationKind::NonContiguousSteps,
                        format!("{lpath}.steps[{si}].step"),
                        format!("step numbers must be 1..{}, found [{}]", flow.steps.len(), found.join(", ")),
                    )
                    .at_step(StepRef::new(&func.function_id, &flow.flow_id, si as u32 + 1)),
                );
            }

            let has_true = flow.true_reasoning.as_deref().is_some_and(|s| !blank(s));
            let has_false = flow.false_reasoning.as_deref().is_some_and(|s| !blank(s));
            match (flow.endpoint, has_true, has_false) {
                (_, true, true) => report.push(Violation::new(
                    ViolationKind::AmbiguousOutcome,
                    lpath.clone(),
                    "true_reasoning and false_reasoning are mutually exclusive",
                )),
                (true, true, false) | (false, false, true) => {}
                (endpoint, _, _) => {
                    let field = if endpoint { "true_reasoning" } else { "false_reasoning" };
                    report.push(Violation::new(
                        ViolationKind::MissingOutcome,
                        format!("{lpath}.{field}"),
                        format!("endpoint is {endpoint} so `{field}` is required"),
                    ));
                }
            }

            for (si, step) in flow.steps.iter().enumerate() {
                let at = StepRef::new(&func.function_id, &flow.flow_id, si as u32 + 1);
                let spath = format!("{lpath}.steps[{si}]");
                if blank(&step.action) {
                    report.push(missing(format!("{spath}.action"), "action").at_step(at.clone()));
                }
                if blank(&step.interface) {
                    report.push(missing(format!("{spath}.interface"), "interface").at_step(at));
                }
            }
        }
    }
    report
}

/// Resolve a step reference against a feature.
pub fn lookup_step<'a>(spec: &'a FeatureSpec, step_ref: &StepRef) -> Result<&'a FlowStep, FlowError> {
    let func = spec
        .function(&step_ref.function_id)
        .ok_or_else(|| FlowError::UnknownFunction(step_ref.function_id.clone()))?;
    let flow = func.flow(&step_ref.flow_id).ok_or_else(|| FlowError::UnknownFlow {
        function_id: step_ref.function_id.clone(),
        flow_id: step_ref.flow_id.clone(),
    })?;
    let index = step_ref.step as usize;
    if index == 0 || index > flow.steps.len() {
        return Err(FlowError::StepOutOfRange {
            step_ref: step_ref.clone(),
            len: flow.steps.len(),
        });
    }
    Ok(&flow.steps[index - 1])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> FeatureSpec {
        FeatureSpec {
            feature_id: "f".into(),
            name: "Feature".into(),
            functions: vec![FunctionSpec {
                function_id: "fn".into(),
                name: "Function".into(),
                flows: vec![UserFlow {
                    flow_id: "a".into(),
                    title: "Flow A".into(),
                    steps: (1..=3)
                        .map(|i| FlowStep {
                            step: i,
                            action: format!("act {i}"),
                            interface: format!("screen {i}"),
                            system_action: None,
                        })
                        .collect(),
                    endpoint: true,
                    true_reasoning: Some("done".into()),
                    false_reasoning: None,
                }],
            }],
        }
    }

    #[test]
    fn valid_spec_has_empty_report() {
        assert!(validate_feature(&small()).is_empty());
    }

    #[test]
    fn gap_in_numbering_is_one_violation() {
        let mut spec = small();
        spec.functions[0].flows[0].steps[2].step = 4;
        let report = validate_feature(&spec);
        assert_eq!(report.kinds(), vec![ViolationKind::NonContiguousSteps]);
        assert_eq!(report.violations[0].step, Some(StepRef::new("fn", "a", 3)));
    }

    #[test]
    fn outcome_rules() {
        let mut spec = small();
        spec.functions[0].flows[0].false_reasoning = Some("also".into());
        assert_eq!(validate_feature(&spec).kinds(), vec![ViolationKind::AmbiguousOutcome]);

        let mut spec = small();
        spec.functions[0].flows[0].endpoint = false;
        assert_eq!(validate_feature(&spec).kinds(), vec![ViolationKind::MissingOutcome]);
    }

    #[test]
    fn empty_steps_rejected_on_parse() {
        let doc = r#"{"feature_id":"f","name":"F","functions":[{"function_id":"x","name":"X",
            "flows":[{"flow_id":"a","title":"A","steps":[],"endpoint":true,"true_reasoning":"ok"}]}]}"#;
        let err = parse_feature_document(doc).unwrap_err();
        assert_eq!(err.name(), "MissingField");
        assert_eq!(err.report().unwrap().violations[0].field, "functions[0].flows[0].steps");
    }

    #[test]
    fn missing_action_is_reported_with_step() {
        let doc = r#"{"feature_id":"f","name":"F","functions":[{"function_id":"x","name":"X",
            "flows":[{"flow_id":"a","title":"A","steps":[{"step":1,"interface":"s"}],"endpoint":true,"true_reasoning":"ok"}]}]}"#;
        let err = parse_feature_document(doc).unwrap_err();
        let report = err.report().unwrap();
        assert_eq!(report.kinds(), vec![ViolationKind::MissingField]);
        assert_eq!(report.violations[0].step, Some(StepRef::new("x", "a", 1)));
    }

    #[test]
    fn duplicate_flow_ids() {
        let mut spec = small();
        let dup = spec.functions[0].flows[0].clone();
        spec.functions[0].flows.push(dup);
        assert_eq!(validate_feature(&spec).kinds(), vec![ViolationKind::DuplicateId]);
    }

    #[test]
    fn syntax_errors_are_malformed() {
        assert_eq!(parse_feature_document("{").unwrap_err().name(), "MalformedDocument");
        assert_eq!(
            parse_feature_document(r#"{"feature_id":"f","bogus":1}"#).unwrap_err().name(),
            "MalformedDocument"
        );
    }

    #[test]
    fn lookup_bounds() {
        let spec = small();
        assert_eq!(lookup_step(&spec, &StepRef::new("fn", "a", 2)).unwrap().action, "act 2");
        assert_eq!(lookup_step(&spec, &StepRef::new("fn", "a", 0)).unwrap_err().name(), "StepOutOfRange");
        assert_eq!(lookup_step(&spec, &StepRef::new("fn", "a", 4)).unwrap_err().name(), "StepOutOfRange");
        assert_eq!(lookup_step(&spec, &StepRef::new("fn", "b", 1)).unwrap_err().name(), "UnknownFlow");
        assert_eq!(lookup_step(&spec, &StepRef::new("zz", "a", 1)).unwrap_err().name(), "UnknownFunction");
    }
}
