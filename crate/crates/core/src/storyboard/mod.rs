//! Step-aligned storyboards and report rendering.
//!
//! Each step of each chosen flow becomes a panel with a text wireframe, one
//! blue user-action annotation, and one orange design-flaw annotation per
//! design problem on that step. Leak steps are flagged on their panel and
//! rendered as an orange "leak point" marker.

mod render;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::flow::{FeatureSpec, StepRef};
use crate::journey::{validate_story, JourneyStory};
use crate::report::ValidationReport;

pub use render::{parse_structured_report, render_report, ReportDocument, ReportFormat};

#[derive(Debug, Error)]
pub enum StoryboardError {
    #[error("InvalidStory: story fails validation:\n{0}")]
    InvalidStory(ValidationReport),
    #[error("InconsistentInputs: {0}")]
    InconsistentInputs(String),
    #[error("MalformedReport: {0}")]
    MalformedReport(String),
}

impl StoryboardError {
    pub fn name(&self) -> &'static str {
        match self {
            StoryboardError::InvalidStory(_) => "InvalidStory",
            StoryboardError::InconsistentInputs(_) => "InconsistentInputs",
            StoryboardError::MalformedReport(_) => "MalformedReport",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnnotationKind {
    UserAction,
    DesignFlaw,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColorRole {
    Blue,
    Orange,
}

impl ColorRole {
    pub fn as_str(self) -> &'static str {
        match self {
            ColorRole::Blue => "blue",
            ColorRole::Orange => "orange",
        }
    }
}

impl AnnotationKind {
    pub fn color_role(self) -> ColorRole {
        match self {
            AnnotationKind::UserAction => ColorRole::Blue,
            AnnotationKind::DesignFlaw => ColorRole::Orange,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            AnnotationKind::UserAction => "user action",
            AnnotationKind::DesignFlaw => "design flaw",
        }
    }
}

/// The serialized annotation carries its color; reading one back rejects a
/// color that disagrees with the kind.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "AnnotationDoc", try_from = "AnnotationDoc")]
pub struct Annotation {
    pub kind: AnnotationKind,
    pub step_ref: StepRef,
    pub text: String,
}

impl Annotation {
    pub fn color_role(&self) -> ColorRole {
        self.kind.color_role()
    }
}

#[derive(Serialize, Deserialize)]
struct AnnotationDoc {
    kind: AnnotationKind,
    #[serde(rename = "ref")]
    step_ref: StepRef,
    text: String,
    color_role: ColorRole,
}

impl From<Annotation> for AnnotationDoc {
    fn from(a: Annotation) -> Self {
        let color_role = a.color_role();
        AnnotationDoc { kind: a.kind, step_ref: a.step_ref, text: a.text, color_role }
    }
}

impl TryFrom<AnnotationDoc> for Annotation {
    type Error = String;

    fn try_from(d: AnnotationDoc) -> Result<Self, Self::Error> {
        if d.kind.color_role() != d.color_role {
            return Err(format!("{} annotations are {}", d.kind.label(), d.kind.color_role().as_str()));
        }
        Ok(Annotation { kind: d.kind, step_ref: d.step_ref, text: d.text })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Wireframe {
    pub interface: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system_action: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoryboardPanel {
    #[serde(rename = "ref")]
    pub step_ref: StepRef,
    pub flow_title: String,
    pub wireframe: Wireframe,
    pub annotations: Vec<Annotation>,
    #[serde(default)]
    pub leak_point: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Storyboard {
    pub story_id: String,
    pub panels: Vec<StoryboardPanel>,
}

impl Storyboard {
    pub fn annotations(&self) -> impl Iterator<Item = &Annotation> {
        self.panels.iter().flat_map(|p| &p.annotations)
    }

    pub fn count(&self, kind: AnnotationKind) -> usize {
        self.annotations().filter(|a| a.kind == kind).count()
    }
}

/// Project a valid story onto its chosen flows.
pub fn build_storyboard(story: &JourneyStory, spec: &FeatureSpec) -> Result<Storyboard, StoryboardError> {
    let report = validate_story(story, spec);
    if !report.is_empty() {
        return Err(StoryboardError::InvalidStory(report));
    }
    let mut panels = Vec::new();
    for function_id in &story.function_sequence {
        let flow_id = &story.chosen_flows[function_id];
        let flow = spec.flow(function_id, flow_id).expect("validated story resolves its flows");
        for (i, step) in flow.steps.iter().enumerate() {
            let step_ref = StepRef::new(function_id, flow_id, i as u32 + 1);
            let mut annotations = vec![Annotation {
                kind: AnnotationKind::UserAction,
                step_ref: step_ref.clone(),
                text: step.action.clone(),
            }];
            annotations.extend(story.design_problems.iter().filter(|d| d.step == step_ref).map(|d| Annotation {
                kind: AnnotationKind::DesignFlaw,
                step_ref: step_ref.clone(),
                text: d.problem.clone(),
            }));
            panels.push(StoryboardPanel {
                leak_point: story.leak_steps.contains(&step_ref),
                step_ref,
                flow_title: flow.title.clone(),
                wireframe: Wireframe { interface: step.interface.clone(), system_action: step.system_action.clone() },
                annotations,
            });
        }
    }
    Ok(Storyboard { story_id: story.story_id.clone(), panels })
}
