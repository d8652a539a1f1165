//! Speculative journey stories: an identity sentence, one chosen flow per
//! function in the sequence, a narrative, and structured leak, design-problem
//! and harm fields anchored to flow steps.

mod generate;
mod harm;

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::flow::{FeatureSpec, StepRef};
use crate::gateway::RequestHash;
use crate::persona::Persona;
use crate::report::{ValidationReport, Violation, ViolationKind};

pub use generate::{story_id_for, JourneyError, StoryGenerator, StoryPayload};
pub use harm::{HarmCategory, HarmTaxonomy};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdentitySlots {
    pub gender: String,
    pub role: String,
    pub vulnerability: String,
    pub tech_comfort: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdentitySentence {
    pub text: String,
    pub slots: IdentitySlots,
}

/// Sentences in `text`, counting terminal punctuation followed by whitespace
/// or the end of the text.
pub fn sentence_count(text: &str) -> usize {
    let chars: Vec<char> = text.trim().chars().collect();
    let mut count = 0;
    for (i, c) in chars.iter().enumerate() {
        if matches!(c, '.' | '!' | '?') && chars.get(i + 1).is_none_or(|n| n.is_whitespace()) {
            count += 1;
        }
    }
    if count == 0 && !chars.is_empty() {
        1
    } else {
        count
    }
}

pub fn validate_identity(identity: &IdentitySentence) -> ValidationReport {
    let mut report = ValidationReport::new();
    let n = sentence_count(&identity.text);
    if identity.text.trim().is_empty() || !(1..=3).contains(&n) {
        report.push(Violation::new(
            ViolationKind::IdentityShape,
            "identity.text",
            format!("identity must be 1 to 3 sentences, got {n}"),
        ));
    }
    let s = &identity.slots;
    for (slot, value) in [
        ("gender", &s.gender),
        ("role", &s.role),
        ("vulnerability", &s.vulnerability),
        ("tech_comfort", &s.tech_comfort),
    ] {
        if value.trim().is_empty() {
            report.push(Violation::new(
                ViolationKind::IdentityShape,
                format!("identity.slots.{slot}"),
                format!("slot `{slot}` must be filled"),
            ));
        }
    }
    report
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionSource {
    /// The function has exactly one flow.
    Singleton,
    Model,
    /// The model could not produce a usable choice; the first flow was taken.
    Fallback,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlowSelection {
    pub function_id: String,
    pub flow_id: String,
    pub rationale: String,
    pub source: SelectionSource,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LeakedInfo {
    pub category: String,
    pub description: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DesignProblem {
    pub step: StepRef,
    pub problem: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Harm {
    pub category: String,
    pub consequence: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JourneyStory {
    pub story_id: String,
    pub persona_id: String,
    pub feature_id: String,
    pub identity: IdentitySentence,
    pub function_sequence: Vec<String>,
    pub chosen_flows: BTreeMap<String, String>,
    #[serde(default)]
    pub flow_selections: Vec<FlowSelection>,
    pub narrative: String,
    pub motivations: String,
    pub sensitive_info_leaked: Vec<LeakedInfo>,
    pub leak_steps: Vec<StepRef>,
    pub design_problems: Vec<DesignProblem>,
    pub harms: Vec<Harm>,
    /// Request hashes of the transcripts the story was built from.
    #[serde(default)]
    pub transcripts: Vec<RequestHash>,
}

impl JourneyStory {
    /// Every StepRef the story makes, with the field it sits in.
    pub fn step_refs(&self) -> impl Iterator<Item = (String, &StepRef)> {
        let leaks = self.leak_steps.iter().enumerate().map(|(i, s)| (format!("leak_steps[{i}]"), s));
        let problems = self
            .design_problems
            .iter()
            .enumerate()
            .map(|(i, d)| (format!("design_problems[{i}].step"), &d.step));
        leaks.chain(problems)
    }

    pub fn to_document(&self) -> String {
        crate::docio::to_document(self)
    }
}

/// Whether `step_ref` addresses a step of a flow chosen by `story`.
pub fn resolves(story: &JourneyStory, spec: &FeatureSpec, step_ref: &StepRef) -> bool {
    story.function_sequence.contains(&step_ref.function_id)
        && story.chosen_flows.get(&step_ref.function_id) == Some(&step_ref.flow_id)
        && spec
            .flow(&step_ref.function_id, &step_ref.flow_id)
            .is_some_and(|f| step_ref.step >= 1 && step_ref.step as usize <= f.steps.len())
}

/// Check a story against the feature and the bundled harm taxonomy.
pub fn validate_story(story: &JourneyStory, spec: &FeatureSpec) -> ValidationReport {
    validate_story_with(story, spec, HarmTaxonomy::builtin_ref(), None)
}

/// Check a story. When `persona` is given, every leaked category must be one
/// the persona protects or one the narrative introduces.
pub fn validate_story_with(
    story: &JourneyStory,
    spec: &FeatureSpec,
    harms: &HarmTaxonomy,
    persona: Option<&Persona>,
) -> ValidationReport {
    let mut report = ValidationReport::new();
    let missing = |field: &str| Violation::new(ViolationKind::MissingField, field, format!("{field} must be non-empty"));

    if story.feature_id != spec.feature_id {
        report.push(Violation::new(
            ViolationKind::FeatureMismatch,
            "feature_id",
            format!("story is for `{}` but the feature is `{}`", story.feature_id, spec.feature_id),
        ));
    }
    if story.persona_id.trim().is_empty() {
        report.push(missing("persona_id"));
    }
    if let Some(p) = persona {
        if p.persona_id != story.persona_id {
            report.push(Violation::new(
                ViolationKind::InvalidValue,
                "persona_id",
                format!("story is for `{}` but the persona is `{}`", story.persona_id, p.persona_id),
            ));
        }
    }
    report.extend(validate_identity(&story.identity));

    if story.function_sequence.is_empty() {
        report.push(missing("function_sequence"));
    }
    let mut seen = HashSet::new();
    for (i, function_id) in story.function_sequence.iter().enumerate() {
        let field = format!("function_sequence[{i}]");
        if !seen.insert(function_id.as_str()) {
            report.push(Violation::new(ViolationKind::DuplicateFunction, field, format!("`{function_id}` appears more than once")));
            continue;
        }
        let Some(function) = spec.function(function_id) else {
            report.push(Violation::new(ViolationKind::UnknownFunction, field, format!("no function `{function_id}` in the feature")));
            continue;
        };
        match story.chosen_flows.get(function_id) {
            None => report.push(Violation::new(
                ViolationKind::MissingChosenFlow,
                format!("chosen_flows.{function_id}"),
                format!("no flow chosen for `{function_id}`"),
            )),
            Some(flow_id) if function.flow(flow_id).is_none() => report.push(Violation::new(
                ViolationKind::UnknownFlow,
                format!("chosen_flows.{function_id}"),
                format!("`{function_id}` has no flow `{flow_id}`"),
            )),
            Some(_) => {}
        }
    }
    for function_id in story.chosen_flows.keys() {
        if !seen.contains(function_id.as_str()) {
            report.push(Violation::new(
                ViolationKind::ExtraChosenFlow,
                format!("chosen_flows.{function_id}"),
                format!("`{function_id}` is not in the function sequence"),
            ));
        }
    }

    if story.narrative.trim().is_empty() {
        report.push(missing("narrative"));
    }
    if story.motivations.trim().is_empty() {
        report.push(missing("motivations"));
    }

    if story.sensitive_info_leaked.is_empty() {
        report.push(missing("sensitive_info_leaked"));
    }
    let narrative = story.narrative.to_lowercase();
    for (i, leak) in story.sensitive_info_leaked.iter().enumerate() {
        let field = format!("sensitive_info_leaked[{i}].category");
        let category = leak.category.trim();
        if category.is_empty() {
            report.push(missing(&field));
            continue;
        }
        if let Some(p) = persona {
            if !p.protects(category) && !narrative.contains(&category.to_lowercase()) {
                report.push(Violation::new(
                    ViolationKind::UnsupportedLeakCategory,
                    field,
                    format!("`{category}` is neither protected by the persona nor introduced in the narrative"),
                ));
            }
        }
    }

    for (field, step_ref) in story.step_refs() {
        if !resolves(story, spec, step_ref) {
            report.push(
                Violation::new(ViolationKind::DanglingStepRef, field, format!("{step_ref} is not a step of a chosen flow"))
                    .at_step(step_ref.clone()),
            );
        }
    }
    for (i, d) in story.design_problems.iter().enumerate() {
        if d.problem.trim().is_empty() {
            report.push(missing(&format!("design_problems[{i}].problem")).at_step(d.step.clone()));
        }
    }

    if story.harms.is_empty() {
        report.push(missing("harms"));
    }
    for (i, harm) in story.harms.iter().enumerate() {
        if !harms.contains(&harm.category) {
            report.push(Violation::new(
                ViolationKind::UnknownHarmCategory,
                format!("harms[{i}].category"),
                format!("`{}` is not a harm category", harm.category),
            ));
        }
        if harm.consequence.trim().is_empty() {
            report.push(missing(&format!("harms[{i}].consequence")));
        }
    }
    report
}
