//! Story generation pipeline: identity sentence, then one flow choice per
//! function, then the narrative with its structured fields.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};
use serde_json::json;
use sha2::{Digest, Sha256};
use thiserror::Error;

use super::{
    validate_identity, validate_story_with, DesignProblem, FlowSelection, Harm, HarmTaxonomy, IdentitySentence,
    JourneyStory, LeakedInfo, SelectionSource,
};
use crate::flow::{FeatureSpec, FunctionSpec, StepRef};
use crate::gateway::{canonical_json, task_with_context, Gateway, GatewayError, RequestHash, SchemaId, Stage};
use crate::persona::{validate_persona, Catalogs, Persona};
use crate::report::{ValidationReport, Violation, ViolationKind};

const IDENTITY_SYSTEM: &str = "You introduce a persona at the start of a speculative user journey. \
Write one to three sentences naming the person's gender, occupation or social role, how their \
circumstances tie them to their vulnerability group, and how daily experience shaped their comfort \
with technology. Tag each of those four elements in the slots object.";

const FLOW_SYSTEM: &str = "You are planning a speculative user journey through an app feature. \
Given the persona and the story so far, choose the single user flow of the function that this \
persona would most plausibly follow. Answer with one flow_id from the list and a short rationale.";

const STORY_SYSTEM: &str = "You write speculative user journeys that show how a vulnerable person \
could experience privacy harm while using a specific app design. Follow the supplied user flows \
step by step. Name the sensitive information that could leak, point to the exact flow steps where \
it leaks and where the design is at fault (function_id, flow_id and 1-based step), and describe the \
harms using only category ids from the supplied harm taxonomy.";

#[derive(Debug, Error)]
pub enum JourneyError {
    #[error("EmptySequence: the function sequence must name at least one function")]
    EmptySequence,
    #[error("UnknownFunction: no function `{0}` in the feature")]
    UnknownFunction(String),
    #[error("DuplicateFunction: `{0}` appears more than once in the sequence")]
    DuplicateFunction(String),
    #[error("InvalidPersona: persona `{persona_id}` fails validation:\n{report}")]
    InvalidPersona { persona_id: String, report: ValidationReport },
    #[error(transparent)]
    Gateway(#[from] GatewayError),
}

impl JourneyError {
    pub fn name(&self) -> &'static str {
        match self {
            JourneyError::EmptySequence => "EmptySequence",
            JourneyError::UnknownFunction(_) => "UnknownFunction",
            JourneyError::DuplicateFunction(_) => "DuplicateFunction",
            JourneyError::InvalidPersona { .. } => "InvalidPersona",
            JourneyError::Gateway(e) => e.name(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoryPayload {
    pub narrative: String,
    pub motivations: String,
    pub sensitive_info_leaked: Vec<LeakedInfo>,
    pub leak_steps: Vec<StepRef>,
    pub design_problems: Vec<DesignProblem>,
    pub harms: Vec<Harm>,
}

#[derive(Debug, Deserialize)]
struct FlowChoice {
    flow_id: String,
    rationale: String,
}

/// Content hash of the story inputs and the transcript it was built from.
pub fn story_id_for(persona_id: &str, feature_id: &str, sequence: &[String], transcript: &RequestHash) -> String {
    let key = json!([persona_id, feature_id, sequence, transcript]);
    let digest = Sha256::digest(canonical_json(&key).as_bytes());
    format!("story-{}", &hex::encode(digest)[..16])
}

/// Runs the pipeline against one gateway.
#[derive(Debug)]
pub struct StoryGenerator<'g> {
    gateway: &'g Gateway,
    harms: HarmTaxonomy,
    catalogs: Catalogs,
}

impl<'g> StoryGenerator<'g> {
    pub fn new(gateway: &'g Gateway) -> Self {
        Self { gateway, harms: HarmTaxonomy::builtin(), catalogs: Catalogs::builtin() }
    }

    pub fn with_harms(mut self, harms: HarmTaxonomy) -> Self {
        self.harms = harms;
        self
    }

    pub fn with_catalogs(mut self, catalogs: Catalogs) -> Self {
        self.catalogs = catalogs;
        self
    }

    pub fn harms(&self) -> &HarmTaxonomy {
        &self.harms
    }

    fn check_persona(&self, persona: &Persona) -> Result<(), JourneyError> {
        let report = validate_persona(persona, &self.catalogs, &[]);
        if report.is_empty() {
            Ok(())
        } else {
            Err(JourneyError::InvalidPersona { persona_id: persona.persona_id.clone(), report })
        }
    }

    pub fn compose_identity(&self, persona: &Persona) -> Result<(IdentitySentence, RequestHash), JourneyError> {
        self.check_persona(persona)?;
        let task = task_with_context(
            &format!("Write the identity sentence for persona {}.", persona.name),
            &json!({ "persona": persona }),
        );
        let request = self.gateway.request(Stage::Story, IDENTITY_SYSTEM, &task, SchemaId::IdentitySentence);
        let out = self.gateway.complete_structured(&request, validate_identity)?;
        Ok((out.value, out.transcript.request_hash))
    }

    /// Never fails: a single-flow function needs no call, and any gateway
    /// failure falls back to the first listed flow.
    pub fn select_flow(&self, function: &FunctionSpec, context: &str) -> (FlowSelection, Option<RequestHash>) {
        let selection = |flow_id: &str, rationale: String, source| FlowSelection {
            function_id: function.function_id.clone(),
            flow_id: flow_id.to_string(),
            rationale,
            source,
        };
        let first = function.flows.first().map(|f| f.flow_id.as_str()).unwrap_or_default();
        if function.flows.len() == 1 {
            return (selection(first, "The function has a single flow.".into(), SelectionSource::Singleton), None);
        }
        let flows: Vec<_> = function
            .flows
            .iter()
            .map(|f| json!({ "flow_id": f.flow_id, "title": f.title, "steps": f.steps }))
            .collect();
        let task = task_with_context(
            &format!(
                "Choose one flow for function {} ({}).\n\nStory so far:\n{}",
                function.function_id,
                function.name,
                context.trim()
            ),
            &json!({ "function": { "function_id": function.function_id, "name": function.name, "flows": flows } }),
        );
        let request = self.gateway.request(Stage::Story, FLOW_SYSTEM, &task, SchemaId::FlowChoice);
        let check = |c: &FlowChoice| {
            let mut report = ValidationReport::new();
            if function.flow(&c.flow_id).is_none() {
                let ids: Vec<&str> = function.flows.iter().map(|f| f.flow_id.as_str()).collect();
                report.push(Violation::new(
                    ViolationKind::UnknownFlow,
                    "flow_id",
                    format!("`{}` is not one of: {}", c.flow_id, ids.join(", ")),
                ));
            }
            report
        };
        match self.gateway.complete_structured(&request, check) {
            Ok(out) => (
                selection(&out.value.flow_id, out.value.rationale, SelectionSource::Model),
                Some(out.transcript.request_hash),
            ),
            Err(e) => {
                tracing::warn!(function = %function.function_id, error = e.name(), "flow selection fell back to the first flow");
                (selection(first, format!("Fallback to the first listed flow ({}).", e.name()), SelectionSource::Fallback), None)
            }
        }
    }

    pub fn generate_story(
        &self,
        persona: &Persona,
        spec: &FeatureSpec,
        sequence: &[String],
    ) -> Result<JourneyStory, JourneyError> {
        if sequence.is_empty() {
            return Err(JourneyError::EmptySequence);
        }
        let mut seen = HashSet::new();
        for function_id in sequence {
            if spec.function(function_id).is_none() {
                return Err(JourneyError::UnknownFunction(function_id.clone()));
            }
            if !seen.insert(function_id) {
                return Err(JourneyError::DuplicateFunction(function_id.clone()));
            }
        }

        let (identity, identity_hash) = self.compose_identity(persona)?;
        let mut transcripts = vec![identity_hash];
        let mut context = identity.text.clone();
        let mut selections = Vec::with_capacity(sequence.len());
        for function_id in sequence {
            let function = spec.function(function_id).expect("checked above");
            let (selection, hash) = self.select_flow(function, &context);
            let title = &function.flow(&selection.flow_id).expect("selection is a flow of the function").title;
            context.push_str(&format!("\nFor \"{}\" they follow \"{}\".", function.name, title));
            transcripts.extend(hash);
            selections.push(selection);
        }
        let chosen_flows: BTreeMap<String, String> =
            selections.iter().map(|s| (s.function_id.clone(), s.flow_id.clone())).collect();

        let flows: Vec<_> = selections
            .iter()
            .map(|s| {
                let function = spec.function(&s.function_id).expect("checked above");
                json!({
                    "function_id": function.function_id,
                    "function_name": function.name,
                    "flow": function.flow(&s.flow_id).expect("selection is a flow of the function"),
                })
            })
            .collect();
        let task = task_with_context(
            &format!(
                "Write the speculative journey of {} through the feature \"{}\".\n\nIdentity: {}",
                persona.name, spec.name, identity.text
            ),
            &json!({ "persona": persona, "identity": identity, "flows": flows, "harm_taxonomy": self.harms.categories }),
        );
        let request = self.gateway.request(Stage::Story, STORY_SYSTEM, &task, SchemaId::JourneyStory);

        let draft = |payload: StoryPayload| JourneyStory {
            story_id: String::new(),
            persona_id: persona.persona_id.clone(),
            feature_id: spec.feature_id.clone(),
            identity: identity.clone(),
            function_sequence: sequence.to_vec(),
            chosen_flows: chosen_flows.clone(),
            flow_selections: selections.clone(),
            narrative: payload.narrative,
            motivations: payload.motivations,
            sensitive_info_leaked: payload.sensitive_info_leaked,
            leak_steps: payload.leak_steps,
            design_problems: payload.design_problems,
            harms: payload.harms,
            transcripts: Vec::new(),
        };
        let out = self.gateway.complete_structured(&request, |p: &StoryPayload| {
            validate_story_with(&draft(p.clone()), spec, &self.harms, Some(persona))
        })?;
        let story_hash = out.transcript.request_hash;
        transcripts.push(story_hash.clone());
        let mut story = draft(out.value);
        story.story_id = story_id_for(&persona.persona_id, &spec.feature_id, sequence, &story_hash);
        story.transcripts = transcripts;
        Ok(story)
    }
}
