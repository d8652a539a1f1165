//! Two-stage persona generation: persona types over the taxonomy, then one
//! profile per type grounded in the catalogs.

use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{Catalogs, DimensionId, EntryKind, Persona, PersonaError, PersonaLibrary, PersonaType, ProfileEntry, Rated, Taxonomy};
use crate::gateway::{task_with_context, Gateway, SchemaId, Stage};
use crate::report::{ValidationReport, Violation, ViolationKind};

const TYPES_SYSTEM: &str = "You design personas for privacy reviews of software features. \
Persona types are representative user categories whose circumstances make privacy failures \
more harmful. Ground every type in one or more of the supplied vulnerability dimensions and \
cover as many distinct dimensions as the requested count allows.";

const PROFILE_SYSTEM: &str = "You write a concrete persona for a privacy review. Give the \
person a name, age and demographics (gender, occupation or role, living situation, and how \
their circumstances relate to the persona type). Rate technology comfort and privacy awareness \
as low, medium or high with a one-sentence justification. List the information categories \
they most need to protect. Each tension, response and cost must either reference a catalog \
entry by catalog_id or cite a source.";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PersonaTypeDraft {
    pub label: String,
    pub dimensions: Vec<DimensionId>,
    pub rationale: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PersonaTypesPayload {
    pub persona_types: Vec<PersonaTypeDraft>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PersonaProfilePayload {
    pub name: String,
    pub age: u32,
    pub demographics: String,
    pub tech_comfort: Rated,
    pub privacy_awareness: Rated,
    pub protected_info: Vec<String>,
    pub tensions: Vec<ProfileEntry>,
    pub responses: Vec<ProfileEntry>,
    pub costs: Vec<ProfileEntry>,
    #[serde(default)]
    pub sources: Vec<String>,
}

impl PersonaProfilePayload {
    fn into_persona(self, persona_id: String, type_id: &str) -> Persona {
        let mut sources = self.sources;
        for entry in self.tensions.iter().chain(&self.responses).chain(&self.costs) {
            if let Some(s) = &entry.source {
                if !sources.contains(s) {
                    sources.push(s.clone());
                }
            }
        }
        Persona {
            persona_id,
            type_id: type_id.to_string(),
            name: self.name.trim().to_string(),
            age: self.age,
            demographics: self.demographics,
            tech_comfort: self.tech_comfort,
            privacy_awareness: self.privacy_awareness,
            protected_info: self.protected_info.iter().map(|c| c.trim().to_lowercase()).collect(),
            tensions: self.tensions,
            responses: self.responses,
            costs: self.costs,
            sources,
        }
    }
}

/// Slug of `name`, suffixed `-2`, `-3`, ... until unused.
pub fn persona_id_for(name: &str, taken: &HashSet<String>) -> String {
    let mut slug = String::new();
    for c in name.trim().to_lowercase().chars() {
        if c.is_ascii_alphanumeric() {
            slug.push(c);
        } else if !slug.is_empty() && !slug.ends_with('-') {
            slug.push('-');
        }
    }
    let slug = slug.trim_end_matches('-');
    let base = if slug.is_empty() { "persona" } else { slug };
    if !taken.contains(base) {
        return base.to_string();
    }
    (2..).map(|n| format!("{base}-{n}")).find(|id| !taken.contains(id)).expect("some suffix is free")
}

fn check_types(payload: &PersonaTypesPayload, count: usize) -> ValidationReport {
    let mut report = ValidationReport::new();
    let types = &payload.persona_types;
    if types.len() != count {
        report.push(Violation::new(
            ViolationKind::InvalidValue,
            "persona_types",
            format!("expected exactly {count} persona types, got {}", types.len()),
        ));
    }
    let mut labels = HashSet::new();
    for (i, t) in types.iter().enumerate() {
        let label = t.label.trim().to_lowercase();
        if label.is_empty() {
            report.push(Violation::new(ViolationKind::MissingField, format!("persona_types[{i}].label"), "label must be non-empty"));
        } else if !labels.insert(label) {
            report.push(Violation::new(ViolationKind::DuplicateId, format!("persona_types[{i}].label"), format!("label `{}` is repeated", t.label)));
        }
        if t.dimensions.is_empty() {
            report.push(Violation::new(
                ViolationKind::MissingField,
                format!("persona_types[{i}].dimensions"),
                "at least one vulnerability dimension is required",
            ));
        }
    }
    let span: BTreeSet<DimensionId> = types.iter().flat_map(|t| t.dimensions.iter().copied()).collect();
    if count >= 5 && span.len() < 3 {
        report.push(Violation::new(
            ViolationKind::InvalidValue,
            "persona_types",
            format!("types must span at least 3 vulnerability dimensions, got {}", span.len()),
        ));
    }
    report
}

fn check_profile(payload: &PersonaProfilePayload, catalogs: &Catalogs) -> ValidationReport {
    let draft = payload.clone().into_persona("draft".into(), "draft");
    let mut report = super::validate_persona(&draft, catalogs, &[]);
    if draft.protected_info.len() != payload.protected_info.len() {
        report.push(Violation::new(ViolationKind::DuplicateId, "protected_info", "categories must be distinct"));
    }
    report
}

/// Generate `count` persona types and one persona per type.
pub fn generate_personas(
    gateway: &Gateway,
    taxonomy: &Taxonomy,
    catalogs: &Catalogs,
    count: usize,
) -> Result<PersonaLibrary, PersonaError> {
    if count == 0 {
        return Err(PersonaError::InvalidCount);
    }
    let context = json!({ "count": count, "taxonomy": taxonomy.dimensions });
    let task = task_with_context(
        &format!("Propose exactly {count} persona types. Each needs a label, its vulnerability dimensions and a short rationale."),
        &context,
    );
    let request = gateway.request(Stage::Persona, TYPES_SYSTEM, &task, SchemaId::PersonaTypes);
    let drafts = gateway
        .complete_structured(&request, |p: &PersonaTypesPayload| check_types(p, count))?
        .value
        .persona_types;

    let types: Vec<PersonaType> = drafts
        .iter()
        .enumerate()
        .map(|(i, d)| PersonaType {
            type_id: format!("type-{:02}", i + 1),
            label: d.label.trim().to_string(),
            dimensions: d.dimensions.iter().copied().collect(),
        })
        .collect();

    let catalog_context = json!({
        "tensions": catalogs.entries(EntryKind::Tension),
        "responses": catalogs.entries(EntryKind::Response),
        "costs": catalogs.entries(EntryKind::Cost),
    });
    let mut taken = HashSet::new();
    let mut personas = Vec::with_capacity(types.len());
    for t in &types {
        let dims: Vec<&str> = t.dimensions.iter().map(|d| taxonomy.get(*d).label.as_str()).collect();
        let context = json!({ "persona_type": t, "catalogs": catalog_context });
        let task = task_with_context(
            &format!("Persona type {}: {}\nVulnerability dimensions: {}.", t.type_id, t.label, dims.join("; ")),
            &context,
        );
        let request = gateway.request(Stage::Persona, PROFILE_SYSTEM, &task, SchemaId::PersonaProfile);
        let profile = gateway.complete_structured(&request, |p: &PersonaProfilePayload| check_profile(p, catalogs))?.value;
        let persona_id = persona_id_for(&profile.name, &taken);
        taken.insert(persona_id.clone());
        personas.push(profile.into_persona(persona_id, &t.type_id));
    }
    Ok(PersonaLibrary { types, personas })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gateway::MockProvider;

    #[test]
    fn slug_dedup() {
        let mut taken = HashSet::new();
        assert_eq!(persona_id_for("Maya López", &taken), "maya-l-pez");
        taken.insert("eva".to_string());
        assert_eq!(persona_id_for("Eva", &taken), "eva-2");
        assert_eq!(persona_id_for("  ", &taken), "persona");
    }

    #[test]
    fn synthetic_library_is_valid() {
        let gw = Gateway::mock(MockProvider::synthetic());
        let catalogs = Catalogs::builtin();
        let lib = generate_personas(&gw, &Taxonomy::builtin(), &catalogs, 6).unwrap();
        assert_eq!(lib.personas.len(), 6);
        assert!(lib.validate(&catalogs).is_empty(), "{}", lib.validate(&catalogs));
        assert_eq!(lib.dimension_span().len(), 5);
    }

    #[test]
    fn zero_count_rejected_without_calls() {
        let gw = Gateway::mock(MockProvider::synthetic());
        let err = generate_personas(&gw, &Taxonomy::builtin(), &Catalogs::builtin(), 0).unwrap_err();
        assert_eq!(err.name(), "InvalidCount");
        assert_eq!(gw.provider_calls(), 0);
    }

    #[test]
    fn narrow_type_span_is_rejected() {
        let drafts = (0..5)
            .map(|i| PersonaTypeDraft { label: format!("t{i}"), dimensions: vec![DimensionId::EmergencyCapacity], rationale: String::new() })
            .collect();
        let report = check_types(&PersonaTypesPayload { persona_types: drafts }, 5);
        assert_eq!(report.kinds(), vec![ViolationKind::InvalidValue]);
    }
}
