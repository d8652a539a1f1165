//! Vulnerability-centered persona library.
//!
//! A persona instantiates a persona type (a user category tied to one or more
//! vulnerability dimensions) with demographics, comfort and awareness levels,
//! the information categories the person protects, and the privacy tensions,
//! responses and costs they live with. Each tension/response/cost either
//! references a catalog entry or carries its own citation.

mod catalog;
mod generate;
mod taxonomy;

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gateway::GatewayError;
use crate::report::{ValidationReport, Violation, ViolationKind};

pub use catalog::{CatalogEntry, Catalogs};
pub use generate::{generate_personas, persona_id_for, PersonaProfilePayload, PersonaTypeDraft, PersonaTypesPayload};
pub use taxonomy::{DimensionId, Taxonomy, VulnerabilityDimension};

#[derive(Debug, Error)]
pub enum PersonaError {
    #[error("UnsourcedNote: note {index} has no source citation")]
    UnsourcedNote { index: usize },
    #[error("InvalidCount: persona count must be at least 1")]
    InvalidCount,
    #[error(transparent)]
    Gateway(#[from] GatewayError),
    #[error("PersonaData: {0}")]
    Data(String),
}

impl PersonaError {
    pub fn name(&self) -> &'static str {
        match self {
            PersonaError::UnsourcedNote { .. } => "UnsourcedNote",
            PersonaError::InvalidCount => "InvalidCount",
            PersonaError::Gateway(e) => e.name(),
            PersonaError::Data(_) => "PersonaData",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntryKind {
    Tension,
    Response,
    Cost,
}

impl EntryKind {
    pub const ALL: [EntryKind; 3] = [EntryKind::Tension, EntryKind::Response, EntryKind::Cost];

    fn field(self) -> &'static str {
        match self {
            EntryKind::Tension => "tensions",
            EntryKind::Response => "responses",
            EntryKind::Cost => "costs",
        }
    }
}

impl fmt::Display for EntryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EntryKind::Tension => "tension",
            EntryKind::Response => "response",
            EntryKind::Cost => "cost",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Low,
    Medium,
    High,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rated {
    pub level: Level,
    pub justification: String,
}

/// A tension, response or cost on a persona.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ProfileEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub catalog_id: Option<String>,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PersonaType {
    pub type_id: String,
    pub label: String,
    pub dimensions: BTreeSet<DimensionId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Persona {
    pub persona_id: String,
    pub type_id: String,
    pub name: String,
    pub age: u32,
    pub demographics: String,
    pub tech_comfort: Rated,
    pub privacy_awareness: Rated,
    pub protected_info: BTreeSet<String>,
    pub tensions: Vec<ProfileEntry>,
    pub responses: Vec<ProfileEntry>,
    pub costs: Vec<ProfileEntry>,
    pub sources: Vec<String>,
}

impl Persona {
    pub fn entries(&self, kind: EntryKind) -> &[ProfileEntry] {
        match kind {
            EntryKind::Tension => &self.tensions,
            EntryKind::Response => &self.responses,
            EntryKind::Cost => &self.costs,
        }
    }

    fn entries_mut(&mut self, kind: EntryKind) -> &mut Vec<ProfileEntry> {
        match kind {
            EntryKind::Tension => &mut self.tensions,
            EntryKind::Response => &mut self.responses,
            EntryKind::Cost => &mut self.costs,
        }
    }

    pub fn protects(&self, category: &str) -> bool {
        let wanted = category.trim().to_lowercase();
        self.protected_info.iter().any(|c| c.to_lowercase() == wanted)
    }
}

fn blank(s: &str) -> bool {
    s.trim().is_empty()
}

/// Check a persona's invariants. `types` may be empty, in which case the
/// persona type reference is not resolved.
pub fn validate_persona(p: &Persona, catalogs: &Catalogs, types: &[PersonaType]) -> ValidationReport {
    let mut report = ValidationReport::new();
    let missing = |field: &str| Violation::new(ViolationKind::MissingField, field, format!("{field} must be non-empty"));

    for (field, value) in [
        ("persona_id", &p.persona_id),
        ("type_id", &p.type_id),
        ("name", &p.name),
        ("demographics", &p.demographics),
        ("tech_comfort.justification", &p.tech_comfort.justification),
        ("privacy_awareness.justification", &p.privacy_awareness.justification),
    ] {
        if blank(value) {
            report.push(missing(field));
        }
    }
    if p.age == 0 {
        report.push(Violation::new(ViolationKind::InvalidValue, "age", "age must be greater than zero"));
    }
    if !types.is_empty() && !blank(&p.type_id) && !types.iter().any(|t| t.type_id == p.type_id) {
        report.push(Violation::new(
            ViolationKind::UnknownPersonaType,
            "type_id",
            format!("persona type `{}` is not in the library", p.type_id),
        ));
    }
    if p.protected_info.is_empty() {
        report.push(missing("protected_info"));
    }
    for (i, category) in p.protected_info.iter().enumerate() {
        if blank(category) {
            report.push(missing(&format!("protected_info[{i}]")));
        }
    }

    for kind in EntryKind::ALL {
        let entries = p.entries(kind);
        if entries.is_empty() {
            report.push(missing(kind.field()));
        }
        for (i, entry) in entries.iter().enumerate() {
            let path = format!("{}[{i}]", kind.field());
            if blank(&entry.text) {
                report.push(missing(&format!("{path}.text")));
            }
            match (&entry.catalog_id, &entry.source) {
                (Some(id), _) if catalogs.find(kind, id).is_none() => report.push(Violation::new(
                    ViolationKind::DanglingCatalogRef,
                    format!("{path}.catalog_id"),
                    format!("no {kind} catalog entry `{id}`"),
                )),
                (Some(_), _) => {}
                (None, Some(source)) if !blank(source) => {}
                (None, _) => report.push(Violation::new(
                    ViolationKind::UnsourcedEntry,
                    format!("{path}.source"),
                    "entries without a catalog_id must cite a source",
                )),
            }
        }
    }
    report
}

pub fn validate_persona_type(t: &PersonaType) -> ValidationReport {
    let mut report = ValidationReport::new();
    if blank(&t.type_id) {
        report.push(Violation::new(ViolationKind::MissingField, "type_id", "type_id must be non-empty"));
    }
    if blank(&t.label) {
        report.push(Violation::new(ViolationKind::MissingField, "label", "label must be non-empty"));
    }
    if t.dimensions.is_empty() {
        report.push(Violation::new(ViolationKind::MissingField, "dimensions", "at least one dimension is required"));
    }
    report
}

/// A literature-derived addition to a persona.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LiteratureNote {
    pub kind: EntryKind,
    pub text: String,
    pub source: String,
}

/// Append sourced notes as new entries. Entries already present (same kind,
/// text and source) are not added again.
pub fn enrich_persona(p: &Persona, notes: &[LiteratureNote]) -> Result<Persona, PersonaError> {
    if let Some(index) = notes.iter().position(|n| blank(&n.source)) {
        return Err(PersonaError::UnsourcedNote { index });
    }
    let mut out = p.clone();
    for note in notes {
        let entry = ProfileEntry {
            catalog_id: None,
            text: note.text.trim().to_string(),
            source: Some(note.source.trim().to_string()),
        };
        let list = out.entries_mut(note.kind);
        if !list.contains(&entry) {
            list.push(entry);
        }
        let source = note.source.trim().to_string();
        if !out.sources.contains(&source) {
            out.sources.push(source);
        }
    }
    Ok(out)
}

/// Immutable snapshot of persona types and personas.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PersonaLibrary {
    pub types: Vec<PersonaType>,
    pub personas: Vec<Persona>,
}

#[derive(Debug, Serialize, Deserialize)]
struct LibraryIndex {
    types: Vec<PersonaType>,
    personas: Vec<String>,
}

impl PersonaLibrary {
    pub fn persona(&self, persona_id: &str) -> Option<&Persona> {
        self.personas.iter().find(|p| p.persona_id == persona_id)
    }

    pub fn persona_type(&self, type_id: &str) -> Option<&PersonaType> {
        self.types.iter().find(|t| t.type_id == type_id)
    }

    pub fn dimensions_of(&self, p: &Persona) -> BTreeSet<DimensionId> {
        self.persona_type(&p.type_id).map(|t| t.dimensions.clone()).unwrap_or_default()
    }

    /// Distinct dimensions across all persona types in use.
    pub fn dimension_span(&self) -> BTreeSet<DimensionId> {
        self.personas.iter().flat_map(|p| self.dimensions_of(p)).collect()
    }

    pub fn validate(&self, catalogs: &Catalogs) -> ValidationReport {
        let mut report = ValidationReport::new();
        let mut ids = HashSet::new();
        for t in &self.types {
            for mut v in validate_persona_type(t).violations {
                v.field = format!("types[{}].{}", t.type_id, v.field);
                report.push(v);
            }
        }
        for p in &self.personas {
            if !ids.insert(p.persona_id.as_str()) {
                report.push(Violation::new(
                    ViolationKind::DuplicateId,
                    format!("personas[{}]", p.persona_id),
                    "persona_id is repeated",
                ));
            }
            for mut v in validate_persona(p, catalogs, &self.types).violations {
                v.field = format!("personas[{}].{}", p.persona_id, v.field);
                report.push(v);
            }
        }
        report
    }

    /// Write `index.json` plus one `personas/<id>.json` per persona.
    pub fn save(&self, dir: &Path) -> Result<(), PersonaError> {
        let io = |e: std::io::Error| PersonaError::Data(format!("{}: {e}", dir.display()));
        fs::create_dir_all(dir.join("personas")).map_err(io)?;
        for p in &self.personas {
            let path = dir.join("personas").join(format!("{}.json", p.persona_id));
            crate::docio::write_document(&path, p).map_err(io)?;
        }
        let index = LibraryIndex {
            types: self.types.clone(),
            personas: self.personas.iter().map(|p| p.persona_id.clone()).collect(),
        };
        crate::docio::write_document(&dir.join("index.json"), &index).map_err(io)?;
        Ok(())
    }

    pub fn load(dir: &Path) -> Result<Self, PersonaError> {
        let read = |path: &Path| {
            fs::read_to_string(path).map_err(|e| PersonaError::Data(format!("{}: {e}", path.display())))
        };
        let index: LibraryIndex = serde_json::from_str(&read(&dir.join("index.json"))?)
            .map_err(|e| PersonaError::Data(format!("index.json: {e}")))?;
        let mut personas = Vec::with_capacity(index.personas.len());
        for id in &index.personas {
            let path = dir.join("personas").join(format!("{id}.json"));
            let p: Persona =
                serde_json::from_str(&read(&path)?).map_err(|e| PersonaError::Data(format!("{}: {e}", path.display())))?;
            personas.push(p);
        }
        Ok(Self { types: index.types, personas })
    }
}

/// Personas matching every supplied predicate, in library order.
pub fn filter_personas<'a>(
    library: &'a PersonaLibrary,
    dimension: Option<DimensionId>,
    protected_info: Option<&str>,
) -> Vec<&'a Persona> {
    library
        .personas
        .iter()
        .filter(|p| dimension.is_none_or(|d| library.dimensions_of(p).contains(&d)))
        .filter(|p| protected_info.is_none_or(|c| p.protects(c)))
        .collect()
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) fn eva() -> Persona {
        Persona {
            persona_id: "eva".into(),
            type_id: "type-02".into(),
            name: "Eva".into(),
            age: 16,
            demographics: "Girl, high-school student facing online bullying from classmates.".into(),
            tech_comfort: Rated { level: Level::High, justification: "Moderates Discord servers.".into() },
            privacy_awareness: Rated { level: Level::Medium, justification: "Uses Private Session.".into() },
            protected_info: ["listening activity".to_string(), "location".to_string()].into(),
            tensions: vec![ProfileEntry { catalog_id: Some("T04".into()), text: "Social features reveal routines.".into(), source: None }],
            responses: vec![ProfileEntry { catalog_id: Some("R04".into()), text: "Checks settings.".into(), source: None }],
            costs: vec![ProfileEntry { catalog_id: None, text: "Anxiety.".into(), source: Some("Cyberbullying study".into()) }],
            sources: vec!["Cyberbullying study".into()],
        }
    }

    #[test]
    fn eva_is_valid() {
        assert!(validate_persona(&eva(), &Catalogs::builtin(), &[]).is_empty());
    }

    #[test]
    fn empty_costs_is_one_violation() {
        let mut p = eva();
        p.costs.clear();
        let report = validate_persona(&p, &Catalogs::builtin(), &[]);
        assert_eq!(report.kinds(), vec![ViolationKind::MissingField]);
        assert_eq!(report.violations[0].field, "costs");
    }

    #[test]
    fn catalog_refs_are_kind_scoped() {
        let mut p = eva();
        p.tensions[0].catalog_id = Some("R01".into());
        assert_eq!(validate_persona(&p, &Catalogs::builtin(), &[]).kinds(), vec![ViolationKind::DanglingCatalogRef]);
    }

    #[test]
    fn zero_age_and_unknown_type() {
        let mut p = eva();
        p.age = 0;
        let types = vec![PersonaType { type_id: "other".into(), label: "x".into(), dimensions: [DimensionId::EmergencyCapacity].into() }];
        let kinds = validate_persona(&p, &Catalogs::builtin(), &types).kinds();
        assert_eq!(kinds, vec![ViolationKind::InvalidValue, ViolationKind::UnknownPersonaType]);
    }

    #[test]
    fn enrich_with_nothing_is_identity() {
        assert_eq!(enrich_persona(&eva(), &[]).unwrap(), eva());
    }

    #[test]
    fn enrich_rejects_unsourced() {
        let notes = vec![LiteratureNote { kind: EntryKind::Tension, text: "x".into(), source: "".into() }];
        assert_eq!(enrich_persona(&eva(), &notes).unwrap_err().name(), "UnsourcedNote");
    }

    #[test]
    fn filter_by_protected_info_is_case_insensitive() {
        let lib = PersonaLibrary { types: vec![], personas: vec![eva()] };
        assert_eq!(filter_personas(&lib, None, Some("Location")).len(), 1);
        assert!(filter_personas(&lib, None, Some("health")).is_empty());
        assert!(filter_personas(&lib, Some(DimensionId::EmergencyCapacity), None).is_empty());
    }
}
