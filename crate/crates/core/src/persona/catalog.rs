use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{EntryKind, PersonaError};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub id: String,
    pub text: String,
    pub source: String,
}

/// Seed lists of privacy tensions, responses and costs.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Catalogs {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    pub tensions: Vec<CatalogEntry>,
    pub responses: Vec<CatalogEntry>,
    pub costs: Vec<CatalogEntry>,
}

impl Catalogs {
    pub fn builtin() -> Self {
        Self::from_json(include_str!("../../data/catalogs.json")).expect("bundled catalogs are valid")
    }

    pub fn from_json(text: &str) -> Result<Self, PersonaError> {
        let catalogs: Catalogs =
            serde_json::from_str(text).map_err(|e| PersonaError::Data(format!("catalogs: {e}")))?;
        catalogs.check()?;
        Ok(catalogs)
    }

    pub fn load(path: &Path) -> Result<Self, PersonaError> {
        let text = std::fs::read_to_string(path).map_err(|e| PersonaError::Data(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    fn check(&self) -> Result<(), PersonaError> {
        let mut seen = HashSet::new();
        for kind in EntryKind::ALL {
            for entry in self.entries(kind) {
                if entry.id.trim().is_empty() || entry.text.trim().is_empty() || entry.source.trim().is_empty() {
                    return Err(PersonaError::Data(format!(
                        "catalog {kind} entry `{}` needs id, text and source",
                        entry.id
                    )));
                }
                if !seen.insert(entry.id.as_str()) {
                    return Err(PersonaError::Data(format!("catalog id `{}` is repeated", entry.id)));
                }
            }
        }
        Ok(())
    }

    pub fn entries(&self, kind: EntryKind) -> &[CatalogEntry] {
        match kind {
            EntryKind::Tension => &self.tensions,
            EntryKind::Response => &self.responses,
            EntryKind::Cost => &self.costs,
        }
    }

    pub fn find(&self, kind: EntryKind, id: &str) -> Option<&CatalogEntry> {
        self.entries(kind).iter().find(|e| e.id == id)
    }
}
