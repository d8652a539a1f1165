use std::collections::HashSet;
use std::path::Path;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HarmCategory {
    pub id: String,
    pub label: String,
    pub description: String,
}

/// Closed set of harm categories a story may cite.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HarmTaxonomy {
    pub categories: Vec<HarmCategory>,
}

impl HarmTaxonomy {
    pub fn builtin() -> Self {
        Self::builtin_ref().clone()
    }

    pub(crate) fn builtin_ref() -> &'static HarmTaxonomy {
        static BUILTIN: OnceLock<HarmTaxonomy> = OnceLock::new();
        BUILTIN.get_or_init(|| Self::from_json(include_str!("../../data/harms.json")).expect("bundled harms are valid"))
    }

    pub fn from_json(text: &str) -> Result<Self, String> {
        let taxonomy: HarmTaxonomy = serde_json::from_str(text).map_err(|e| format!("harm taxonomy: {e}"))?;
        if taxonomy.categories.is_empty() {
            return Err("harm taxonomy has no categories".into());
        }
        let mut ids = HashSet::new();
        for c in &taxonomy.categories {
            if c.id.trim().is_empty() || c.label.trim().is_empty() {
                return Err("harm categories need an id and a label".into());
            }
            if !ids.insert(c.id.as_str()) {
                return Err(format!("harm category `{}` is repeated", c.id));
            }
        }
        Ok(taxonomy)
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        Self::from_json(&text)
    }

    pub fn contains(&self, id: &str) -> bool {
        self.get(id).is_some()
    }

    pub fn get(&self, id: &str) -> Option<&HarmCategory> {
        self.categories.iter().find(|c| c.id == id)
    }
}
