use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::PersonaError;

/// The five vulnerability dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DimensionId {
    StructuralExclusion,
    IntersectionalIdentity,
    SocioeconomicDisadvantage,
    InternalExperiential,
    EmergencyCapacity,
}

impl DimensionId {
    pub const ALL: [DimensionId; 5] = [
        DimensionId::StructuralExclusion,
        DimensionId::IntersectionalIdentity,
        DimensionId::SocioeconomicDisadvantage,
        DimensionId::InternalExperiential,
        DimensionId::EmergencyCapacity,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DimensionId::StructuralExclusion => "structural_exclusion",
            DimensionId::IntersectionalIdentity => "intersectional_identity",
            DimensionId::SocioeconomicDisadvantage => "socioeconomic_disadvantage",
            DimensionId::InternalExperiential => "internal_experiential",
            DimensionId::EmergencyCapacity => "emergency_capacity",
        }
    }
}

impl fmt::Display for DimensionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DimensionId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        DimensionId::ALL
            .into_iter()
            .find(|d| d.as_str() == s)
            .ok_or_else(|| format!("unknown vulnerability dimension `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VulnerabilityDimension {
    pub id: DimensionId,
    pub label: String,
    pub indicators: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Taxonomy {
    pub dimensions: Vec<VulnerabilityDimension>,
}

impl Taxonomy {
    pub fn builtin() -> Self {
        Self::from_json(include_str!("../../data/taxonomy.json")).expect("bundled taxonomy is valid")
    }

    pub fn from_json(text: &str) -> Result<Self, PersonaError> {
        let taxonomy: Taxonomy =
            serde_json::from_str(text).map_err(|e| PersonaError::Data(format!("taxonomy: {e}")))?;
        let mut ids: Vec<DimensionId> = taxonomy.dimensions.iter().map(|d| d.id).collect();
        ids.sort();
        ids.dedup();
        if ids.len() != 5 || taxonomy.dimensions.len() != 5 {
            return Err(PersonaError::Data("taxonomy must list each of the five dimensions exactly once".into()));
        }
        Ok(taxonomy)
    }

    pub fn load(path: &Path) -> Result<Self, PersonaError> {
        let text = std::fs::read_to_string(path).map_err(|e| PersonaError::Data(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn get(&self, id: DimensionId) -> &VulnerabilityDimension {
        self.dimensions.iter().find(|d| d.id == id).expect("taxonomy holds all five dimensions")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_has_five_dimensions() {
        let t = Taxonomy::builtin();
        assert_eq!(t.dimensions.len(), 5);
        assert_eq!(t.get(DimensionId::StructuralExclusion).label, "Structural and institutional exclusion");
        assert_eq!(t.get(DimensionId::EmergencyCapacity).indicators.len(), 3);
    }

    #[test]
    fn duplicate_dimension_rejected() {
        let text = include_str!("../../data/taxonomy.json").replace("emergency_capacity", "structural_exclusion");
        assert!(Taxonomy::from_json(&text).is_err());
    }
}
