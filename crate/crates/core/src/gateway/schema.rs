use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Named output schema a request must satisfy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemaId {
    PersonaTypes,
    PersonaProfile,
    IdentitySentence,
    FlowChoice,
    JourneyStory,
    ReviewCoding,
}

impl SchemaId {
    pub const ALL: [SchemaId; 6] = [
        SchemaId::PersonaTypes,
        SchemaId::PersonaProfile,
        SchemaId::IdentitySentence,
        SchemaId::FlowChoice,
        SchemaId::JourneyStory,
        SchemaId::ReviewCoding,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SchemaId::PersonaTypes => "persona_types",
            SchemaId::PersonaProfile => "persona_profile",
            SchemaId::IdentitySentence => "identity_sentence",
            SchemaId::FlowChoice => "flow_choice",
            SchemaId::JourneyStory => "journey_story",
            SchemaId::ReviewCoding => "review_coding",
        }
    }

    /// JSON Schema document embedded in prompts.
    pub fn document(self) -> &'static str {
        match self {
            SchemaId::PersonaTypes => include_str!("../../data/schemas/persona_types.json"),
            SchemaId::PersonaProfile => include_str!("../../data/schemas/persona_profile.json"),
            SchemaId::IdentitySentence => include_str!("../../data/schemas/identity_sentence.json"),
            SchemaId::FlowChoice => include_str!("../../data/schemas/flow_choice.json"),
            SchemaId::JourneyStory => include_str!("../../data/schemas/journey_story.json"),
            SchemaId::ReviewCoding => include_str!("../../data/schemas/review_coding.json"),
        }
    }
}

impl fmt::Display for SchemaId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchemaId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SchemaId::ALL
            .into_iter()
            .find(|id| id.name() == s)
            .ok_or_else(|| format!("unknown output schema `{s}`"))
    }
}
