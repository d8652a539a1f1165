use std::collections::HashSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::CodingError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LevelId {
    L1,
    L2,
    L3,
    L4,
    L5,
}

impl LevelId {
    pub const ALL: [LevelId; 5] = [LevelId::L1, LevelId::L2, LevelId::L3, LevelId::L4, LevelId::L5];

    pub fn as_str(self) -> &'static str {
        match self {
            LevelId::L1 => "L1",
            LevelId::L2 => "L2",
            LevelId::L3 => "L3",
            LevelId::L4 => "L4",
            LevelId::L5 => "L5",
        }
    }
}

impl fmt::Display for LevelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LevelId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        LevelId::ALL.into_iter().find(|l| l.as_str() == s).ok_or_else(|| format!("unknown specificity level `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrincipleId {
    Proactive,
    Default,
    Embedded,
    FullFunctionality,
    EndToEnd,
    Transparency,
    Respect,
}

impl PrincipleId {
    pub const ALL: [PrincipleId; 7] = [
        PrincipleId::Proactive,
        PrincipleId::Default,
        PrincipleId::Embedded,
        PrincipleId::FullFunctionality,
        PrincipleId::EndToEnd,
        PrincipleId::Transparency,
        PrincipleId::Respect,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PrincipleId::Proactive => "proactive",
            PrincipleId::Default => "default",
            PrincipleId::Embedded => "embedded",
            PrincipleId::FullFunctionality => "full_functionality",
            PrincipleId::EndToEnd => "end_to_end",
            PrincipleId::Transparency => "transparency",
            PrincipleId::Respect => "respect",
        }
    }
}

impl fmt::Display for PrincipleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PrincipleId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PrincipleId::ALL.into_iter().find(|p| p.as_str() == s).ok_or_else(|| format!("unknown principle `{s}`"))
    }
}

/// A cue phrase from the codebook and the literal terms that signal it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cue {
    pub text: String,
    pub terms: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub example_of: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpecificityLevel {
    pub id: LevelId,
    pub name: String,
    pub definition: String,
    pub cues: Vec<Cue>,
    pub exclusions: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Principle {
    pub id: PrincipleId,
    pub name: String,
    pub definition: String,
    pub cues: Vec<Cue>,
    pub exclusions: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpecificityCodebook {
    pub source: String,
    pub decision_rule: String,
    pub levels: Vec<SpecificityLevel>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThemeCodebook {
    pub source: String,
    pub assignment_rule: String,
    pub principles: Vec<Principle>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Codebook {
    pub specificity: SpecificityCodebook,
    pub themes: ThemeCodebook,
}

impl Codebook {
    pub fn builtin() -> Self {
        Self::from_json(include_str!("../../data/codebook.json")).expect("bundled codebook is valid")
    }

    pub fn from_json(text: &str) -> Result<Self, CodingError> {
        let book: Codebook = serde_json::from_str(text).map_err(|e| CodingError::Codebook(e.to_string()))?;
        book.check()?;
        Ok(book)
    }

    pub fn load(path: &Path) -> Result<Self, CodingError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| CodingError::Codebook(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    fn check(&self) -> Result<(), CodingError> {
        let levels: Vec<LevelId> = self.specificity.levels.iter().map(|l| l.id).collect();
        if levels != LevelId::ALL {
            return Err(CodingError::Codebook("specificity levels must be exactly L1..L5 in order".into()));
        }
        let principles: HashSet<PrincipleId> = self.themes.principles.iter().map(|p| p.id).collect();
        if principles.len() != 7 || self.themes.principles.len() != 7 {
            return Err(CodingError::Codebook("themes must list each of the seven principles once".into()));
        }
        let cues = self.specificity.levels.iter().flat_map(|l| &l.cues).chain(self.themes.principles.iter().flat_map(|p| &p.cues));
        for cue in cues {
            if cue.text.trim().is_empty() || cue.terms.is_empty() || cue.terms.iter().any(|t| t.trim().is_empty()) {
                return Err(CodingError::Codebook(format!("cue `{}` needs text and non-blank terms", cue.text)));
            }
        }
        Ok(())
    }

    pub fn level(&self, id: LevelId) -> &SpecificityLevel {
        self.specificity.levels.iter().find(|l| l.id == id).expect("codebook holds all levels")
    }

    pub fn principle(&self, id: PrincipleId) -> &Principle {
        self.themes.principles.iter().find(|p| p.id == id).expect("codebook holds all principles")
    }

    /// Every cue and exclusion text; rationales must quote from these.
    pub fn citable_texts(&self) -> impl Iterator<Item = &str> {
        let spec = self
            .specificity
            .levels
            .iter()
            .flat_map(|l| l.cues.iter().map(|c| c.text.as_str()).chain(l.exclusions.iter().map(String::as_str)));
        let themes = self
            .themes
            .principles
            .iter()
            .flat_map(|p| p.cues.iter().map(|c| c.text.as_str()).chain(p.exclusions.iter().map(String::as_str)));
        spec.chain(themes)
    }

    /// Whether `quote` occurs inside some cue or exclusion text.
    pub fn cites(&self, quote: &str) -> bool {
        let quote = quote.trim();
        !quote.is_empty() && self.citable_texts().any(|t| t.contains(quote))
    }
}
