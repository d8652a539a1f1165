//! Literal cue matching against the codebook.
//!
//! Text and cue terms are lowercased and split on anything that is not a
//! letter or digit; a trailing `s` is dropped from tokens longer than four
//! characters. A term matches when its tokens occur contiguously in the text.

use super::codebook::{Codebook, Cue, LevelId, PrincipleId};
use super::CodingError;

pub fn tokens(text: &str) -> Vec<String> {
    text.to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(|t| match t.strip_suffix('s') {
            Some(stem) if t.chars().count() > 4 => stem.to_string(),
            _ => t.to_string(),
        })
        .collect()
}

fn contains_run(haystack: &[String], needle: &[String]) -> bool {
    !needle.is_empty() && haystack.windows(needle.len()).any(|w| w == needle)
}

/// Matched terms of `cue` and their total token count.
fn cue_score(text: &[String], cue: &Cue) -> usize {
    cue.terms
        .iter()
        .map(|term| tokens(term))
        .filter(|t| contains_run(text, t))
        .map(|t| t.len())
        .sum()
}

fn matched<'c>(text: &[String], cues: &'c [Cue]) -> (usize, Vec<&'c str>) {
    let mut total = 0;
    let mut cited = Vec::new();
    for cue in cues {
        let score = cue_score(text, cue);
        if score > 0 {
            total += score;
            cited.push(cue.text.as_str());
        }
    }
    (total, cited)
}

#[derive(Debug, Clone)]
pub struct RuleCoder {
    codebook: Codebook,
}

impl Default for RuleCoder {
    fn default() -> Self {
        Self::new(Codebook::builtin())
    }
}

impl RuleCoder {
    pub fn new(codebook: Codebook) -> Self {
        Self { codebook }
    }

    pub fn codebook(&self) -> &Codebook {
        &self.codebook
    }

    /// The most concrete level with a matching cue.
    pub fn code_specificity(&self, text: &str) -> Result<(LevelId, Vec<String>), CodingError> {
        let toks = tokens(text);
        for level in self.codebook.specificity.levels.iter().rev() {
            let (_, cited) = matched(&toks, &level.cues);
            if !cited.is_empty() {
                return Ok((level.id, cited.into_iter().map(str::to_string).collect()));
            }
        }
        Err(CodingError::Uncodeable { axis: "specificity", text: text.to_string() })
    }

    /// The principle with the most matched cue-term tokens. A tie between
    /// Respect and Visibility & Transparency goes to the latter only when the
    /// text calls something confusing or unclear; other ties keep codebook
    /// order.
    pub fn code_theme(&self, text: &str) -> Result<(PrincipleId, Vec<String>), CodingError> {
        let toks = tokens(text);
        let scored: Vec<(PrincipleId, usize, Vec<&str>)> = self
            .codebook
            .themes
            .principles
            .iter()
            .map(|p| {
                let (score, cited) = matched(&toks, &p.cues);
                (p.id, score, cited)
            })
            .collect();
        let best = scored.iter().map(|s| s.1).max().unwrap_or(0);
        if best == 0 {
            return Err(CodingError::Uncodeable { axis: "theme", text: text.to_string() });
        }
        let top: Vec<&(PrincipleId, usize, Vec<&str>)> = scored.iter().filter(|s| s.1 == best).collect();
        let has = |id| top.iter().any(|s| s.0 == id);
        let pick = if has(PrincipleId::Respect) && has(PrincipleId::Transparency) {
            let confusing = toks.iter().any(|t| matches!(t.as_str(), "confusing" | "confuse" | "confused" | "unclear"));
            if confusing {
                PrincipleId::Transparency
            } else {
                PrincipleId::Respect
            }
        } else {
            top[0].0
        };
        let cited = &top.iter().find(|s| s.0 == pick).expect("pick is among the top").2;
        Ok((pick, cited.iter().map(|c| c.to_string()).collect()))
    }
}
