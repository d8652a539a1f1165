//! Coding review findings by specificity level and privacy-by-design theme,
//! inter-rater agreement, and distribution tallies.

mod codebook;
mod kappa;
mod rules;
mod table;
mod tally;

use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use crate::gateway::{task_with_context, Gateway, GatewayError, SchemaId, Stage};
use crate::report::{ValidationReport, Violation, ViolationKind};

pub use codebook::{Codebook, Cue, LevelId, Principle, PrincipleId, SpecificityLevel};
pub use kappa::cohen_kappa;
pub use rules::{tokens, RuleCoder};
pub use table::{read_coded, read_findings, read_label_pairs, write_coded, RATIONALE_SEPARATOR};
pub use tally::{tally, ConditionTally, KindTally, Tally, UNSPECIFIED_CONDITION};

#[derive(Debug, Error)]
pub enum CodingError {
    #[error("Uncodeable: no {axis} cue matches `{text}`")]
    Uncodeable { axis: &'static str, text: String },
    #[error("LengthMismatch: label sequences have lengths {left} and {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("EmptySequences: kappa needs at least one item")]
    EmptySequences,
    #[error("DegenerateMarginals: chance agreement is 1 but observed agreement is not")]
    DegenerateMarginals,
    #[error("EmptyFinding: finding `{0}` has no text")]
    EmptyFinding(String),
    #[error("CodebookError: {0}")]
    Codebook(String),
    #[error("TableError: {0}")]
    Table(String),
    #[error(transparent)]
    Gateway(#[from] GatewayError),
}

impl CodingError {
    pub fn name(&self) -> &'static str {
        match self {
            CodingError::Uncodeable { .. } => "Uncodeable",
            CodingError::LengthMismatch { .. } => "LengthMismatch",
            CodingError::EmptySequences => "EmptySequences",
            CodingError::DegenerateMarginals => "DegenerateMarginals",
            CodingError::EmptyFinding(_) => "EmptyFinding",
            CodingError::Codebook(_) => "CodebookError",
            CodingError::Table(_) => "TableError",
            CodingError::Gateway(e) => e.name(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FindingKind {
    Problem,
    Suggestion,
}

impl FindingKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FindingKind::Problem => "problem",
            FindingKind::Suggestion => "suggestion",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReviewFinding {
    pub finding_id: String,
    pub kind: FindingKind,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub condition: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub participant: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coder: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodedFinding {
    #[serde(flatten)]
    pub finding: ReviewFinding,
    pub level: LevelId,
    pub principle: PrincipleId,
    /// Cue or exclusion texts quoted from the codebook.
    pub rationale: Vec<String>,
}

/// Model answer for one finding.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodingPayload {
    pub abstain: bool,
    #[serde(default)]
    pub level: Option<LevelId>,
    #[serde(default)]
    pub principle: Option<PrincipleId>,
    #[serde(default)]
    pub rationale: Vec<String>,
}

const CODING_SYSTEM: &str = "You code privacy review findings with two codebooks. For specificity, \
assign the highest (most concrete) level explicitly supported by the utterance. For theme, choose the \
single principle that best captures the primary privacy issue. Quote the codebook cues or exclusions \
that justify your codes verbatim in the rationale. Set abstain to true when no level or principle applies.";

fn check_payload(p: &CodingPayload, codebook: &Codebook) -> ValidationReport {
    let mut report = ValidationReport::new();
    if p.abstain {
        return report;
    }
    if p.level.is_none() {
        report.push(Violation::new(ViolationKind::MissingField, "level", "level is required unless abstaining"));
    }
    if p.principle.is_none() {
        report.push(Violation::new(ViolationKind::MissingField, "principle", "principle is required unless abstaining"));
    }
    if p.rationale.is_empty() {
        report.push(Violation::new(ViolationKind::MissingField, "rationale", "cite at least one codebook cue"));
    }
    for (i, quote) in p.rationale.iter().enumerate() {
        if !codebook.cites(quote) {
            report.push(Violation::new(
                ViolationKind::InvalidValue,
                format!("rationale[{i}]"),
                format!("`{quote}` is not quoted from the codebook"),
            ));
        }
    }
    report
}

/// Rule-based coding with an optional model fallback for text no cue covers.
#[derive(Debug)]
pub struct Coder<'g> {
    rules: RuleCoder,
    gateway: Option<&'g Gateway>,
}

impl Coder<'static> {
    pub fn rules(codebook: Codebook) -> Self {
        Coder { rules: RuleCoder::new(codebook), gateway: None }
    }
}

impl<'g> Coder<'g> {
    pub fn with_model(codebook: Codebook, gateway: &'g Gateway) -> Self {
        Coder { rules: RuleCoder::new(codebook), gateway: Some(gateway) }
    }

    pub fn codebook(&self) -> &Codebook {
        self.rules.codebook()
    }

    pub fn code(&self, finding: &ReviewFinding) -> Result<CodedFinding, CodingError> {
        if finding.text.trim().is_empty() {
            return Err(CodingError::EmptyFinding(finding.finding_id.clone()));
        }
        let level = self.rules.code_specificity(&finding.text);
        let theme = self.rules.code_theme(&finding.text);
        let (level, principle, rationale) = match (level, theme) {
            (Ok((level, mut why)), Ok((principle, more))) => {
                for cue in more {
                    if !why.contains(&cue) {
                        why.push(cue);
                    }
                }
                (level, principle, why)
            }
            (level, theme) => {
                let Some(gateway) = self.gateway else {
                    return Err(level.err().or(theme.err()).expect("one axis failed"));
                };
                self.model_code(gateway, finding, level.ok(), theme.ok())?
            }
        };
        Ok(CodedFinding { finding: finding.clone(), level, principle, rationale })
    }

    fn model_code(
        &self,
        gateway: &Gateway,
        finding: &ReviewFinding,
        level: Option<(LevelId, Vec<String>)>,
        theme: Option<(PrincipleId, Vec<String>)>,
    ) -> Result<(LevelId, PrincipleId, Vec<String>), CodingError> {
        let codebook = self.codebook();
        let task = task_with_context(
            &format!("Code this {} finding:\n\"{}\"", finding.kind.as_str(), finding.text.trim()),
            &json!({ "codebook": codebook }),
        );
        let request = gateway.request(Stage::Coding, CODING_SYSTEM, &task, SchemaId::ReviewCoding);
        let answer = gateway.complete_structured(&request, |p: &CodingPayload| check_payload(p, codebook))?.value;
        let uncodeable = |axis| CodingError::Uncodeable { axis, text: finding.text.clone() };
        if answer.abstain {
            return Err(uncodeable(if level.is_none() { "specificity" } else { "theme" }));
        }
        let mut rationale = answer.rationale;
        let level = match level {
            Some((l, why)) => {
                rationale.extend(why);
                l
            }
            None => answer.level.ok_or_else(|| uncodeable("specificity"))?,
        };
        let principle = match theme {
            Some((p, why)) => {
                rationale.extend(why);
                p
            }
            None => answer.principle.ok_or_else(|| uncodeable("theme"))?,
        };
        rationale.dedup();
        Ok((level, principle, rationale))
    }

    /// Code every finding, stopping at the first failure.
    pub fn code_all(&self, findings: &[ReviewFinding]) -> Result<Vec<CodedFinding>, CodingError> {
        findings.iter().map(|f| self.code(f)).collect()
    }
}
