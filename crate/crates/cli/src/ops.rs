//! Operations shared by the CLI commands and the HTTP handlers.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use privjourney::coding::{cohen_kappa, read_findings, read_label_pairs, tally, Codebook, CodedFinding, Coder, Tally};
use privjourney::flow::{parse_feature_document, FlowError};
use privjourney::gateway::Gateway;
use privjourney::journey::{JourneyStory, StoryGenerator};
use privjourney::persona::{filter_personas, generate_personas, Catalogs, DimensionId, Persona, PersonaLibrary, Taxonomy};
use privjourney::storyboard::{build_storyboard, render_report, ReportFormat, Storyboard};
use privjourney::workspace::Workspace;
use privjourney::ValidationReport;

use crate::error::AppError;

pub type Result<T> = std::result::Result<T, AppError>;

/// Report for a feature document; malformed documents are errors.
pub fn validate_feature_text(raw: &str) -> Result<ValidationReport> {
    match parse_feature_document(raw) {
        Ok(_) => Ok(ValidationReport::new()),
        Err(FlowError::Invalid { report }) => Ok(report),
        Err(e) => Err(e.into()),
    }
}

pub fn build_personas(ws: &Workspace, gateway: &Gateway, count: usize) -> Result<PersonaLibrary> {
    let library = generate_personas(gateway, &Taxonomy::builtin(), &Catalogs::builtin(), count)?;
    ws.save_library(&library)?;
    Ok(library)
}

pub fn parse_dimension(raw: &str) -> Result<DimensionId> {
    serde_json::from_value(serde_json::Value::String(raw.to_string()))
        .map_err(|_| AppError::bad_request(format!("unknown dimension `{raw}`")))
}

pub fn personas(ws: &Workspace, dimension: Option<&str>, protected_info: Option<&str>) -> Result<Vec<Persona>> {
    let dimension = dimension.map(parse_dimension).transpose()?;
    let library = ws.library();
    Ok(filter_personas(&library, dimension, protected_info).into_iter().cloned().collect())
}

pub fn persona(ws: &Workspace, id: &str) -> Result<Persona> {
    ws.library().persona(id).cloned().ok_or_else(|| AppError::not_found("persona", id))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoryRequest {
    pub persona_id: String,
    pub feature_id: String,
    pub functions: Vec<String>,
}

pub fn create_story(ws: &Workspace, gateway: &Gateway, req: &StoryRequest) -> Result<JourneyStory> {
    let persona = persona(ws, &req.persona_id)?;
    let spec = ws.feature(&req.feature_id)?;
    let story = StoryGenerator::new(gateway).generate_story(&persona, &spec, &req.functions)?;
    ws.put_story(&story)?;
    Ok(story)
}

pub fn storyboard(ws: &Workspace, story_id: &str) -> Result<Storyboard> {
    let story = ws.story(story_id)?;
    let spec = ws.feature(&story.feature_id)?;
    Ok(build_storyboard(&story, &spec)?)
}

/// Render and store the report for a story.
pub fn render(ws: &Workspace, story_id: &str, format: ReportFormat) -> Result<(String, PathBuf)> {
    let story = ws.story(story_id)?;
    let spec = ws.feature(&story.feature_id)?;
    let persona = persona(ws, &story.persona_id)?;
    let board = build_storyboard(&story, &spec)?;
    let text = render_report(&board, &story, &persona, format)?;
    let path = ws.put_report(story_id, format, &text)?;
    Ok((text, path))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodedBatch {
    pub batch_id: String,
    pub coded: Vec<CodedFinding>,
    pub tally: Tally,
}

/// Code a findings table (rules first, then the coding model) and store it.
pub fn code_findings(ws: &Workspace, gateway: &Gateway, table: &str) -> Result<CodedBatch> {
    let findings = read_findings(table.as_bytes())?;
    let coded = Coder::with_model(Codebook::builtin(), gateway).code_all(&findings)?;
    let batch_id = ws.put_coded(&coded)?;
    let tally = tally(&coded);
    Ok(CodedBatch { batch_id, coded, tally })
}

pub fn coded_batch(ws: &Workspace, batch_id: &str) -> Result<CodedBatch> {
    let coded = ws.coded(batch_id)?;
    let tally = tally(&coded);
    Ok(CodedBatch { batch_id: batch_id.to_string(), coded, tally })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KappaResult {
    pub kappa: f64,
    pub items: usize,
}

pub fn kappa(table: &str, a: Option<&str>, b: Option<&str>) -> Result<KappaResult> {
    let (la, lb) = read_label_pairs(table.as_bytes(), a, b)?;
    Ok(KappaResult { kappa: cohen_kappa(&la, &lb)?, items: la.len() })
}

/// Kappa rounded to four places, without a negative zero.
pub fn format_kappa(k: f64) -> String {
    let r = (k * 1e4).round() / 1e4 + 0.0;
    format!("{r}")
}
