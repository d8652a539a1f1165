//! Deterministic offline provider.
//!
//! Responses come from, in order: canned payloads whose hints all occur in the
//! request's task text, then (optionally) a synthetic responder that builds a
//! minimal schema-conforming payload from the structured inputs embedded in
//! the task text as a fenced JSON block.

use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::provider::{Provider, ProviderError};
use super::request::{extract_json_block, ChatRequest};
use super::schema::SchemaId;

/// A fixed response served when every hint occurs in the task text.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CannedResponse {
    pub schema: SchemaId,
    #[serde(default)]
    pub hints: Vec<String>,
    pub payload: Value,
}

impl CannedResponse {
    fn matches(&self, request: &ChatRequest) -> bool {
        let task = request.task_text();
        self.schema == request.output_schema && self.hints.iter().all(|h| task.contains(h.as_str()))
    }
}

type ResponderFn = dyn Fn(&ChatRequest) -> Result<String, ProviderError> + Send + Sync;

pub struct MockProvider {
    canned: Vec<CannedResponse>,
    synthetic: bool,
    responder: Option<Box<ResponderFn>>,
}

impl fmt::Debug for MockProvider {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MockProvider")
            .field("canned", &self.canned.len())
            .field("synthetic", &self.synthetic)
            .field("responder", &self.responder.is_some())
            .finish()
    }
}

impl Default for MockProvider {
    fn default() -> Self {
        Self::synthetic()
    }
}

impl MockProvider {
    /// Synthetic responses only.
    pub fn synthetic() -> Self {
        Self { canned: Vec::new(), synthetic: true, responder: None }
    }

    /// Canned responses only; unmatched requests fail.
    pub fn canned(canned: Vec<CannedResponse>) -> Self {
        Self { canned, synthetic: false, responder: None }
    }

    pub fn from_fn(f: impl Fn(&ChatRequest) -> Result<String, ProviderError> + Send + Sync + 'static) -> Self {
        Self { canned: Vec::new(), synthetic: false, responder: Some(Box::new(f)) }
    }

    pub fn with_canned(mut self, canned: impl IntoIterator<Item = CannedResponse>) -> Self {
        self.canned.extend(canned);
        self
    }

    pub fn with_synthetic_fallback(mut self) -> Self {
        self.synthetic = true;
        self
    }

    /// Load every `*.json` file in `dir`; each holds one canned response or a list.
    pub fn load_canned_dir(dir: &Path) -> std::io::Result<Vec<CannedResponse>> {
        let mut paths: Vec<_> = fs::read_dir(dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().and_then(|e| e.to_str()) == Some("json"))
            .collect();
        paths.sort();
        let mut out = Vec::new();
        for path in paths {
            let text = fs::read_to_string(&path)?;
            let value: Value = serde_json::from_str(&text)
                .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, format!("{}: {e}", path.display())))?;
            let parsed: Result<Vec<CannedResponse>, _> = match value {
                Value::Array(_) => serde_json::from_value(value),
                other => serde_json::from_value(other).map(|one| vec![one]),
            };
            out.extend(parsed.map_err(|e| {
                std::io::Error::new(std::io::ErrorKind::InvalidData, format!("{}: {e}", path.display()))
            })?);
        }
        Ok(out)
    }
}

impl Provider for MockProvider {
    fn complete(&self, request: &ChatRequest) -> Result<String, ProviderError> {
        if let Some(hit) = self.canned.iter().find(|c| c.matches(request)) {
            return Ok(serde_json::to_string_pretty(&hit.payload).expect("json values serialize"));
        }
        if let Some(responder) = &self.responder {
            return responder(request);
        }
        if self.synthetic {
            let context = extract_json_block(request.task_text()).unwrap_or(Value::Null);
            let payload = synthesize(request.output_schema, &context);
            return Ok(serde_json::to_string_pretty(&payload).expect("json values serialize"));
        }
        Err(ProviderError::NoMockResponse(request.output_schema.to_string()))
    }
}

fn text_at<'a>(value: &'a Value, pointer: &str, default: &'a str) -> &'a str {
    value.pointer(pointer).and_then(Value::as_str).unwrap_or(default)
}

fn synthesize(schema: SchemaId, ctx: &Value) -> Value {
    match schema {
        SchemaId::PersonaTypes => {
            let count = ctx["count"].as_u64().unwrap_or(1) as usize;
            let dims: Vec<&Value> = ctx["taxonomy"].as_array().map(|d| d.iter().collect()).unwrap_or_default();
            let types: Vec<Value> = (0..count)
                .map(|i| {
                    let dim = dims.get(i % dims.len().max(1)).copied();
                    let id = dim.map(|d| text_at(d, "/id", "intersectional_identity")).unwrap_or("intersectional_identity");
                    let label = dim.map(|d| text_at(d, "/label", id)).unwrap_or(id);
                    json!({
                        "label": format!("Synthetic persona type {} ({})", i + 1, label.to_lowercase()),
                        "dimensions": [id],
                        "rationale": format!("Covers the `{id}` dimension."),
                    })
                })
                .collect();
            json!({ "persona_types": types })
        }
        SchemaId::PersonaProfile => {
            let label = text_at(ctx, "/persona_type/label", "synthetic persona");
            let entry = |kind: &str| {
                let first = &ctx["catalogs"][kind][0];
                match first["id"].as_str() {
                    Some(id) => json!({ "catalog_id": id, "text": text_at(first, "/text", "catalog entry") }),
                    None => json!({ "text": format!("Synthetic {kind} entry"), "source": "synthetic" }),
                }
            };
            json!({
                "name": format!("Alex {}", text_at(ctx, "/persona_type/type_id", "0")),
                "age": 35,
                "demographics": format!("Adult in the group: {label}."),
                "tech_comfort": { "level": "medium", "justification": "Uses a smartphone daily." },
                "privacy_awareness": { "level": "medium", "justification": "Adjusts some settings." },
                "protected_info": ["location"],
                "tensions": [entry("tensions")],
                "responses": [entry("responses")],
                "costs": [entry("costs")],
                "sources": ["synthetic"],
            })
        }
        SchemaId::IdentitySentence => {
            let name = text_at(ctx, "/persona/name", "The user");
            let demographics = text_at(ctx, "/persona/demographics", "an adult");
            let comfort = text_at(ctx, "/persona/tech_comfort/justification", "uses a phone daily");
            json!({
                "text": format!("{name} is {}. Tech comfort: {}.", demographics.trim_end_matches('.'), comfort.trim_end_matches('.')),
                "slots": {
                    "gender": "unspecified",
                    "role": demographics,
                    "vulnerability": text_at(ctx, "/persona/type_id", "vulnerable group"),
                    "tech_comfort": comfort,
                }
            })
        }
        SchemaId::FlowChoice => json!({
            "flow_id": text_at(ctx, "/function/flows/0/flow_id", ""),
            "rationale": "First listed flow.",
        }),
        SchemaId::JourneyStory => {
            let first = &ctx["flows"][0];
            let function_id = text_at(first, "/function_id", "");
            let flow_id = text_at(first, "/flow/flow_id", "");
            let steps = first["flow"]["steps"].as_array().map(Vec::len).unwrap_or(1).max(1);
            let interface = text_at(first, &format!("/flow/steps/{}/interface", steps - 1), "the final screen");
            let step_ref = json!({ "function_id": function_id, "flow_id": flow_id, "step": steps });
            let category = text_at(ctx, "/persona/protected_info/0", "activity");
            let harm = text_at(ctx, "/harm_taxonomy/0/id", "psychological");
            json!({
                "narrative": format!("{} uses the feature and their {category} information is exposed.", text_at(ctx, "/persona/name", "The user")),
                "motivations": "Wants to use the feature without being exposed.",
                "sensitive_info_leaked": [{ "category": category, "description": format!("{category} details") }],
                "leak_steps": [step_ref.clone()],
                "design_problems": [{ "step": step_ref, "problem": format!("{interface} gives no warning before exposing information.") }],
                "harms": [{ "category": harm, "consequence": "The user is distressed by the exposure." }],
            })
        }
        SchemaId::ReviewCoding => json!({ "abstain": true }),
    }
}
