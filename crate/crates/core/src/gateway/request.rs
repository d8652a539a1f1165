use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use super::schema::SchemaId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Message {
    pub role: Role,
    pub content: String,
}

impl Message {
    pub fn system(content: impl Into<String>) -> Self {
        Self { role: Role::System, content: content.into() }
    }

    pub fn user(content: impl Into<String>) -> Self {
        Self { role: Role::User, content: content.into() }
    }

    pub fn assistant(content: impl Into<String>) -> Self {
        Self { role: Role::Assistant, content: content.into() }
    }
}

/// Pipeline stage a request belongs to; selects the configured model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Persona,
    Story,
    Coding,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub model_name: String,
    pub messages: Vec<Message>,
    pub output_schema: SchemaId,
    pub temperature: f64,
}

/// Hex SHA-256 of a canonicalized request.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RequestHash(pub String);

impl fmt::Display for RequestHash {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl RequestHash {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

/// Line endings unified, trailing whitespace stripped per line, outer
/// whitespace trimmed.
pub fn normalize_whitespace(text: &str) -> String {
    text.replace("\r\n", "\n")
        .replace('\r', "\n")
        .lines()
        .map(str::trim_end)
        .collect::<Vec<_>>()
        .join("\n")
        .trim()
        .to_string()
}

impl ChatRequest {
    /// The request with whitespace-normalized message bodies.
    pub fn canonical(&self) -> ChatRequest {
        ChatRequest {
            model_name: self.model_name.trim().to_string(),
            messages: self
                .messages
                .iter()
                .map(|m| Message { role: m.role, content: normalize_whitespace(&m.content) })
                .collect(),
            output_schema: self.output_schema,
            temperature: self.temperature,
        }
    }

    pub fn hash(&self) -> RequestHash {
        let value = serde_json::to_value(self.canonical()).expect("requests serialize");
        let digest = Sha256::digest(canonical_json(&value).as_bytes());
        RequestHash(hex::encode(digest))
    }

    /// Content of the first user message: the task and its structured inputs.
    pub fn task_text(&self) -> &str {
        self.messages
            .iter()
            .find(|m| m.role == Role::User)
            .map(|m| m.content.as_str())
            .unwrap_or("")
    }

    /// Number of repair rounds already appended to this request.
    pub fn repair_round(&self) -> usize {
        self.messages.iter().filter(|m| m.role == Role::Assistant).count()
    }
}

/// Compact JSON with object keys sorted at every depth.
pub fn canonical_json(value: &Value) -> String {
    fn sort(value: &Value) -> Value {
        match value {
            Value::Object(map) => {
                let sorted: BTreeMap<&String, Value> = map.iter().map(|(k, v)| (k, sort(v))).collect();
                let mut out = serde_json::Map::new();
                for (k, v) in sorted {
                    out.insert(k.clone(), v);
                }
                Value::Object(out)
            }
            Value::Array(items) => Value::Array(items.iter().map(sort).collect()),
            other => other.clone(),
        }
    }
    serde_json::to_string(&sort(value)).expect("json values serialize")
}

/// Task text followed by its structured inputs as a fenced JSON block.
pub fn task_with_context(task: &str, context: &Value) -> String {
    let body = serde_json::to_string_pretty(context).expect("json values serialize");
    format!("{}\n\nInputs:\n```json\n{body}\n```", task.trim_end())
}

/// Last fenced ```json block in `text`, parsed.
pub fn extract_json_block(text: &str) -> Option<Value> {
    let start = text.rfind("```json")?;
    let body = &text[start + "```json".len()..];
    let end = body.find("```")?;
    serde_json::from_str(body[..end].trim()).ok()
}

/// Strip an optional code fence around a model response.
pub fn strip_fences(response: &str) -> &str {
    let trimmed = response.trim();
    if let Some(rest) = trimmed.strip_prefix("```") {
        let rest = rest.strip_prefix("json").unwrap_or(rest);
        if let Some(inner) = rest.trim_end().strip_suffix("```") {
            return inner.trim();
        }
    }
    trimmed
}
