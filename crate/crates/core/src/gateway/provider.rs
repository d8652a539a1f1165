use std::time::Duration;

use serde_json::{json, Value};
use thiserror::Error;

use super::request::{ChatRequest, Role};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProviderError {
    #[error("ProviderError: transport: {0}")]
    Transport(String),
    #[error("ProviderError: unexpected response: {0}")]
    BadResponse(String),
    #[error("ProviderError: not configured: {0}")]
    NotConfigured(String),
    #[error("ProviderError: mock has no response for schema {0}")]
    NoMockResponse(String),
}

/// A chat model backend returning raw response text.
pub trait Provider: Send + Sync {
    fn complete(&self, request: &ChatRequest) -> Result<String, ProviderError>;

    /// Whether calls leave the process.
    fn uses_network(&self) -> bool {
        false
    }
}

/// OpenAI-compatible `/chat/completions` client.
#[derive(Debug, Clone)]
pub struct LiveProvider {
    base_url: String,
    api_key: String,
    send_temperature: bool,
    timeout: Duration,
}

impl LiveProvider {
    pub fn new(base_url: impl Into<String>, api_key: impl Into<String>) -> Self {
        Self {
            base_url: base_url.into().trim_end_matches('/').to_string(),
            api_key: api_key.into(),
            send_temperature: true,
            timeout: Duration::from_secs(300),
        }
    }

    /// Reasoning models reject an explicit temperature.
    pub fn without_temperature(mut self) -> Self {
        self.send_temperature = false;
        self
    }

    fn body(&self, request: &ChatRequest) -> Value {
        let messages: Vec<Value> = request
            .messages
            .iter()
            .map(|m| {
                let role = match m.role {
                    Role::System => "system",
                    Role::User => "user",
                    Role::Assistant => "assistant",
                };
                json!({ "role": role, "content": m.content })
            })
            .collect();
        let mut body = json!({
            "model": request.model_name,
            "messages": messages,
            "response_format": { "type": "json_object" },
        });
        if self.send_temperature {
            body["temperature"] = json!(request.temperature);
        }
        body
    }
}

impl Provider for LiveProvider {
    fn complete(&self, request: &ChatRequest) -> Result<String, ProviderError> {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(self.timeout))
            .build()
            .into();
        let url = format!("{}/chat/completions", self.base_url);
        let mut response = agent
            .post(&url)
            .header("Authorization", &format!("Bearer {}", self.api_key))
            .send_json(self.body(request))
            .map_err(|e| ProviderError::Transport(e.to_string()))?;
        let value: Value = response
            .body_mut()
            .read_json()
            .map_err(|e| ProviderError::BadResponse(e.to_string()))?;
        value["choices"][0]["message"]["content"]
            .as_str()
            .map(str::to_string)
            .ok_or_else(|| ProviderError::BadResponse("missing choices[0].message.content".into()))
    }

    fn uses_network(&self) -> bool {
        true
    }
}
