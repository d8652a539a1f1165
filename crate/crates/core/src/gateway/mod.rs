//! Structured-output LLM access.
//!
//! Every call goes through [`Gateway::complete_structured`], which
//!
//! 1. hashes the canonical request,
//! 2. in replay mode answers from the transcript cache (a miss is an error),
//! 3. otherwise asks the provider, parses the response into the payload type,
//!    runs the caller's validator, and on failure appends the response plus a
//!    repair message listing the violations, up to the retry budget,
//! 4. records the accepted transcript under the original request hash.

mod cache;
mod mock;
mod provider;
mod request;
mod schema;

use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::report::ValidationReport;

pub use cache::{CacheError, Transcript, TranscriptCache};
pub use mock::{CannedResponse, MockProvider};
pub use provider::{LiveProvider, Provider, ProviderError};
pub use request::{
    canonical_json, extract_json_block, normalize_whitespace, strip_fences, task_with_context, ChatRequest, Message, RequestHash, Role,
    Stage,
};
pub use schema::SchemaId;

pub const DEFAULT_RETRY_BUDGET: u32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProviderMode {
    Live,
    Replay,
    Mock,
}

impl FromStr for ProviderMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "live" => Ok(ProviderMode::Live),
            "replay" => Ok(ProviderMode::Replay),
            "mock" => Ok(ProviderMode::Mock),
            other => Err(format!("unknown provider mode `{other}` (expected live, replay or mock)")),
        }
    }
}

impl fmt::Display for ProviderMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProviderMode::Live => "live",
            ProviderMode::Replay => "replay",
            ProviderMode::Mock => "mock",
        })
    }
}

/// Model name per pipeline stage.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelNames {
    pub persona: String,
    pub story: String,
    pub coding: String,
}

impl Default for ModelNames {
    fn default() -> Self {
        Self {
            persona: "o4-mini".into(),
            story: "gpt-5".into(),
            coding: "gpt-5".into(),
        }
    }
}

impl ModelNames {
    pub fn for_stage(&self, stage: Stage) -> &str {
        match stage {
            Stage::Persona => &self.persona,
            Stage::Story => &self.story,
            Stage::Coding => &self.coding,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GatewaySettings {
    pub models: ModelNames,
    /// Total attempts per request, including the first.
    pub retry_budget: u32,
    pub temperature: f64,
}

impl Default for GatewaySettings {
    fn default() -> Self {
        Self {
            models: ModelNames::default(),
            retry_budget: DEFAULT_RETRY_BUDGET,
            temperature: 0.0,
        }
    }
}

/// One rejected response.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttemptRecord {
    pub attempt: u32,
    pub response_text: String,
    pub violations: Vec<String>,
}

#[derive(Debug, Error)]
pub enum GatewayError {
    #[error("GenerationInvalid: {schema} still invalid after {} attempt(s): {}", attempts.len(), last_violations(attempts))]
    GenerationInvalid { schema: SchemaId, attempts: Vec<AttemptRecord> },
    #[error(transparent)]
    Provider(#[from] ProviderError),
    #[error("CacheMissInReplayMode: no transcript for request {request_hash}")]
    CacheMissInReplayMode { request_hash: RequestHash },
    #[error(transparent)]
    Cache(#[from] CacheError),
    #[error("InvalidRequest: {0}")]
    InvalidRequest(String),
}

fn last_violations(attempts: &[AttemptRecord]) -> String {
    attempts.last().map(|a| a.violations.join("; ")).unwrap_or_default()
}

impl GatewayError {
    pub fn name(&self) -> &'static str {
        match self {
            GatewayError::GenerationInvalid { .. } => "GenerationInvalid",
            GatewayError::Provider(_) => "ProviderError",
            GatewayError::CacheMissInReplayMode { .. } => "CacheMissInReplayMode",
            GatewayError::Cache(CacheError::CorruptEntry { .. }) => "CorruptEntry",
            GatewayError::Cache(_) => "CacheError",
            GatewayError::InvalidRequest(_) => "InvalidRequest",
        }
    }
}

/// A validated payload with the transcript that produced it.
#[derive(Debug, Clone)]
pub struct Structured<T> {
    pub value: T,
    pub transcript: Transcript,
}

pub struct Gateway {
    mode: ProviderMode,
    provider: Option<Arc<dyn Provider>>,
    cache: Option<TranscriptCache>,
    settings: GatewaySettings,
    network_calls: AtomicUsize,
    provider_calls: AtomicUsize,
}

impl fmt::Debug for Gateway {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Gateway")
            .field("mode", &self.mode)
            .field("cache", &self.cache.as_ref().map(|c| c.dir().to_path_buf()))
            .field("settings", &self.settings)
            .finish()
    }
}

impl Gateway {
    pub fn mock(provider: MockProvider) -> Self {
        Self::new(ProviderMode::Mock, Some(Arc::new(provider)), None)
    }

    /// Answers only from `cache`.
    pub fn replay(cache: TranscriptCache) -> Self {
        Self::new(ProviderMode::Replay, None, Some(cache))
    }

    /// Calls `provider` and records every accepted transcript into `cache`.
    pub fn live(provider: Arc<dyn Provider>, cache: TranscriptCache) -> Self {
        Self::new(ProviderMode::Live, Some(provider), Some(cache))
    }

    fn new(mode: ProviderMode, provider: Option<Arc<dyn Provider>>, cache: Option<TranscriptCache>) -> Self {
        Self {
            mode,
            provider,
            cache,
            settings: GatewaySettings::default(),
            network_calls: AtomicUsize::new(0),
            provider_calls: AtomicUsize::new(0),
        }
    }

    /// Record accepted transcripts (mock mode) so a session can be frozen.
    pub fn with_cache(mut self, cache: TranscriptCache) -> Self {
        self.cache = Some(cache);
        self
    }

    pub fn with_settings(mut self, settings: GatewaySettings) -> Self {
        self.settings = settings;
        self
    }

    pub fn mode(&self) -> ProviderMode {
        self.mode
    }

    pub fn settings(&self) -> &GatewaySettings {
        &self.settings
    }

    pub fn cache(&self) -> Option<&TranscriptCache> {
        self.cache.as_ref()
    }

    /// Provider calls that left the process.
    pub fn network_calls(&self) -> usize {
        self.network_calls.load(Ordering::Relaxed)
    }

    pub fn provider_calls(&self) -> usize {
        self.provider_calls.load(Ordering::Relaxed)
    }

    /// Build a request for `stage` with the configured model and temperature.
    /// The schema document is appended to the system prompt.
    pub fn request(&self, stage: Stage, system: &str, task: &str, schema: SchemaId) -> ChatRequest {
        let system = format!(
            "{}\n\nRespond with a single JSON object that conforms to this schema and nothing else:\n```json\n{}\n```",
            system.trim_end(),
            schema.document().trim_end()
        );
        ChatRequest {
            model_name: self.settings.models.for_stage(stage).to_string(),
            messages: vec![Message::system(system), Message::user(task)],
            output_schema: schema,
            temperature: self.settings.temperature,
        }
    }

    /// Obtain a payload of type `T` that passes `check`.
    pub fn complete_structured<T, F>(&self, request: &ChatRequest, check: F) -> Result<Structured<T>, GatewayError>
    where
        T: DeserializeOwned,
        F: Fn(&T) -> ValidationReport,
    {
        if request.messages.is_empty() {
            return Err(GatewayError::InvalidRequest("messages must be non-empty".into()));
        }
        let canonical = request.canonical();
        let hash = canonical.hash();

        if self.mode == ProviderMode::Replay {
            let cache = self.cache.as_ref().ok_or_else(|| {
                GatewayError::InvalidRequest("replay mode requires a transcript cache".into())
            })?;
            let transcript = cache
                .get(&hash)?
                .ok_or_else(|| GatewayError::CacheMissInReplayMode { request_hash: hash.clone() })?;
            return match evaluate::<T, F>(&transcript.response_text, &check) {
                Ok(value) => Ok(Structured { value, transcript }),
                Err(violations) => Err(GatewayError::GenerationInvalid {
                    schema: request.output_schema,
                    attempts: vec![AttemptRecord {
                        attempt: transcript.attempt_count,
                        response_text: transcript.response_text,
                        violations,
                    }],
                }),
            };
        }

        let provider = self
            .provider
            .as_ref()
            .ok_or_else(|| ProviderError::NotConfigured(format!("no provider for {} mode", self.mode)))?;
        let budget = self.settings.retry_budget.max(1);
        let mut conversation = canonical.clone();
        let mut attempts = Vec::new();
        for attempt in 1..=budget {
            self.provider_calls.fetch_add(1, Ordering::Relaxed);
            if provider.uses_network() {
                self.network_calls.fetch_add(1, Ordering::Relaxed);
            }
            let response = provider.complete(&conversation)?;
            match evaluate::<T, F>(&response, &check) {
                Ok(value) => {
                    let payload = serde_json::from_str(strip_fences(&response)).expect("evaluated responses are json");
                    let transcript = Transcript {
                        request_hash: hash,
                        request: canonical,
                        response_text: response,
                        validated_payload: payload,
                        attempt_count: attempt,
                    };
                    if let Some(cache) = &self.cache {
                        if !cache.is_read_only() {
                            cache.put(&transcript)?;
                        }
                    }
                    return Ok(Structured { value, transcript });
                }
                Err(violations) => {
                    tracing::debug!(schema = %request.output_schema, attempt, "response rejected");
                    conversation.messages.push(Message::assistant(response.clone()));
                    conversation.messages.push(Message::user(repair_message(&violations)));
                    attempts.push(AttemptRecord { attempt, response_text: response, violations });
                }
            }
        }
        Err(GatewayError::GenerationInvalid { schema: request.output_schema, attempts })
    }
}

/// Repair prompt quoting the violation list verbatim.
pub fn repair_message(violations: &[String]) -> String {
    let mut out = String::from("Your previous response failed validation:\n");
    for v in violations {
        out.push_str("- ");
        out.push_str(v);
        out.push('\n');
    }
    out.push_str("Return a corrected JSON object that fixes every listed problem.");
    out
}

fn evaluate<T, F>(response: &str, check: &F) -> Result<T, Vec<String>>
where
    T: DeserializeOwned,
    F: Fn(&T) -> ValidationReport,
{
    let body = strip_fences(response);
    let de = &mut serde_json::Deserializer::from_str(body);
    let value: T = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        vec![format!("schema violation at `{path}`: {}", e.inner())]
    })?;
    let report = check(&value);
    if report.is_empty() {
        Ok(value)
    } else {
        Err(report.to_lines())
    }
}
