//! Runtime configuration: a TOML file plus `PRIVJOURNEY_*` environment
//! overrides.
//!
//! ```toml
//! provider = "replay"
//! workspace = "./workspace"
//! retry_budget = 3
//! port = 8080
//!
//! [models]
//! story = "gpt-5"
//!
//! [live]
//! base_url = "https://api.openai.com/v1"
//! api_key_env = "OPENAI_API_KEY"
//! ```

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fixtures::demo_provider;
use crate::gateway::{
    CacheError, Gateway, GatewaySettings, LiveProvider, ModelNames, ProviderMode, TranscriptCache, DEFAULT_RETRY_BUDGET,
};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("ConfigError: {0}")]
    Invalid(String),
    #[error(transparent)]
    Cache(#[from] CacheError),
}

impl ConfigError {
    pub fn name(&self) -> &'static str {
        match self {
            ConfigError::Invalid(_) => "ConfigError",
            ConfigError::Cache(_) => "CacheError",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LiveSettings {
    pub base_url: String,
    /// Environment variable holding the API key.
    pub api_key_env: String,
    /// Send `temperature` with each request; reasoning models reject it.
    pub send_temperature: bool,
}

impl Default for LiveSettings {
    fn default() -> Self {
        Self {
            base_url: "https://api.openai.com/v1".into(),
            api_key_env: "OPENAI_API_KEY".into(),
            send_temperature: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub provider: ProviderMode,
    pub workspace: PathBuf,
    /// Transcript cache; defaults to `<workspace>/cache`.
    pub cache_dir: Option<PathBuf>,
    pub retry_budget: u32,
    pub temperature: f64,
    pub models: ModelNames,
    pub live: LiveSettings,
    /// Port for `serve`.
    pub port: u16,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            provider: ProviderMode::Replay,
            workspace: PathBuf::from("workspace"),
            cache_dir: None,
            retry_budget: DEFAULT_RETRY_BUDGET,
            temperature: 0.0,
            models: ModelNames::default(),
            live: LiveSettings::default(),
            port: 8080,
        }
    }
}

fn parse_env<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, ConfigError> {
    value.trim().parse().map_err(|_| ConfigError::Invalid(format!("{key}: cannot parse `{value}`")))
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    /// Read `path` if given, then apply overrides from the process environment.
    pub fn load(path: Option<&Path>) -> Result<Self, ConfigError> {
        let mut config = match path {
            Some(p) => {
                let text =
                    fs::read_to_string(p).map_err(|e| ConfigError::Invalid(format!("{}: {e}", p.display())))?;
                Self::from_toml(&text)?
            }
            None => Self::default(),
        };
        config.apply_env(|k| std::env::var(k).ok())?;
        Ok(config)
    }

    /// Apply `PRIVJOURNEY_*` overrides read through `lookup`.
    pub fn apply_env(&mut self, lookup: impl Fn(&str) -> Option<String>) -> Result<(), ConfigError> {
        if let Some(v) = lookup("PRIVJOURNEY_PROVIDER") {
            self.provider = v.trim().parse().map_err(ConfigError::Invalid)?;
        }
        if let Some(v) = lookup("PRIVJOURNEY_WORKSPACE") {
            self.workspace = PathBuf::from(v);
        }
        if let Some(v) = lookup("PRIVJOURNEY_CACHE_DIR") {
            self.cache_dir = Some(PathBuf::from(v));
        }
        if let Some(v) = lookup("PRIVJOURNEY_RETRY_BUDGET") {
            self.retry_budget = parse_env("PRIVJOURNEY_RETRY_BUDGET", &v)?;
        }
        if let Some(v) = lookup("PRIVJOURNEY_TEMPERATURE") {
            self.temperature = parse_env("PRIVJOURNEY_TEMPERATURE", &v)?;
        }
        if let Some(v) = lookup("PRIVJOURNEY_MODEL_PERSONA") {
            self.models.persona = v;
        }
        if let Some(v) = lookup("PRIVJOURNEY_MODEL_STORY") {
            self.models.story = v;
        }
        if let Some(v) = lookup("PRIVJOURNEY_MODEL_CODING") {
            self.models.coding = v;
        }
        if let Some(v) = lookup("PRIVJOURNEY_BASE_URL") {
            self.live.base_url = v;
        }
        if let Some(v) = lookup("PRIVJOURNEY_PORT") {
            self.port = parse_env("PRIVJOURNEY_PORT", &v)?;
        }
        self.check()
    }

    fn check(&self) -> Result<(), ConfigError> {
        if self.retry_budget == 0 {
            return Err(ConfigError::Invalid("retry_budget must be at least 1".into()));
        }
        if !(0.0..=2.0).contains(&self.temperature) {
            return Err(ConfigError::Invalid(format!("temperature {} is outside 0..=2", self.temperature)));
        }
        Ok(())
    }

    pub fn cache_dir(&self) -> PathBuf {
        self.cache_dir.clone().unwrap_or_else(|| self.workspace.join("cache"))
    }

    pub fn settings(&self) -> GatewaySettings {
        GatewaySettings { models: self.models.clone(), retry_budget: self.retry_budget, temperature: self.temperature }
    }

    /// Gateway for the configured mode. Mock mode answers from the shipped
    /// demo fixtures (synthetic payloads otherwise) and records into the
    /// cache; replay reads the cache only; live needs the API key variable.
    pub fn build_gateway(&self) -> Result<Gateway, ConfigError> {
        self.build_gateway_with(|k| std::env::var(k).ok())
    }

    pub fn build_gateway_with(&self, lookup: impl Fn(&str) -> Option<String>) -> Result<Gateway, ConfigError> {
        let gateway = match self.provider {
            ProviderMode::Mock => Gateway::mock(demo_provider()).with_cache(TranscriptCache::open(self.cache_dir())?),
            ProviderMode::Replay => Gateway::replay(TranscriptCache::open_read_only(self.cache_dir())),
            ProviderMode::Live => {
                let key = lookup(&self.live.api_key_env).filter(|k| !k.trim().is_empty()).ok_or_else(|| {
                    ConfigError::Invalid(format!("live mode needs an API key in ${}", self.live.api_key_env))
                })?;
                let mut provider = LiveProvider::new(&self.live.base_url, key);
                if !self.live.send_temperature {
                    provider = provider.without_temperature();
                }
                Gateway::live(Arc::new(provider), TranscriptCache::open(self.cache_dir())?)
            }
        };
        Ok(gateway.with_settings(self.settings()))
    }
}
