//! Shipped example inputs and the recorded demo session.
//!
//! The demo session builds a 20-persona library and one journey story for
//! the persona `eva` through the private-session function of the WeMusic
//! feature. It is recorded once with [`demo_provider`] and shipped as a
//! transcript bundle so replay mode reproduces it without a provider.

use std::fs;
use std::path::{Path, PathBuf};

use crate::flow::parse_feature_document;
use crate::gateway::{CacheError, CannedResponse, Gateway, GatewayError, MockProvider, TranscriptCache};
use crate::journey::{JourneyError, JourneyStory, StoryGenerator};
use crate::persona::{generate_personas, Catalogs, PersonaError, PersonaLibrary, Taxonomy};
use crate::FeatureSpec;

pub const WEMUSIC_FEATURE: &str = include_str!("../fixtures/features/wemusic.feature.json");
pub const NEIGHBORNET_FEATURE: &str = include_str!("../fixtures/features/neighbornet.feature.json");

/// Review findings with reference codes, one row per finding.
pub const FINDINGS_TSV: &str = include_str!("../fixtures/findings.tsv");
/// Two raters' labels for the kappa example.
pub const DOUBLE_CODED_TSV: &str = include_str!("../fixtures/double-coded.tsv");

const CANNED: [&str; 2] = [include_str!("../fixtures/canned/personas.json"), include_str!("../fixtures/canned/eva.json")];

pub const DEMO_PERSONA_COUNT: usize = 20;
pub const DEMO_PERSONA: &str = "eva";
pub const DEMO_FUNCTION: &str = "private-session";

/// Both shipped feature documents, parsed.
pub fn features() -> Vec<FeatureSpec> {
    [WEMUSIC_FEATURE, NEIGHBORNET_FEATURE]
        .into_iter()
        .map(|doc| parse_feature_document(doc).expect("shipped feature documents are valid"))
        .collect()
}

pub fn wemusic() -> FeatureSpec {
    parse_feature_document(WEMUSIC_FEATURE).expect("shipped feature documents are valid")
}

pub fn canned_responses() -> Vec<CannedResponse> {
    CANNED
        .iter()
        .flat_map(|text| serde_json::from_str::<Vec<CannedResponse>>(text).expect("shipped canned responses parse"))
        .collect()
}

/// Canned demo answers, with synthetic payloads for anything else.
pub fn demo_provider() -> MockProvider {
    MockProvider::canned(canned_responses()).with_synthetic_fallback()
}

/// The shipped transcript bundle.
pub fn bundled_replay_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join("replay")
}

#[derive(Debug, thiserror::Error)]
pub enum DemoError {
    #[error(transparent)]
    Persona(#[from] PersonaError),
    #[error(transparent)]
    Journey(#[from] JourneyError),
    #[error("demo persona `{0}` is missing from the library")]
    MissingPersona(String),
    #[error(transparent)]
    Gateway(#[from] GatewayError),
}

impl From<CacheError> for DemoError {
    fn from(e: CacheError) -> Self {
        DemoError::Gateway(e.into())
    }
}

#[derive(Debug, Clone)]
pub struct DemoSession {
    pub library: PersonaLibrary,
    pub story: JourneyStory,
}

/// Build the demo library and story through `gateway`.
pub fn run_demo_session(gateway: &Gateway) -> Result<DemoSession, DemoError> {
    let library = generate_personas(gateway, &Taxonomy::builtin(), &Catalogs::builtin(), DEMO_PERSONA_COUNT)?;
    let persona = library.persona(DEMO_PERSONA).ok_or_else(|| DemoError::MissingPersona(DEMO_PERSONA.into()))?;
    let story = StoryGenerator::new(gateway).generate_story(persona, &wemusic(), &[DEMO_FUNCTION.to_string()])?;
    Ok(DemoSession { library, story })
}

/// Record the demo session with [`demo_provider`] into a fresh bundle at `dir`.
/// Existing `*.json` entries in `dir` are removed first.
pub fn freeze_demo_bundle(dir: &Path) -> Result<DemoSession, DemoError> {
    if let Ok(read) = fs::read_dir(dir) {
        for entry in read.flatten() {
            let path = entry.path();
            if path.extension().and_then(|e| e.to_str()) == Some("json") {
                fs::remove_file(&path).map_err(|source| CacheError::Io { path: path.clone(), source })?;
            }
        }
    }
    let gateway = Gateway::mock(demo_provider()).with_cache(TranscriptCache::open(dir)?);
    run_demo_session(&gateway)
}

/// Replay the demo session from the shipped bundle.
pub fn replay_demo_session() -> Result<DemoSession, DemoError> {
    run_demo_session(&Gateway::replay(TranscriptCache::open_read_only(bundled_replay_dir())))
}
