//! File-backed store for features, the persona library, stories, rendered
//! reports and coded findings.
//!
//! ```text
//! <root>/features/<feature_id>.json
//! <root>/personas/index.json, personas/<persona_id>.json
//! <root>/stories/<story_id>.json
//! <root>/reports/<story_id>.<ext>
//! <root>/findings/<batch_id>.tsv
//! <root>/cache/<request_hash>.json
//! ```
//!
//! Every write is atomic and writes to one document are serialized. Loading
//! skips files that fail to parse or validate, with a warning.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use dashmap::DashMap;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::coding::{read_coded, write_coded, CodedFinding, CodingError};
use crate::docio::{write_atomic, write_document};
use crate::fixtures::{features as shipped_features, freeze_demo_bundle, DemoError};
use crate::flow::{parse_feature_document, to_canonical_document, FlowError};
use crate::gateway::TranscriptCache;
use crate::journey::{validate_story, JourneyStory};
use crate::persona::{Catalogs, PersonaError, PersonaLibrary};
use crate::report::ValidationReport;
use crate::storyboard::ReportFormat;
use crate::FeatureSpec;

#[derive(Debug, Error)]
pub enum WorkspaceError {
    #[error("NotFound: no {kind} `{id}`")]
    NotFound { kind: &'static str, id: String },
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error("InvalidStory: story failed validation\n{0}")]
    InvalidStory(ValidationReport),
    #[error(transparent)]
    Persona(#[from] PersonaError),
    #[error(transparent)]
    Coding(#[from] CodingError),
    #[error(transparent)]
    Demo(#[from] DemoError),
    #[error("IoError: {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl WorkspaceError {
    pub fn name(&self) -> &'static str {
        match self {
            WorkspaceError::NotFound { .. } => "NotFound",
            WorkspaceError::Flow(e) => e.name(),
            WorkspaceError::InvalidStory(_) => "InvalidStory",
            WorkspaceError::Persona(e) => e.name(),
            WorkspaceError::Coding(e) => e.name(),
            WorkspaceError::Demo(_) => "DemoError",
            WorkspaceError::Io { .. } => "IoError",
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> WorkspaceError + '_ {
    move |source| WorkspaceError::Io { path: path.to_path_buf(), source }
}

/// Reject ids that could escape their directory.
fn check_id(kind: &'static str, id: &str) -> Result<(), WorkspaceError> {
    let ok = !id.is_empty() && id.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_');
    if ok {
        Ok(())
    } else {
        Err(WorkspaceError::NotFound { kind, id: id.to_string() })
    }
}

fn json_files(dir: &Path) -> Vec<PathBuf> {
    let Ok(read) = fs::read_dir(dir) else { return Vec::new() };
    let mut paths: Vec<PathBuf> = read
        .flatten()
        .map(|e| e.path())
        .filter(|p| p.is_file() && p.extension().and_then(|e| e.to_str()) == Some("json"))
        .collect();
    paths.sort();
    paths
}

#[derive(Debug)]
pub struct Workspace {
    root: PathBuf,
    locks: DashMap<String, Arc<Mutex<()>>>,
}

impl Workspace {
    /// Open `root`, creating the directory layout if needed.
    pub fn open(root: impl Into<PathBuf>) -> Result<Self, WorkspaceError> {
        let root = root.into();
        for sub in ["features", "personas", "stories", "reports", "findings"] {
            let dir = root.join(sub);
            fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        }
        Ok(Self { root, locks: DashMap::new() })
    }

    /// Open `root` and store the shipped feature documents that are not
    /// there yet. With `cache_dir`, also add the demo session transcripts to it
    /// so replay mode works offline; existing transcripts are kept.
    pub fn init(root: impl Into<PathBuf>, cache_dir: Option<&Path>) -> Result<Self, WorkspaceError> {
        let ws = Self::open(root)?;
        for spec in shipped_features() {
            if !ws.feature_path(&spec.feature_id).exists() {
                ws.put_feature_spec(&spec)?;
            }
        }
        if let Some(dir) = cache_dir {
            // record into scratch space so existing transcripts survive
            let scratch = tempfile::tempdir().map_err(io_err(dir))?;
            let session = freeze_demo_bundle(scratch.path())?;
            TranscriptCache::open(dir).and_then(|cache| cache.import(scratch.path())).map_err(DemoError::from)?;
            if ws.library().personas.is_empty() {
                ws.save_library(&session.library)?;
            }
        }
        Ok(ws)
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn lock(&self, key: String) -> Arc<Mutex<()>> {
        self.locks.entry(key).or_default().clone()
    }

    fn feature_path(&self, id: &str) -> PathBuf {
        self.root.join("features").join(format!("{id}.json"))
    }

    fn story_path(&self, id: &str) -> PathBuf {
        self.root.join("stories").join(format!("{id}.json"))
    }

    /// Parse, validate and store a feature document in canonical form.
    pub fn put_feature(&self, raw: &str) -> Result<FeatureSpec, WorkspaceError> {
        let spec = parse_feature_document(raw)?;
        self.put_feature_spec(&spec)?;
        Ok(spec)
    }

    fn put_feature_spec(&self, spec: &FeatureSpec) -> Result<(), WorkspaceError> {
        check_id("feature", &spec.feature_id)?;
        let lock = self.lock(format!("feature/{}", spec.feature_id));
        let _guard = lock.lock().unwrap_or_else(|p| p.into_inner());
        let path = self.feature_path(&spec.feature_id);
        write_atomic(&path, to_canonical_document(spec).as_bytes()).map_err(io_err(&path))
    }

    pub fn features(&self) -> Vec<FeatureSpec> {
        json_files(&self.root.join("features"))
            .into_iter()
            .filter_map(|path| {
                let text = fs::read_to_string(&path).ok()?;
                match parse_feature_document(&text) {
                    Ok(spec) if path.file_stem().and_then(|s| s.to_str()) == Some(spec.feature_id.as_str()) => Some(spec),
                    Ok(_) => {
                        tracing::warn!(path = %path.display(), "feature file name does not match its feature_id; skipped");
                        None
                    }
                    Err(e) => {
                        tracing::warn!(path = %path.display(), error = %e, "invalid feature document skipped");
                        None
                    }
                }
            })
            .collect()
    }

    pub fn feature(&self, id: &str) -> Result<FeatureSpec, WorkspaceError> {
        check_id("feature", id)?;
        let path = self.feature_path(id);
        let text =
            fs::read_to_string(&path).map_err(|_| WorkspaceError::NotFound { kind: "feature", id: id.to_string() })?;
        Ok(parse_feature_document(&text)?)
    }

    pub fn save_library(&self, library: &PersonaLibrary) -> Result<(), WorkspaceError> {
        let lock = self.lock("personas".into());
        let _guard = lock.lock().unwrap_or_else(|p| p.into_inner());
        Ok(library.save(&self.root.join("personas"))?)
    }

    /// The stored library, keeping only personas that validate. An absent
    /// library is empty.
    pub fn library(&self) -> PersonaLibrary {
        let dir = self.root.join("personas");
        if !dir.join("index.json").exists() {
            return PersonaLibrary::default();
        }
        let mut library = match PersonaLibrary::load(&dir) {
            Ok(l) => l,
            Err(e) => {
                tracing::warn!(error = %e, "persona library could not be loaded");
                return PersonaLibrary::default();
            }
        };
        let catalogs = Catalogs::builtin();
        let types = library.types.clone();
        library.personas.retain(|p| {
            let report = crate::persona::validate_persona(p, &catalogs, &types);
            if !report.is_empty() {
                tracing::warn!(persona = %p.persona_id, %report, "invalid persona skipped");
            }
            report.is_empty()
        });
        library
    }

    /// Validate `story` against its stored feature and store it.
    pub fn put_story(&self, story: &JourneyStory) -> Result<(), WorkspaceError> {
        check_id("story", &story.story_id)?;
        let spec = self.feature(&story.feature_id)?;
        let report = validate_story(story, &spec);
        if !report.is_empty() {
            return Err(WorkspaceError::InvalidStory(report));
        }
        let lock = self.lock(format!("story/{}", story.story_id));
        let _guard = lock.lock().unwrap_or_else(|p| p.into_inner());
        let path = self.story_path(&story.story_id);
        write_document(&path, story).map_err(io_err(&path))
    }

    fn load_story(&self, path: &Path) -> Option<JourneyStory> {
        let text = fs::read_to_string(path).ok()?;
        let story: JourneyStory = match serde_json::from_str(&text) {
            Ok(s) => s,
            Err(e) => {
                tracing::warn!(path = %path.display(), error = %e, "unreadable story skipped");
                return None;
            }
        };
        let valid = self.feature(&story.feature_id).map(|spec| validate_story(&story, &spec));
        match valid {
            Ok(report) if report.is_empty() => Some(story),
            Ok(report) => {
                tracing::warn!(path = %path.display(), %report, "invalid story skipped");
                None
            }
            Err(e) => {
                tracing::warn!(path = %path.display(), error = %e, "story feature missing; skipped");
                None
            }
        }
    }

    pub fn stories(&self) -> Vec<JourneyStory> {
        json_files(&self.root.join("stories")).iter().filter_map(|p| self.load_story(p)).collect()
    }

    pub fn story(&self, id: &str) -> Result<JourneyStory, WorkspaceError> {
        check_id("story", id)?;
        let path = self.story_path(id);
        if !path.exists() {
            return Err(WorkspaceError::NotFound { kind: "story", id: id.to_string() });
        }
        self.load_story(&path).ok_or_else(|| WorkspaceError::NotFound { kind: "story", id: id.to_string() })
    }

    /// Store a rendered report and return its path.
    pub fn put_report(&self, story_id: &str, format: ReportFormat, text: &str) -> Result<PathBuf, WorkspaceError> {
        check_id("story", story_id)?;
        let path = self.root.join("reports").join(format!("{story_id}.{}", format.extension()));
        let lock = self.lock(format!("report/{}", path.display()));
        let _guard = lock.lock().unwrap_or_else(|p| p.into_inner());
        write_atomic(&path, text.as_bytes()).map_err(io_err(&path))?;
        Ok(path)
    }

    /// Store a coded batch under the first 16 hex digits of its content hash.
    pub fn put_coded(&self, coded: &[CodedFinding]) -> Result<String, WorkspaceError> {
        let mut table = Vec::new();
        write_coded(&mut table, coded)?;
        let batch_id = hex::encode(&Sha256::digest(&table)[..8]);
        let path = self.root.join("findings").join(format!("{batch_id}.tsv"));
        let lock = self.lock(format!("findings/{batch_id}"));
        let _guard = lock.lock().unwrap_or_else(|p| p.into_inner());
        write_atomic(&path, &table).map_err(io_err(&path))?;
        Ok(batch_id)
    }

    pub fn coded(&self, batch_id: &str) -> Result<Vec<CodedFinding>, WorkspaceError> {
        check_id("findings", batch_id)?;
        let path = self.root.join("findings").join(format!("{batch_id}.tsv"));
        let file =
            fs::File::open(&path).map_err(|_| WorkspaceError::NotFound { kind: "findings", id: batch_id.to_string() })?;
        Ok(read_coded(file)?)
    }

    /// Stored batch ids and their sizes.
    pub fn batches(&self) -> BTreeMap<String, usize> {
        let Ok(read) = fs::read_dir(self.root.join("findings")) else { return BTreeMap::new() };
        read.flatten()
            .filter_map(|e| {
                let path = e.path();
                let id = path.file_stem()?.to_str()?.to_string();
                (path.extension()?.to_str()? == "tsv").then_some(())?;
                let n = self.coded(&id).ok()?.len();
                Some((id, n))
            })
            .collect()
    }
}
