use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures").join(rel)
}

struct Sandbox {
    dir: tempfile::TempDir,
}

impl Sandbox {
    fn new() -> Self {
        Self { dir: tempfile::tempdir().unwrap() }
    }

    fn path(&self, rel: &str) -> PathBuf {
        self.dir.path().join(rel)
    }

    fn run(&self, args: &[&str]) -> Output {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_privjourney"));
        for (k, _) in std::env::vars() {
            if k.starts_with("PRIVJOURNEY_") {
                cmd.env_remove(k);
            }
        }
        cmd.env_remove("OPENAI_API_KEY").current_dir(self.dir.path()).args(["--workspace", "ws"]).args(args);
        cmd.output().unwrap()
    }

    fn ok(&self, args: &[&str]) -> String {
        let out = self.run(args);
        assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        String::from_utf8(out.stdout).unwrap()
    }

    fn fails(&self, args: &[&str]) -> String {
        let out = self.run(args);
        assert!(!out.status.success(), "{args:?} succeeded");
        String::from_utf8(out.stderr).unwrap()
    }
}

fn eva_story(sb: &Sandbox) -> String {
    sb.ok(&["init"]);
    let out = sb.run(&["story", "generate", "--persona", "eva", "--feature", "wemusic-friend-activity", "--functions", "private-session"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stderr = String::from_utf8(out.stderr).unwrap();
    stderr.lines().find_map(|l| l.strip_prefix("story ")).unwrap().to_string()
}

#[test]
fn validate_shipped_and_broken_features() {
    let sb = Sandbox::new();
    let good = fixture("features/wemusic.feature.json");
    assert_eq!(sb.ok(&["validate", good.to_str().unwrap()]).trim(), "ok");
    let broken = std::fs::read_to_string(&good).unwrap().replacen("\"step\": 2", "\"step\": 4", 1);
    std::fs::write(sb.path("broken.json"), broken).unwrap();
    let err = sb.fails(&["validate", "broken.json"]);
    assert!(err.starts_with("error: NonContiguousSteps"), "{err}");
    std::fs::write(sb.path("junk.json"), "[").unwrap();
    assert!(sb.fails(&["validate", "junk.json"]).contains("MalformedDocument"));
}

#[test]
fn kappa_on_double_coded_table() {
    let sb = Sandbox::new();
    let table = fixture("double-coded.tsv");
    assert_eq!(sb.ok(&["kappa", table.to_str().unwrap()]).trim(), "0");
    assert_eq!(sb.ok(&["kappa", table.to_str().unwrap(), "--a", "a", "--b", "a"]).trim(), "1");
    assert!(sb.fails(&["kappa", table.to_str().unwrap(), "--a", "zzz"]).contains("TableError"));
}

#[test]
fn story_then_markdown_storyboard() {
    let sb = Sandbox::new();
    let id = eva_story(&sb);
    let md = sb.ok(&["storyboard", "render", &id, "--format", "markdown", "--out", "eva.md"]);
    let order: Vec<usize> = ["## Persona", "## Story", "## Harms", "## Flows"].iter().map(|h| md.find(h).unwrap()).collect();
    assert!(order.windows(2).all(|w| w[0] < w[1]));
    assert_eq!(md.matches("[design flaw | orange]").count(), 3, "{md}");
    assert_eq!(std::fs::read_to_string(sb.path("eva.md")).unwrap(), md);
    assert!(sb.path(&format!("ws/reports/{id}.md")).exists());
    let html = sb.ok(&["storyboard", "render", &id, "--format", "html"]);
    assert!(html.contains("annotation design_flaw orange"));
    assert!(sb.fails(&["storyboard", "render", "nope"]).contains("NotFound"));
}

#[test]
fn replay_miss_is_reported_by_name() {
    let sb = Sandbox::new();
    sb.ok(&["init"]);
    let err = sb.fails(&["story", "generate", "--persona", "rosa-delgado", "--feature", "wemusic-friend-activity", "--functions", "private-session"]);
    assert!(err.contains("CacheMissInReplayMode"), "{err}");
    let err = sb.fails(&["personas", "build", "--count", "3"]);
    assert!(err.contains("CacheMissInReplayMode"), "{err}");
}

#[test]
fn personas_list_and_filter() {
    let sb = Sandbox::new();
    sb.ok(&["init"]);
    let all: Vec<serde_json::Value> = serde_json::from_str(&sb.ok(&["personas", "list"])).unwrap();
    assert_eq!(all.len(), 20);
    let located: Vec<serde_json::Value> =
        serde_json::from_str(&sb.ok(&["personas", "filter", "--protected-info", "location"])).unwrap();
    assert!(!located.is_empty() && located.len() < 20);
    assert!(sb.fails(&["personas", "filter", "--dimension", "mood"]).contains("BadRequest"));
}

#[test]
fn mock_provider_builds_personas() {
    let sb = Sandbox::new();
    sb.ok(&["init"]);
    let lib: serde_json::Value = serde_json::from_str(&sb.ok(&["--provider", "mock", "personas", "build", "--count", "20"])).unwrap();
    assert_eq!(lib["personas"].as_array().unwrap().len(), 20);
    assert_eq!(lib["personas"][1]["persona_id"], "eva");
}

#[test]
fn config_file_selects_provider() {
    let sb = Sandbox::new();
    sb.ok(&["init"]);
    std::fs::write(sb.path("pj.toml"), "provider = \"mock\"\n").unwrap();
    sb.ok(&["--config", "pj.toml", "personas", "build", "--count", "2"]);
    std::fs::write(sb.path("bad.toml"), "provider = \"cloud\"\n").unwrap();
    assert!(sb.fails(&["--config", "bad.toml", "personas", "list"]).contains("ConfigError"));
    let err = sb.fails(&["--provider", "live", "personas", "build"]);
    assert!(err.contains("ConfigError") && err.contains("OPENAI_API_KEY"), "{err}");
    assert_eq!(sb.run(&["--provider", "cloud", "personas", "list"]).status.code(), Some(2));
}

#[test]
fn code_findings_and_tally() {
    let sb = Sandbox::new();
    sb.ok(&["init"]);
    std::fs::write(
        sb.path("findings.tsv"),
        "finding_id\tkind\ttext\tcondition\tparticipant\n\
         F1\tsuggestion\tPlace a red toggle for private sessions; lack of granular controls\ttool\tP1\n\
         F2\tproblem\tNo feedback on who can see my profile on the Settings page\tself-proposed\tP2\n",
    )
    .unwrap();
    let out = sb.run(&["code", "findings", "findings.tsv"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let coded = String::from_utf8(out.stdout).unwrap();
    assert_eq!(coded.lines().count(), 3);
    let batch = String::from_utf8(out.stderr).unwrap().lines().find_map(|l| l.strip_prefix("batch ").map(str::to_string)).unwrap();
    let tally: serde_json::Value = serde_json::from_str(&sb.ok(&["code", "tally", &batch])).unwrap();
    assert_eq!(tally["total"], 2);
    std::fs::write(sb.path("coded.tsv"), &coded).unwrap();
    let again: serde_json::Value = serde_json::from_str(&sb.ok(&["code", "tally", "coded.tsv"])).unwrap();
    assert_eq!(again, tally);
    let reference = fixture("findings.tsv");
    let t: serde_json::Value = serde_json::from_str(&sb.ok(&["code", "tally", reference.to_str().unwrap()])).unwrap();
    assert_eq!((t["conditions"]["tool"]["problems"]["count"].as_u64(), t["conditions"]["self-proposed"]["suggestions"]["count"].as_u64()), (Some(44), Some(30)));
}

#[test]
fn cache_export_import() {
    let sb = Sandbox::new();
    sb.ok(&["init"]);
    assert_eq!(sb.ok(&["cache", "export", "bundle"]).trim(), "24 transcripts");
    let other = Sandbox::new();
    let bundle = sb.path("bundle");
    assert_eq!(other.ok(&["cache", "import", bundle.to_str().unwrap()]).trim(), "24 transcripts");
}
