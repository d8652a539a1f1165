//! Acceptance run: one PASS/FAIL line per criterion, with its time budget.

mod common;

use std::cell::Cell;
use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use privjourney::coding::{cohen_kappa, read_coded, read_label_pairs, tally, Codebook, LevelId, PrincipleId, RuleCoder};
use privjourney::config::Config;
use privjourney::fixtures::{
    features, replay_demo_session, wemusic, DOUBLE_CODED_TSV, FINDINGS_TSV, NEIGHBORNET_FEATURE, WEMUSIC_FEATURE,
};
use privjourney::flow::{parse_feature_document, to_canonical_document, validate_feature};
use privjourney::gateway::{Gateway, ProviderMode, TranscriptCache};
use privjourney::journey::{validate_story, StoryGenerator};
use privjourney::persona::{validate_persona, Catalogs};
use privjourney::storyboard::{build_storyboard, AnnotationKind, ColorRole};
use privjourney::ViolationKind;

use common::{brute_kappa, chaotic_provider, dangling_fields, random_story};

type Outcome = Result<String, String>;
type Check = (&'static str, Duration, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

thread_local! {
    static NETWORK: Cell<usize> = const { Cell::new(0) };
}

fn note_network(gw: &Gateway) {
    NETWORK.with(|n| n.set(n.get() + gw.network_calls()));
}

fn fixture_parse() -> Outcome {
    for doc in [WEMUSIC_FEATURE, NEIGHBORNET_FEATURE] {
        let spec = parse_feature_document(doc).map_err(|e| e.to_string())?;
        ensure!(spec.functions.len() == 4, "{} has {} functions", spec.feature_id, spec.functions.len());
        ensure!(validate_feature(&spec).is_empty(), "{} does not validate", spec.feature_id);
        let canonical = to_canonical_document(&spec);
        let again = to_canonical_document(&parse_feature_document(&canonical).map_err(|e| e.to_string())?);
        ensure!(canonical == again, "{} is not byte-stable", spec.feature_id);
    }
    Ok("2 documents, 4 functions each, byte-stable".into())
}

fn reference_integrity() -> Outcome {
    let specs = features();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut rejected = 0;
    for i in 0..200 {
        let spec = specs.choose(&mut rng).unwrap();
        let story = random_story(&mut rng, spec, 0.3);
        let report = validate_story(&story, spec);
        let got: BTreeSet<String> =
            report.violations.iter().filter(|v| v.kind == ViolationKind::DanglingStepRef).map(|v| v.field.clone()).collect();
        ensure!(got == dangling_fields(&story, spec), "story {i}: validator and oracle disagree");
        if !report.is_empty() {
            rejected += 1;
        }
    }
    let gw = Gateway::mock(chaotic_provider(2024, 0.4));
    let generator = StoryGenerator::new(&gw);
    let lib = replay_demo_session().map_err(|e| e.to_string())?.library;
    let mut accepted = 0;
    for _ in 0..200 {
        let spec = specs.choose(&mut rng).unwrap();
        let persona = lib.personas.choose(&mut rng).unwrap();
        let n = rng.random_range(1..=spec.functions.len());
        let ids: Vec<String> = spec.functions[..n].iter().map(|f| f.function_id.clone()).collect();
        if let Ok(story) = generator.generate_story(persona, spec, &ids) {
            accepted += 1;
            ensure!(dangling_fields(&story, spec).is_empty(), "accepted story {} dangles", story.story_id);
        }
    }
    note_network(&gw);
    ensure!(accepted > 0, "no generated story was accepted");
    Ok(format!("200 random stories agree with the oracle ({rejected} rejected); {accepted}/200 generated stories accepted, none dangling"))
}

fn eva_replay() -> Outcome {
    let gw = Gateway::replay(TranscriptCache::open_read_only(privjourney::fixtures::bundled_replay_dir()));
    let demo = privjourney::fixtures::run_demo_session(&gw).map_err(|e| e.to_string())?;
    note_network(&gw);
    ensure!(gw.provider_calls() == 0, "replay called the provider");
    let spec = wemusic();
    let story = &demo.story;
    ensure!(validate_story(story, &spec).is_empty(), "story does not validate");
    let leak = &story.leak_steps;
    ensure!(leak.len() == 1 && leak[0].step == 3, "leak steps {leak:?}");
    let title = spec.flow(&leak[0].function_id, &leak[0].flow_id).map(|f| f.title.as_str());
    ensure!(title == Some("Enjoying private listening via Private Session"), "leak flow {title:?}");
    let board = build_storyboard(story, &spec).map_err(|e| e.to_string())?;
    let flaws: Vec<_> = board.annotations().filter(|a| a.kind == AnnotationKind::DesignFlaw).collect();
    ensure!(flaws.len() == 3, "{} design-flaw annotations", flaws.len());
    ensure!(flaws.iter().all(|a| a.color_role() == ColorRole::Orange), "design flaws are not orange");
    for (flaw, needle) in flaws.iter().zip(["session timer", "resumption", "per-follower"]) {
        ensure!(flaw.text.to_lowercase().contains(needle), "flaw `{}` lacks `{needle}`", flaw.text);
    }
    Ok("leak at ps-enjoy#3; 3 orange flaws: hidden timer, default resumption, no per-follower controls".into())
}

fn codebook() -> Outcome {
    let book = Codebook::builtin();
    let coder = RuleCoder::new(book.clone());
    let specificity = [
        ("Place a red color highlighted toggle on the Share screen", LevelId::L5),
        ("The concept of ‘friend activity’ itself encourages surveillance.", LevelId::L1),
        ("Add a setting to blur or generalize the user's location.", LevelId::L2),
        ("The order of the flow is illogical; users log in to Facebook before setting preferences.", LevelId::L3),
        ("Group all privacy-related options under a single ‘Privacy Settings’ section.", LevelId::L4),
        ("The name ‘Private Session’ is unclear.", LevelId::L5),
    ];
    for (text, want) in specificity {
        ensure!(book.level(want).cues.iter().any(|c| c.text == text), "`{text}` is not a {want:?} exemplar");
        let got = coder.code_specificity(text).map_err(|e| e.to_string())?.0;
        ensure!(got == want, "`{text}` coded {got:?}, expected {want:?}");
    }
    let themes = [
        ("Implement age verification", PrincipleId::Proactive),
        ("Default sharing is a risk", PrincipleId::Default),
        ("Group privacy settings together", PrincipleId::Embedded),
        ("The warning pop-up is annoying", PrincipleId::FullFunctionality),
        ("Historical videos create a permanent record", PrincipleId::EndToEnd),
        ("No feedback on who can see my profile", PrincipleId::Transparency),
        ("Lack of granular controls", PrincipleId::Respect),
    ];
    let covered: BTreeSet<PrincipleId> = themes.iter().map(|t| t.1).collect();
    ensure!(covered.len() == 7, "theme exemplars cover {} principles", covered.len());
    for (text, want) in themes {
        ensure!(book.principle(want).cues.iter().any(|c| c.text == text), "`{text}` is not a {want:?} exemplar");
        let got = coder.code_theme(text).map_err(|e| e.to_string())?.0;
        ensure!(got == want, "`{text}` coded {got:?}, expected {want:?}");
    }
    Ok("6 specificity exemplars (red toggle -> L5), 7 theme exemplars, one per principle".into())
}

fn kappa() -> Outcome {
    let same = ["X", "Y", "Y", "Z"];
    ensure!(cohen_kappa(&same, &same).map_err(|e| e.to_string())? == 1.0, "identical sequences");
    let (a, b) = read_label_pairs(DOUBLE_CODED_TSV.as_bytes(), None, None).map_err(|e| e.to_string())?;
    ensure!(a == ["X", "X", "Y", "Y"] && b == ["X", "Y", "X", "Y"], "double-coded fixture is {a:?} / {b:?}");
    let k = cohen_kappa(&a, &b).map_err(|e| e.to_string())?;
    ensure!(k.abs() < 1e-12, "kappa {k} on [X,X,Y,Y] vs [X,Y,X,Y]");
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let pool = ["A", "B", "C", "D", "E"];
    let mut worst: f64 = 0.0;
    let mut tables = 0;
    while tables < 100 {
        let n = rng.random_range(2..60);
        let k = rng.random_range(2..=pool.len());
        let x: Vec<&str> = (0..n).map(|_| pool[rng.random_range(0..k)]).collect();
        let y: Vec<&str> = (0..n).map(|_| pool[rng.random_range(0..k)]).collect();
        let want = brute_kappa(&x, &y);
        if !want.is_finite() {
            continue;
        }
        let got = cohen_kappa(&x, &y).map_err(|e| e.to_string())?;
        worst = worst.max((got - want).abs());
        tables += 1;
    }
    ensure!(worst <= 1e-9, "max deviation {worst:e} on random tables");
    Ok(format!("identity 1, fixture 0, 100 random tables within {worst:.1e}"))
}

fn tally_counts() -> Outcome {
    let coded = read_coded(FINDINGS_TSV.as_bytes()).map_err(|e| e.to_string())?;
    let t = tally(&coded);
    let get = |c: &str| t.condition(c).ok_or_else(|| format!("no condition `{c}`"));
    let (sp, tool) = (get("self-proposed")?, get("tool")?);
    let problems = (sp.problems.count, tool.problems.count);
    let suggestions = (sp.suggestions.count, tool.suggestions.count);
    ensure!(problems == (29, 44), "problems {problems:?}");
    ensure!(suggestions == (30, 50), "suggestions {suggestions:?}");
    Ok("problems 29/44, suggestions 30/50 (self-proposed/tool)".into())
}

fn persona_library() -> Outcome {
    let lib = replay_demo_session().map_err(|e| e.to_string())?.library;
    let catalogs = Catalogs::builtin();
    ensure!(lib.personas.len() == 20, "{} personas", lib.personas.len());
    for p in &lib.personas {
        let report = validate_persona(p, &catalogs, &lib.types);
        ensure!(report.is_empty(), "{} invalid: {report}", p.persona_id);
    }
    let span = lib.dimension_span();
    ensure!(span.len() >= 3, "span {}", span.len());
    Ok(format!("20 valid personas spanning {} dimensions", span.len()))
}

fn offline() -> Outcome {
    let config = Config::default();
    ensure!(config.provider == ProviderMode::Replay, "default provider is {:?}", config.provider);
    let calls = NETWORK.with(Cell::get);
    ensure!(calls == 0, "{calls} network calls");
    Ok("default mode is replay; 0 network calls across the run".into())
}

fn main() -> ExitCode {
    let criteria: [Check; 8] = [
        ("fixture-parse", Duration::from_secs(1), fixture_parse),
        ("reference-integrity", Duration::from_secs(10), reference_integrity),
        ("eva-replay", Duration::from_secs(5), eva_replay),
        ("codebook", Duration::from_secs(5), codebook),
        ("kappa", Duration::from_secs(5), kappa),
        ("tally", Duration::from_secs(5), tally_counts),
        ("persona-library", Duration::from_secs(5), persona_library),
        ("offline", Duration::from_secs(1), offline),
    ];
    let mut failed = 0;
    for (i, (name, budget, check)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let mut outcome = check();
        let took = start.elapsed();
        if outcome.is_ok() && took > budget {
            outcome = Err(format!("took {took:?}, budget {budget:?}"));
        }
        match outcome {
            Ok(detail) => println!("PASS {} {name}: {detail} [{} ms]", i + 1, took.as_millis()),
            Err(why) => {
                failed += 1;
                println!("FAIL {} {name}: {why} [{} ms]", i + 1, took.as_millis());
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
