//! Oracles and generators shared by the integration tests. The oracles are
//! written from the definitions, independently of the library code.

#![allow(dead_code, clippy::explicit_counter_loop, clippy::needless_range_loop)]

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::sync::Mutex;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use privjourney::gateway::{extract_json_block, MockProvider, SchemaId};
use privjourney::journey::{DesignProblem, Harm, IdentitySentence, IdentitySlots, JourneyStory, LeakedInfo};
use privjourney::{FeatureSpec, StepRef};

pub const HARMS: [&str; 4] = ["reputational", "psychological", "autonomy", "relationship"];

/// Every (function, flow, step) triple a story may point at, by brute force.
pub fn addressable(story: &JourneyStory, spec: &FeatureSpec) -> HashSet<(String, String, u32)> {
    let mut out = HashSet::new();
    for function in &spec.functions {
        if !story.function_sequence.contains(&function.function_id) {
            continue;
        }
        for flow in &function.flows {
            if story.chosen_flows.get(&function.function_id) != Some(&flow.flow_id) {
                continue;
            }
            let mut n = 1;
            for _ in &flow.steps {
                out.insert((function.function_id.clone(), flow.flow_id.clone(), n));
                n += 1;
            }
        }
    }
    out
}

/// Fields of `story` holding a StepRef outside [`addressable`].
pub fn dangling_fields(story: &JourneyStory, spec: &FeatureSpec) -> BTreeSet<String> {
    let ok = addressable(story, spec);
    let key = |r: &StepRef| (r.function_id.clone(), r.flow_id.clone(), r.step);
    let mut out = BTreeSet::new();
    for (i, r) in story.leak_steps.iter().enumerate() {
        if !ok.contains(&key(r)) {
            out.insert(format!("leak_steps[{i}]"));
        }
    }
    for (i, d) in story.design_problems.iter().enumerate() {
        if !ok.contains(&key(&d.step)) {
            out.insert(format!("design_problems[{i}].step"));
        }
    }
    out
}

pub fn identity(name: &str) -> IdentitySentence {
    IdentitySentence {
        text: format!("{name} is a 30-year-old woman and nurse who is facing stalking. She has medium tech comfort because she uses a phone daily."),
        slots: IdentitySlots {
            gender: "woman".into(),
            role: "nurse".into(),
            vulnerability: "facing stalking".into(),
            tech_comfort: "uses a phone daily".into(),
        },
    }
}

/// A step reference that is valid with probability `1 - p_bad` and otherwise
/// broken in one of several ways.
pub fn random_ref<R: Rng>(rng: &mut R, spec: &FeatureSpec, sequence: &[String], chosen: &BTreeMap<String, String>, p_bad: f64) -> StepRef {
    let function_id = sequence.choose(rng).cloned().unwrap_or_else(|| "ghost".into());
    let flow_id = chosen.get(&function_id).cloned().unwrap_or_else(|| "nope".into());
    let len = spec.flow(&function_id, &flow_id).map(|f| f.steps.len() as u32).unwrap_or(3);
    let good = StepRef::new(&function_id, &flow_id, rng.random_range(1..=len.max(1)));
    if !rng.random_bool(p_bad) {
        return good;
    }
    match rng.random_range(0..5) {
        0 => StepRef { step: 0, ..good },
        1 => StepRef { step: len + 1 + rng.random_range(0..3), ..good },
        2 => StepRef { function_id: "ghost".into(), ..good },
        3 => {
            // another flow of the same function, when there is one
            let other = spec
                .function(&function_id)
                .and_then(|f| f.flows.iter().find(|fl| fl.flow_id != flow_id))
                .map(|fl| fl.flow_id.clone())
                .unwrap_or_else(|| "nope".into());
            StepRef { flow_id: other, ..good }
        }
        _ => {
            // a function of the feature left out of the sequence
            let outside = spec.functions.iter().find(|f| !sequence.contains(&f.function_id));
            match outside {
                Some(f) => StepRef::new(&f.function_id, &f.flows[0].flow_id, 1),
                None => StepRef { step: 0, ..good },
            }
        }
    }
}

/// A random story over `spec`, including broken sequences and flow choices.
pub fn random_story<R: Rng>(rng: &mut R, spec: &FeatureSpec, p_bad: f64) -> JourneyStory {
    let mut ids: Vec<String> = spec.functions.iter().map(|f| f.function_id.clone()).collect();
    rand::seq::SliceRandom::shuffle(ids.as_mut_slice(), rng);
    let n = rng.random_range(1..=ids.len());
    let mut sequence: Vec<String> = ids[..n].to_vec();
    if rng.random_bool(p_bad / 4.0) {
        sequence.push("ghost".into());
    }
    let mut chosen = BTreeMap::new();
    for function_id in &sequence {
        if let Some(f) = spec.function(function_id) {
            chosen.insert(function_id.clone(), f.flows.choose(rng).unwrap().flow_id.clone());
        }
    }
    if rng.random_bool(p_bad / 4.0) {
        let victim = sequence[0].clone();
        if rng.random_bool(0.5) {
            chosen.remove(&victim);
        } else {
            chosen.insert(victim, "nope".into());
        }
    }
    let leaks = (0..rng.random_range(1..=2)).map(|_| random_ref(rng, spec, &sequence, &chosen, p_bad)).collect();
    let problems = (0..rng.random_range(0..=4))
        .map(|i| DesignProblem { step: random_ref(rng, spec, &sequence, &chosen, p_bad), problem: format!("Problem {i}.") })
        .collect();
    JourneyStory {
        story_id: format!("story-{:016x}", rng.random::<u64>()),
        persona_id: "p".into(),
        feature_id: spec.feature_id.clone(),
        identity: identity("Ana"),
        function_sequence: sequence,
        chosen_flows: chosen,
        flow_selections: vec![],
        narrative: "Ana uses the feature and her location leaks.".into(),
        motivations: "Stay in touch.".into(),
        sensitive_info_leaked: vec![LeakedInfo { category: "location".into(), description: "home".into() }],
        leak_steps: leaks,
        design_problems: problems,
        harms: vec![Harm { category: HARMS.choose(rng).unwrap().to_string(), consequence: "Fear.".into() }],
        transcripts: vec![],
    }
}

/// A provider answering every story-stage request with random, sometimes
/// broken, payloads.
pub fn chaotic_provider(seed: u64, p_bad: f64) -> MockProvider {
    let rng = Mutex::new(ChaCha8Rng::seed_from_u64(seed));
    MockProvider::from_fn(move |request| {
        let mut rng = rng.lock().unwrap();
        let context = extract_json_block(request.task_text()).unwrap_or(Value::Null);
        let payload = match request.output_schema {
            SchemaId::IdentitySentence => serde_json::to_value(identity("Ana")).unwrap(),
            SchemaId::FlowChoice => {
                let flows = context["function"]["flows"].as_array().cloned().unwrap_or_default();
                let id = if rng.random_bool(p_bad) { json!("nope") } else { flows.choose(&mut *rng).unwrap()["flow_id"].clone() };
                json!({ "flow_id": id, "rationale": "Random." })
            }
            SchemaId::JourneyStory => {
                let flows = context["flows"].as_array().cloned().unwrap_or_default();
                let protected = context["persona"]["protected_info"][0].clone();
                let pick = |rng: &mut ChaCha8Rng| {
                    let bad = rng.random_bool(p_bad);
                    let f = flows.choose(rng).unwrap();
                    let len = f["flow"]["steps"].as_array().unwrap().len() as u64;
                    let step = if bad { len + 1 } else { rng.random_range(1..=len) };
                    json!({ "function_id": f["function_id"], "flow_id": f["flow"]["flow_id"], "step": step })
                };
                let leak = pick(&mut rng);
                let problem = pick(&mut rng);
                json!({
                    "narrative": "Something leaks.",
                    "motivations": "Stay connected.",
                    "sensitive_info_leaked": [{ "category": protected, "description": "d" }],
                    "leak_steps": [leak],
                    "design_problems": [{ "step": problem, "problem": "A flaw." }],
                    "harms": [{ "category": HARMS.choose(&mut *rng).unwrap(), "consequence": "c" }],
                })
            }
            other => panic!("unexpected schema {other}"),
        };
        Ok(payload.to_string())
    })
}

/// Cohen's kappa straight from the confusion matrix.
pub fn brute_kappa(a: &[&str], b: &[&str]) -> f64 {
    let labels: Vec<&str> = a.iter().chain(b).copied().collect::<BTreeSet<_>>().into_iter().collect();
    let k = labels.len();
    let idx = |l: &str| labels.iter().position(|x| *x == l).unwrap();
    let mut m = vec![vec![0f64; k]; k];
    for (x, y) in a.iter().zip(b) {
        m[idx(x)][idx(y)] += 1.0;
    }
    let n = a.len() as f64;
    let diag: f64 = (0..k).map(|i| m[i][i]).sum();
    let po = diag / n;
    let mut pe = 0.0;
    for i in 0..k {
        let row: f64 = m[i].iter().sum();
        let col: f64 = (0..k).map(|j| m[j][i]).sum();
        pe += row * col;
    }
    pe /= n * n;
    (po - pe) / (1.0 - pe)
}
