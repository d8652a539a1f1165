use std::collections::BTreeMap;

use privjourney::coding::{read_coded, tally, FindingKind, LevelId, PrincipleId};
use privjourney::fixtures::FINDINGS_TSV;

#[test]
fn findings_fixture_reproduces_condition_totals() {
    let coded = read_coded(FINDINGS_TSV.as_bytes()).unwrap();
    let t = tally(&coded);
    let self_proposed = t.condition("self-proposed").unwrap();
    let tool = t.condition("tool").unwrap();
    assert_eq!((self_proposed.problems.count, tool.problems.count), (29, 44));
    assert_eq!((self_proposed.suggestions.count, tool.suggestions.count), (30, 50));
    assert_eq!((self_proposed.participants, tool.participants), (15, 16));
    let mean = |m: Option<f64>| (m.unwrap() * 100.0).round() / 100.0;
    assert_eq!(mean(self_proposed.problems.mean_per_participant), 1.93);
    assert_eq!(mean(tool.problems.mean_per_participant), 2.75);
    assert_eq!(mean(self_proposed.suggestions.mean_per_participant), 2.0);
    assert_eq!(mean(tool.suggestions.mean_per_participant), 3.13);
    assert_eq!(t.total, 153);
}

#[test]
fn cells_sum_to_input_size() {
    let coded = read_coded(FINDINGS_TSV.as_bytes()).unwrap();
    let t = tally(&coded);
    // independent recount keyed by (condition, kind, level, principle)
    let mut oracle: BTreeMap<(String, FindingKind, LevelId), usize> = BTreeMap::new();
    let mut themes: BTreeMap<(String, FindingKind, PrincipleId), usize> = BTreeMap::new();
    for c in &coded {
        let cond = c.finding.condition.clone().unwrap();
        *oracle.entry((cond.clone(), c.finding.kind, c.level)).or_default() += 1;
        *themes.entry((cond, c.finding.kind, c.principle)).or_default() += 1;
    }
    let mut sum = 0;
    for (name, cond) in &t.conditions {
        for kind in [FindingKind::Problem, FindingKind::Suggestion] {
            let k = cond.kind(kind);
            assert_eq!(k.by_level.values().sum::<usize>(), k.count);
            assert_eq!(k.by_principle.values().sum::<usize>(), k.count);
            for (level, n) in &k.by_level {
                assert_eq!(*n, oracle.get(&(name.clone(), kind, *level)).copied().unwrap_or(0));
            }
            for (p, n) in &k.by_principle {
                assert_eq!(*n, themes.get(&(name.clone(), kind, *p)).copied().unwrap_or(0));
            }
            sum += k.count;
        }
    }
    assert_eq!(sum, coded.len());
}

#[test]
fn default_and_full_functionality_only_with_the_tool() {
    let coded = read_coded(FINDINGS_TSV.as_bytes()).unwrap();
    let t = tally(&coded);
    let problems = |c: &str, p| t.condition(c).unwrap().problems.by_principle[&p];
    assert_eq!(problems("self-proposed", PrincipleId::Default), 0);
    assert_eq!(problems("self-proposed", PrincipleId::FullFunctionality), 0);
    assert_eq!(problems("tool", PrincipleId::Default), 7);
    assert_eq!(problems("tool", PrincipleId::FullFunctionality), 2);
    assert_eq!(problems("self-proposed", PrincipleId::Proactive), 11);
    assert_eq!(t.condition("self-proposed").unwrap().suggestions.by_level[&LevelId::L1], 0);
}
