use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::codebook::{LevelId, PrincipleId};
use super::{CodedFinding, FindingKind};

/// Findings without a condition are counted under this label.
pub const UNSPECIFIED_CONDITION: &str = "unspecified";

fn zero_levels() -> BTreeMap<LevelId, usize> {
    LevelId::ALL.into_iter().map(|l| (l, 0)).collect()
}

fn zero_principles() -> BTreeMap<PrincipleId, usize> {
    PrincipleId::ALL.into_iter().map(|p| (p, 0)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KindTally {
    pub count: usize,
    pub by_level: BTreeMap<LevelId, usize>,
    pub by_principle: BTreeMap<PrincipleId, usize>,
    /// Count divided by distinct participants, when participants are known.
    pub mean_per_participant: Option<f64>,
}

impl Default for KindTally {
    fn default() -> Self {
        Self { count: 0, by_level: zero_levels(), by_principle: zero_principles(), mean_per_participant: None }
    }
}

impl KindTally {
    fn add(&mut self, c: &CodedFinding) {
        self.count += 1;
        *self.by_level.entry(c.level).or_default() += 1;
        *self.by_principle.entry(c.principle).or_default() += 1;
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ConditionTally {
    pub participants: usize,
    pub problems: KindTally,
    pub suggestions: KindTally,
}

impl ConditionTally {
    pub fn total(&self) -> usize {
        self.problems.count + self.suggestions.count
    }

    pub fn kind(&self, kind: FindingKind) -> &KindTally {
        match kind {
            FindingKind::Problem => &self.problems,
            FindingKind::Suggestion => &self.suggestions,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Tally {
    pub total: usize,
    pub conditions: BTreeMap<String, ConditionTally>,
}

impl Tally {
    pub fn condition(&self, name: &str) -> Option<&ConditionTally> {
        self.conditions.get(name)
    }
}

/// Per-condition counts by kind, level and principle.
pub fn tally(coded: &[CodedFinding]) -> Tally {
    let mut out = Tally { total: coded.len(), conditions: BTreeMap::new() };
    let mut people: BTreeMap<String, BTreeSet<&str>> = BTreeMap::new();
    for c in coded {
        let condition = c.finding.condition.as_deref().filter(|s| !s.trim().is_empty()).unwrap_or(UNSPECIFIED_CONDITION);
        let entry = out.conditions.entry(condition.to_string()).or_default();
        match c.finding.kind {
            FindingKind::Problem => entry.problems.add(c),
            FindingKind::Suggestion => entry.suggestions.add(c),
        }
        if let Some(p) = c.finding.participant.as_deref().filter(|s| !s.trim().is_empty()) {
            people.entry(condition.to_string()).or_default().insert(p);
        }
    }
    for (name, entry) in out.conditions.iter_mut() {
        let n = people.get(name).map(BTreeSet::len).unwrap_or(0);
        entry.participants = n;
        if n > 0 {
            entry.problems.mean_per_participant = Some(entry.problems.count as f64 / n as f64);
            entry.suggestions.mean_per_participant = Some(entry.suggestions.count as f64 / n as f64);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coding::ReviewFinding;

    fn coded(kind: FindingKind, condition: &str, participant: &str) -> CodedFinding {
        CodedFinding {
            finding: ReviewFinding {
                finding_id: "f".into(),
                kind,
                text: "t".into(),
                condition: Some(condition.into()),
                participant: Some(participant.into()),
                coder: None,
            },
            level: LevelId::L2,
            principle: PrincipleId::Respect,
            rationale: vec![],
        }
    }

    #[test]
    fn empty_input_is_zero() {
        let t = tally(&[]);
        assert_eq!(t.total, 0);
        assert!(t.conditions.is_empty());
        assert!(KindTally::default().by_level.values().all(|&v| v == 0));
    }

    #[test]
    fn counts_and_means() {
        let rows = vec![
            coded(FindingKind::Problem, "tool", "P1"),
            coded(FindingKind::Problem, "tool", "P2"),
            coded(FindingKind::Suggestion, "tool", "P2"),
            coded(FindingKind::Problem, "baseline", "P3"),
        ];
        let t = tally(&rows);
        let tool = t.condition("tool").unwrap();
        assert_eq!((tool.problems.count, tool.suggestions.count, tool.participants), (2, 1, 2));
        assert_eq!(tool.problems.mean_per_participant, Some(1.0));
        assert_eq!(tool.problems.by_level[&LevelId::L2], 2);
        assert_eq!(t.conditions.values().map(ConditionTally::total).sum::<usize>(), 4);
    }
}
