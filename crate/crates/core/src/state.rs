//! Symbolic assembly state: the installed/uninstalled partition, the
//! rule-based reconciliation operator, and human-event detection.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ontology::{AssemblyRule, ComponentArray, RuleKind};

#[derive(Debug, Error)]
pub enum StateError {
    #[error("unknown component id in raw state: {0}")]
    UnknownId(String),
    #[error("states cover different component universes")]
    MismatchedUniverse,
    #[error("reconciliation did not converge within {0} sweeps")]
    NonConvergence(usize),
}

/// Partition of the component set into installed and uninstalled.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymbolicState {
    pub installed: BTreeSet<String>,
    pub uninstalled: BTreeSet<String>,
}

impl SymbolicState {
    /// State over `ids` with exactly `uninstalled` not yet installed.
    pub fn from_uninstalled(ids: &BTreeSet<String>, uninstalled: BTreeSet<String>) -> Self {
        let installed = ids.difference(&uninstalled).cloned().collect();
        Self {
            installed,
            uninstalled,
        }
    }

    pub fn all_uninstalled(ids: &BTreeSet<String>) -> Self {
        Self {
            installed: BTreeSet::new(),
            uninstalled: ids.clone(),
        }
    }

    pub fn universe(&self) -> BTreeSet<String> {
        self.installed.union(&self.uninstalled).cloned().collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EventKind {
    None,
    Detected,
}

/// A state change not explained by robot execution, attributed to a human.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InterventionEvent {
    pub kind: EventKind,
    pub human_installed: BTreeSet<String>,
    pub human_removed: BTreeSet<String>,
}

impl InterventionEvent {
    pub fn none() -> Self {
        Self {
            kind: EventKind::None,
            human_installed: BTreeSet::new(),
            human_removed: BTreeSet::new(),
        }
    }

    fn from_sets(human_installed: BTreeSet<String>, human_removed: BTreeSet<String>) -> Self {
        let kind = if human_installed.is_empty() && human_removed.is_empty() {
            EventKind::None
        } else {
            EventKind::Detected
        };
        Self {
            kind,
            human_installed,
            human_removed,
        }
    }

    pub fn is_none(&self) -> bool {
        self.kind == EventKind::None
    }
}

/// Evaluate the shared rule predicate: subject installed implies required
/// installed.
pub fn rule_satisfied(rule: &AssemblyRule, installed: &BTreeSet<String>) -> bool {
    !installed.contains(&rule.subject) || rule.required.iter().all(|r| installed.contains(r))
}

/// Count of rules an installed-set violates.
pub fn count_violations(rules: &[AssemblyRule], installed: &BTreeSet<String>) -> usize {
    rules
        .iter()
        .filter(|r| !rule_satisfied(r, installed))
        .count()
}

/// The deterministic reconciliation operator.
///
/// Each sweep first completes the state (support dependencies insert missing
/// supports when no consistency constraint would immediately flip them back;
/// installed layers pull in their layer-group siblings), then prunes
/// installed components that violate any rule. Sweeps repeat until a
/// fixpoint, capped at the component count.
pub fn reconcile(
    raw_uninstalled: &BTreeSet<String>,
    array: &ComponentArray,
) -> Result<SymbolicState, StateError> {
    let ids = array.component_ids();
    for id in raw_uninstalled {
        if !ids.contains(id) {
            return Err(StateError::UnknownId(id.clone()));
        }
    }
    let mut installed: BTreeSet<String> = ids.difference(raw_uninstalled).cloned().collect();

    let consistency: Vec<&AssemblyRule> = array
        .rules
        .iter()
        .filter(|r| r.kind == RuleKind::ConsistencyConstraint)
        .collect();
    let sibling_sets: Vec<(&String, BTreeSet<String>)> = layer_sibling_sets(array);

    let cap = ids.len().max(1);
    for _sweep in 0..=cap {
        let mut changed = false;

        // Completion: supports implied by detections, then layer siblings.
        loop {
            let mut inserted = false;
            for rule in array
                .rules
                .iter()
                .filter(|r| r.kind == RuleKind::SupportDependency)
            {
                if !installed.contains(&rule.subject) {
                    continue;
                }
                for support in &rule.required {
                    if installed.contains(support) {
                        continue;
                    }
                    let would_survive = consistency
                        .iter()
                        .filter(|c| c.subject == *support)
                        .all(|c| c.required.iter().all(|req| installed.contains(req)));
                    if would_survive && installed.insert(support.clone()) {
                        inserted = true;
                    }
                }
            }
            for (id, siblings) in &sibling_sets {
                if installed.contains(*id) {
                    for sib in siblings {
                        if installed.insert(sib.clone()) {
                            inserted = true;
                        }
                    }
                }
            }
            for rule in array
                .rules
                .iter()
                .filter(|r| r.kind == RuleKind::AdjacencyPattern)
            {
                if installed.contains(&rule.subject) {
                    for sib in &rule.required {
                        if installed.insert(sib.clone()) {
                            inserted = true;
                        }
                    }
                }
            }
            if !inserted {
                break;
            }
            changed = true;
        }

        // Pruning: drop installed components violating any rule.
        loop {
            let offender = array
                .rules
                .iter()
                .find(|r| !rule_satisfied(r, &installed))
                .map(|r| r.subject.clone());
            match offender {
                Some(subject) => {
                    installed.remove(&subject);
                    changed = true;
                }
                None => break,
            }
        }

        if !changed {
            let uninstalled = ids.difference(&installed).cloned().collect();
            return Ok(SymbolicState {
                installed,
                uninstalled,
            });
        }
    }
    Err(StateError::NonConvergence(cap))
}

fn layer_sibling_sets(array: &ComponentArray) -> Vec<(&String, BTreeSet<String>)> {
    let mut groups: BTreeMap<&str, Vec<&String>> = BTreeMap::new();
    for c in &array.components {
        if let Some(layer) = &c.layer_group {
            groups
                .entry(layer.group_id.as_str())
                .or_default()
                .push(&c.id);
        }
    }
    let mut out = Vec::new();
    for members in groups.values() {
        for id in members {
            let siblings: BTreeSet<String> = members
                .iter()
                .filter(|m| **m != *id)
                .map(|m| (*m).clone())
                .collect();
            if !siblings.is_empty() {
                out.push((*id, siblings));
            }
        }
    }
    out
}

/// Compare consecutive verified states against the robot completions that
/// were expected this cycle; anything unexplained is a human event.
pub fn detect_event(
    prev: &SymbolicState,
    curr: &SymbolicState,
    expected_completions: &BTreeSet<String>,
) -> Result<InterventionEvent, StateError> {
    if prev.universe() != curr.universe() {
        return Err(StateError::MismatchedUniverse);
    }
    let human_installed: BTreeSet<String> = prev
        .uninstalled
        .difference(&curr.uninstalled)
        .filter(|id| !expected_completions.contains(*id))
        .cloned()
        .collect();
    let human_removed: BTreeSet<String> = curr
        .uninstalled
        .difference(&prev.uninstalled)
        .cloned()
        .collect();
    Ok(InterventionEvent::from_sets(human_installed, human_removed))
}
