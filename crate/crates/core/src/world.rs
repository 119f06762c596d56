//! Ground-truth world state for the closed-loop simulation: the installed
//! set, per-action execution progress, synchronization barriers, and an
//! event log for trace inspection.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::bt::ActionKind;
use crate::ontology::ComponentArray;
use crate::state::SymbolicState;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum ExecEvent {
    ActionStarted {
        tick: u64,
        robot: String,
        kind: ActionKind,
        target: String,
    },
    ActionCompleted {
        tick: u64,
        robot: String,
        kind: ActionKind,
        target: String,
    },
    BarrierArrived {
        tick: u64,
        robot: String,
        barrier: String,
    },
    BarrierReleased {
        tick: u64,
        barrier: String,
    },
    RobotInstalled {
        tick: u64,
        component: String,
        robot: String,
    },
    HumanInstalled {
        tick: u64,
        component: String,
    },
    HumanRemoved {
        tick: u64,
        component: String,
    },
}

/// The simulated workcell. Robot behavior trees mutate it through `tick`;
/// human policies mutate it directly between cycles.
#[derive(Debug, Clone)]
pub struct World {
    pub installed: BTreeSet<String>,
    ids: BTreeSet<String>,
    prerequisites: BTreeMap<String, BTreeSet<String>>,
    /// Reverse prerequisite edges: component -> components requiring it.
    dependents: BTreeMap<String, BTreeSet<String>>,
    /// Layer-group siblings installed and removed together.
    siblings: BTreeMap<String, BTreeSet<String>>,
    progress: BTreeMap<(String, String, ActionKind), u32>,
    done: BTreeSet<(String, String, ActionKind)>,
    barrier_arrivals: BTreeMap<String, BTreeSet<String>>,
    barriers_released: BTreeSet<String>,
    pub tick_index: u64,
    completions_this_tick: BTreeSet<String>,
    pub events: Vec<ExecEvent>,
    pub precedence_violations: Vec<String>,
}

impl World {
    pub fn new(array: &ComponentArray) -> Self {
        let prerequisites = array.prerequisites();
        let mut dependents: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for (id, pre) in &prerequisites {
            for dep in pre {
                dependents
                    .entry(dep.clone())
                    .or_default()
                    .insert(id.clone());
            }
        }
        let mut siblings: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for c in &array.components {
            if let Some(layer) = &c.layer_group {
                let sibs: BTreeSet<String> = array
                    .components
                    .iter()
                    .filter(|o| {
                        o.id != c.id
                            && o.layer_group.as_ref().map(|l| &l.group_id) == Some(&layer.group_id)
                    })
                    .map(|o| o.id.clone())
                    .collect();
                siblings.insert(c.id.clone(), sibs);
            }
        }
        Self {
            installed: BTreeSet::new(),
            ids: array.component_ids(),
            prerequisites,
            dependents,
            siblings,
            progress: BTreeMap::new(),
            done: BTreeSet::new(),
            barrier_arrivals: BTreeMap::new(),
            barriers_released: BTreeSet::new(),
            tick_index: 0,
            completions_this_tick: BTreeSet::new(),
            events: Vec::new(),
            precedence_violations: Vec::new(),
        }
    }

    pub fn true_state(&self) -> SymbolicState {
        SymbolicState::from_uninstalled(
            &self.ids,
            self.ids.difference(&self.installed).cloned().collect(),
        )
    }

    pub fn assembly_complete(&self) -> bool {
        self.installed == self.ids
    }

    /// Uninstalled components whose prerequisites hold in the true world.
    pub fn admissible(&self) -> BTreeSet<String> {
        self.ids
            .iter()
            .filter(|id| !self.installed.contains(*id))
            .filter(|id| {
                self.prerequisites[*id]
                    .iter()
                    .all(|p| self.installed.contains(p))
            })
            .cloned()
            .collect()
    }

    /// The component and its layer-group siblings.
    pub fn layer_group_of(&self, id: &str) -> BTreeSet<String> {
        let mut group = BTreeSet::from([id.to_string()]);
        if let Some(sibs) = self.siblings.get(id) {
            group.extend(sibs.iter().cloned());
        }
        group
    }

    /// Installed components whose removal keeps the world rule-consistent:
    /// nothing outside their own layer group depends on them. Layer groups
    /// are collapsed to their lowest id.
    pub fn removable(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for id in &self.installed {
            let group = self.layer_group_of(id);
            let free = group.iter().all(|member| {
                self.dependents
                    .get(member)
                    .map(|deps| {
                        deps.iter()
                            .all(|d| !self.installed.contains(d) || group.contains(d))
                    })
                    .unwrap_or(true)
            });
            if free {
                out.insert(group.iter().next().expect("nonempty group").clone());
            }
        }
        out
    }

    // --- execution-state accessors used by the tick loop ---

    pub(crate) fn action_done(&self, robot: &str, target: &str, kind: ActionKind) -> bool {
        self.done
            .contains(&(robot.to_string(), target.to_string(), kind))
    }

    pub(crate) fn bump_progress(&mut self, robot: &str, target: &str, kind: ActionKind) -> u32 {
        let key = (robot.to_string(), target.to_string(), kind);
        let p = self.progress.entry(key).or_insert(0);
        *p += 1;
        if *p == 1 {
            self.events.push(ExecEvent::ActionStarted {
                tick: self.tick_index,
                robot: robot.to_string(),
                kind,
                target: target.to_string(),
            });
        }
        *p
    }

    pub(crate) fn complete_action(&mut self, robot: &str, target: &str, kind: ActionKind) {
        self.done
            .insert((robot.to_string(), target.to_string(), kind));
        self.events.push(ExecEvent::ActionCompleted {
            tick: self.tick_index,
            robot: robot.to_string(),
            kind,
            target: target.to_string(),
        });
    }

    pub(crate) fn barrier_released(&self, barrier: &str) -> bool {
        self.barriers_released.contains(barrier)
    }

    pub(crate) fn arrive(&mut self, barrier: &str, robot: &str) {
        let arrivals = self
            .barrier_arrivals
            .entry(barrier.to_string())
            .or_default();
        if arrivals.insert(robot.to_string()) {
            self.events.push(ExecEvent::BarrierArrived {
                tick: self.tick_index,
                robot: robot.to_string(),
                barrier: barrier.to_string(),
            });
        }
    }

    pub(crate) fn release_ready_barriers(
        &mut self,
        coalitions: &BTreeMap<String, BTreeSet<String>>,
    ) {
        for (barrier, coalition) in coalitions {
            if self.barriers_released.contains(barrier) {
                continue;
            }
            let arrived = match self.barrier_arrivals.get(barrier) {
                Some(a) => a,
                None => continue,
            };
            if coalition.iter().all(|r| arrived.contains(r)) {
                self.barriers_released.insert(barrier.clone());
                self.events.push(ExecEvent::BarrierReleased {
                    tick: self.tick_index,
                    barrier: barrier.clone(),
                });
            }
        }
    }

    /// Install a component (and its layer siblings, which share one physical
    /// stack) as an expected robot completion.
    pub(crate) fn install_by_robot(&mut self, target: &str, robot: &str) {
        for member in self.layer_group_of(target) {
            if self.installed.contains(&member) {
                continue;
            }
            let missing: Vec<&String> = self.prerequisites[&member]
                .iter()
                .filter(|p| !self.installed.contains(*p))
                .collect();
            if !missing.is_empty() {
                self.precedence_violations.push(format!(
                    "tick {}: {member} installed by {robot} before {missing:?}",
                    self.tick_index
                ));
            }
            self.installed.insert(member.clone());
            self.completions_this_tick.insert(member.clone());
            self.events.push(ExecEvent::RobotInstalled {
                tick: self.tick_index,
                component: member,
                robot: robot.to_string(),
            });
        }
    }

    /// Robot completions recorded since the last call; feeds event detection.
    pub fn take_completions(&mut self) -> BTreeSet<String> {
        std::mem::take(&mut self.completions_this_tick)
    }

    /// Human installs a component stack. The caller picks an admissible
    /// component; siblings share its prerequisites.
    pub fn human_install(&mut self, component: &str) -> BTreeSet<String> {
        let group = self.layer_group_of(component);
        for member in &group {
            if self.installed.insert(member.clone()) {
                self.events.push(ExecEvent::HumanInstalled {
                    tick: self.tick_index,
                    component: member.clone(),
                });
            }
        }
        group
    }

    /// Human removes a component stack plus any installed dependents, so the
    /// world never holds a floating member. Execution state for removed
    /// components is cleared.
    pub fn human_remove(&mut self, component: &str) -> BTreeSet<String> {
        let mut to_remove = self.layer_group_of(component);
        loop {
            let cascade: BTreeSet<String> = to_remove
                .iter()
                .flat_map(|c| self.dependents.get(c).into_iter().flatten())
                .filter(|d| self.installed.contains(*d) && !to_remove.contains(*d))
                .cloned()
                .collect();
            if cascade.is_empty() {
                break;
            }
            to_remove.extend(cascade);
        }
        for member in &to_remove {
            if self.installed.remove(member) {
                self.events.push(ExecEvent::HumanRemoved {
                    tick: self.tick_index,
                    component: member.clone(),
                });
            }
            self.clear_component_exec(member);
        }
        to_remove
    }

    /// Forget all execution progress tied to a component, e.g. when its task
    /// is cancelled or reassigned.
    pub fn clear_component_exec(&mut self, component: &str) {
        self.progress
            .retain(|(_, target, _), _| target != component);
        self.done.retain(|(_, target, _)| target != component);
        let barrier = crate::bt::barrier_id(component);
        self.barrier_arrivals.remove(&barrier);
        self.barriers_released.remove(&barrier);
    }

    /// Events recorded at or after the given tick.
    pub fn events_since(&self, tick: u64) -> Vec<ExecEvent> {
        self.events
            .iter()
            .filter(|e| event_tick(e) >= tick)
            .cloned()
            .collect()
    }
}

pub fn event_tick(event: &ExecEvent) -> u64 {
    match event {
        ExecEvent::ActionStarted { tick, .. }
        | ExecEvent::ActionCompleted { tick, .. }
        | ExecEvent::BarrierArrived { tick, .. }
        | ExecEvent::BarrierReleased { tick, .. }
        | ExecEvent::RobotInstalled { tick, .. }
        | ExecEvent::HumanInstalled { tick, .. }
        | ExecEvent::HumanRemoved { tick, .. } => *tick,
    }
}
