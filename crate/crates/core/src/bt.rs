//! Per-robot behavior trees: compilation from plans with subtree
//! preservation, and synchronous ticking against the simulated world.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::planner::{Plan, RobotProfile};
use crate::world::World;

#[derive(Debug, Error)]
pub enum BtError {
    #[error("robot {robot} waits at barrier {barrier} outside its coalition")]
    BarrierMembership { robot: String, barrier: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ActionKind {
    Move,
    Pick,
    Install,
    CoPick,
    CoInstall,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TickStatus {
    Success,
    Running,
    Failure,
    Idle,
}

/// Behavior-tree node. Actions and sync points are leaves; sequences and
/// parallels carry ordered children.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum BTNode {
    Sequence(Vec<BTNode>),
    Parallel(Vec<BTNode>),
    Action {
        kind: ActionKind,
        target: String,
    },
    SyncPoint {
        barrier: String,
        coalition: BTreeSet<String>,
    },
    Idle,
}

/// Ticks each action kind takes to complete.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionDurations {
    pub move_ticks: u32,
    pub pick_ticks: u32,
    pub install_ticks: u32,
    pub co_pick_ticks: u32,
    pub co_install_ticks: u32,
}

impl Default for ActionDurations {
    fn default() -> Self {
        Self {
            move_ticks: 1,
            pick_ticks: 1,
            install_ticks: 1,
            co_pick_ticks: 1,
            co_install_ticks: 1,
        }
    }
}

impl ActionDurations {
    pub fn of(&self, kind: ActionKind) -> u32 {
        match kind {
            ActionKind::Move => self.move_ticks,
            ActionKind::Pick => self.pick_ticks,
            ActionKind::Install => self.install_ticks,
            ActionKind::CoPick => self.co_pick_ticks,
            ActionKind::CoInstall => self.co_install_ticks,
        }
    }
}

pub fn barrier_id(component: &str) -> String {
    format!("sync_{component}")
}

fn task_subtree(component: &str, coalition: &BTreeSet<String>) -> BTNode {
    if coalition.len() == 1 {
        BTNode::Sequence(vec![
            BTNode::Action {
                kind: ActionKind::Move,
                target: component.to_string(),
            },
            BTNode::Action {
                kind: ActionKind::Pick,
                target: component.to_string(),
            },
            BTNode::Action {
                kind: ActionKind::Install,
                target: component.to_string(),
            },
        ])
    } else {
        BTNode::Sequence(vec![
            BTNode::Action {
                kind: ActionKind::Move,
                target: component.to_string(),
            },
            BTNode::Action {
                kind: ActionKind::CoPick,
                target: component.to_string(),
            },
            BTNode::SyncPoint {
                barrier: barrier_id(component),
                coalition: coalition.clone(),
            },
            BTNode::Action {
                kind: ActionKind::CoInstall,
                target: component.to_string(),
            },
        ])
    }
}

/// Component a task subtree installs.
pub fn subtree_target(node: &BTNode) -> Option<&str> {
    match node {
        BTNode::Action { target, .. } => Some(target),
        BTNode::Sequence(children) | BTNode::Parallel(children) => {
            children.iter().find_map(subtree_target)
        }
        BTNode::SyncPoint { .. } | BTNode::Idle => None,
    }
}

/// Compile the plan into one tree per robot.
///
/// Each robot's root is a sequence over its task subtrees; tasks whose
/// assignment is unchanged keep their previous subtree (and execution
/// position), newly assigned tasks are appended in id order, and robots
/// without assignments get an idle leaf.
pub fn compile(
    plan: &Plan,
    prev_plan: &Plan,
    prev_trees: &BTreeMap<String, BTNode>,
    team: &[RobotProfile],
) -> BTreeMap<String, BTNode> {
    let mut trees = BTreeMap::new();
    for robot in team {
        let mut children: Vec<BTNode> = Vec::new();
        let mut covered: BTreeSet<&str> = BTreeSet::new();
        if let Some(BTNode::Sequence(prev_children)) = prev_trees.get(&robot.id) {
            for prev_child in prev_children {
                let Some(target) = subtree_target(prev_child) else {
                    continue;
                };
                let unchanged = match (
                    plan.assignments.get(target),
                    prev_plan.assignments.get(target),
                ) {
                    (Some(now), Some(before)) => now == before && now.contains(&robot.id),
                    _ => false,
                };
                if unchanged {
                    children.push(prev_child.clone());
                    covered.insert(target);
                }
            }
        }
        for (component, coalition) in &plan.assignments {
            if coalition.contains(&robot.id) && !covered.contains(component.as_str()) {
                children.push(task_subtree(component, &coalition.robots));
            }
        }
        let root = if children.is_empty() {
            BTNode::Idle
        } else {
            BTNode::Sequence(children)
        };
        trees.insert(robot.id.clone(), root);
    }
    trees
}

fn is_done(node: &BTNode, robot: &str, world: &World) -> bool {
    match node {
        BTNode::Sequence(children) | BTNode::Parallel(children) => {
            children.iter().all(|c| is_done(c, robot, world))
        }
        BTNode::Action { kind, target } => world.action_done(robot, target, *kind),
        BTNode::SyncPoint { barrier, .. } => world.barrier_released(barrier),
        BTNode::Idle => false,
    }
}

fn advance(
    node: &BTNode,
    robot: &str,
    world: &mut World,
    durations: &ActionDurations,
) -> Result<TickStatus, BtError> {
    match node {
        BTNode::Idle => Ok(TickStatus::Idle),
        BTNode::Action { kind, target } => {
            if world.action_done(robot, target, *kind) {
                return Ok(TickStatus::Success);
            }
            let progress = world.bump_progress(robot, target, *kind);
            if progress >= durations.of(*kind) {
                world.complete_action(robot, target, *kind);
                if matches!(kind, ActionKind::Install | ActionKind::CoInstall) {
                    world.install_by_robot(target, robot);
                }
                Ok(TickStatus::Success)
            } else {
                Ok(TickStatus::Running)
            }
        }
        BTNode::SyncPoint { barrier, coalition } => {
            if !coalition.contains(robot) {
                return Err(BtError::BarrierMembership {
                    robot: robot.to_string(),
                    barrier: barrier.clone(),
                });
            }
            if world.barrier_released(barrier) {
                return Ok(TickStatus::Success);
            }
            world.arrive(barrier, robot);
            Ok(TickStatus::Running)
        }
        BTNode::Sequence(children) => {
            // Advance the leftmost unfinished child by one tick.
            for child in children {
                if is_done(child, robot, world) {
                    continue;
                }
                let status = advance(child, robot, world, durations)?;
                return Ok(match status {
                    TickStatus::Success if is_done(node, robot, world) => TickStatus::Success,
                    TickStatus::Success => TickStatus::Running,
                    other => other,
                });
            }
            Ok(TickStatus::Success)
        }
        BTNode::Parallel(children) => {
            let mut any_running = false;
            let mut any_idle = false;
            for child in children {
                if is_done(child, robot, world) {
                    continue;
                }
                match advance(child, robot, world, durations)? {
                    TickStatus::Running => any_running = true,
                    TickStatus::Idle => any_idle = true,
                    TickStatus::Success | TickStatus::Failure => {}
                }
            }
            if is_done(node, robot, world) {
                Ok(TickStatus::Success)
            } else if any_running || !any_idle {
                Ok(TickStatus::Running)
            } else {
                Ok(TickStatus::Idle)
            }
        }
    }
}

fn collect_barriers(node: &BTNode, out: &mut BTreeMap<String, BTreeSet<String>>) {
    match node {
        BTNode::Sequence(children) | BTNode::Parallel(children) => {
            for c in children {
                collect_barriers(c, out);
            }
        }
        BTNode::SyncPoint { barrier, coalition } => {
            out.insert(barrier.clone(), coalition.clone());
        }
        _ => {}
    }
}

/// Advance every robot by one synchronous tick (deterministic robot-id
/// order), then release barriers whose whole coalition has arrived so all
/// members proceed together.
pub fn tick(
    trees: &BTreeMap<String, BTNode>,
    world: &mut World,
    durations: &ActionDurations,
) -> Result<BTreeMap<String, TickStatus>, BtError> {
    world.tick_index += 1;
    let mut statuses = BTreeMap::new();
    for (robot, root) in trees {
        let status = if is_done(root, robot, world) {
            TickStatus::Success
        } else {
            advance(root, robot, world, durations)?
        };
        statuses.insert(robot.clone(), status);
    }
    let mut barriers = BTreeMap::new();
    for root in trees.values() {
        collect_barriers(root, &mut barriers);
    }
    world.release_ready_barriers(&barriers);
    Ok(statuses)
}

/// Component of the robot's current in-progress task chain, if any.
pub fn current_target<'a>(root: &'a BTNode, robot: &str, world: &World) -> Option<&'a str> {
    match root {
        BTNode::Sequence(children) => children
            .iter()
            .find(|c| !is_done(c, robot, world))
            .and_then(subtree_target),
        other => subtree_target(other),
    }
}

/// Indented one-line-per-node dump for trace output.
pub fn dump_tree(node: &BTNode) -> String {
    fn walk(node: &BTNode, depth: usize, out: &mut String) {
        let pad = "  ".repeat(depth);
        match node {
            BTNode::Sequence(children) => {
                out.push_str(&format!("{pad}Sequence\n"));
                for c in children {
                    walk(c, depth + 1, out);
                }
            }
            BTNode::Parallel(children) => {
                out.push_str(&format!("{pad}Parallel\n"));
                for c in children {
                    walk(c, depth + 1, out);
                }
            }
            BTNode::Action { kind, target } => {
                out.push_str(&format!("{pad}Action {kind:?} {target}\n"));
            }
            BTNode::SyncPoint { barrier, coalition } => {
                let members: Vec<&str> = coalition.iter().map(String::as_str).collect();
                out.push_str(&format!(
                    "{pad}SyncPoint {barrier} [{}]\n",
                    members.join(",")
                ));
            }
            BTNode::Idle => out.push_str(&format!("{pad}Idle\n")),
        }
    }
    let mut out = String::new();
    walk(node, 0, &mut out);
    out
}
