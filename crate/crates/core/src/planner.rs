//! Frontier computation, payload-feasible coalition enumeration, and
//! minimal-change plan updates.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::ontology::{ComponentArray, ComponentRecord};
use crate::state::{InterventionEvent, SymbolicState};

/// Payload capability of one robot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobotProfile {
    pub id: String,
    pub payload_capacity_kg: f64,
}

impl RobotProfile {
    pub fn new(id: impl Into<String>, payload_capacity_kg: f64) -> Self {
        Self {
            id: id.into(),
            payload_capacity_kg,
        }
    }
}

/// A nonempty set of robots jointly assigned to install one component.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Coalition {
    pub robots: BTreeSet<String>,
}

impl Coalition {
    pub fn of<I: IntoIterator<Item = S>, S: Into<String>>(robots: I) -> Self {
        let robots: BTreeSet<String> = robots.into_iter().map(Into::into).collect();
        assert!(!robots.is_empty(), "coalition must be nonempty");
        Self { robots }
    }

    pub fn contains(&self, robot: &str) -> bool {
        self.robots.contains(robot)
    }

    pub fn len(&self) -> usize {
        self.robots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.robots.is_empty()
    }

    pub fn capacity(&self, team: &[RobotProfile]) -> f64 {
        team.iter()
            .filter(|r| self.robots.contains(&r.id))
            .map(|r| r.payload_capacity_kg)
            .sum()
    }
}

/// Assignment of frontier components to coalitions.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Plan {
    pub assignments: BTreeMap<String, Coalition>,
    pub frontier: BTreeSet<String>,
}

impl Plan {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Number of components each robot currently carries.
    pub fn load_counts(&self, team: &[RobotProfile]) -> BTreeMap<String, usize> {
        let mut loads: BTreeMap<String, usize> = team.iter().map(|r| (r.id.clone(), 0)).collect();
        for coalition in self.assignments.values() {
            for robot in &coalition.robots {
                if let Some(n) = loads.get_mut(robot) {
                    *n += 1;
                }
            }
        }
        loads
    }
}

/// A plan plus the frontier components no coalition can lift.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanUpdate {
    pub plan: Plan,
    pub infeasible: BTreeSet<String>,
}

/// The admissible frontier: uninstalled components whose prerequisites are
/// all installed.
pub fn frontier(state: &SymbolicState, array: &ComponentArray) -> BTreeSet<String> {
    array
        .components
        .iter()
        .filter(|c| {
            state.uninstalled.contains(&c.id)
                && c.prerequisites.iter().all(|p| state.installed.contains(p))
        })
        .map(|c| c.id.clone())
        .collect()
}

/// All inclusion-minimal robot subsets whose summed payload capacity exceeds
/// the component mass, sorted by size then lexicographic ids. Empty means
/// the component is infeasible for this team.
pub fn feasible_coalitions(component: &ComponentRecord, team: &[RobotProfile]) -> Vec<Coalition> {
    assert!(
        team.len() <= 16,
        "coalition enumeration is exponential in team size"
    );
    let mass = component.mass_kg;
    let mut out: Vec<Coalition> = Vec::new();
    for mask in 1u32..(1 << team.len()) {
        let members: Vec<&RobotProfile> = team
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, r)| r)
            .collect();
        let total: f64 = members.iter().map(|r| r.payload_capacity_kg).sum();
        if total <= mass {
            continue;
        }
        // Inclusion-minimal: removing any single member must break feasibility.
        let minimal = members
            .iter()
            .all(|r| total - r.payload_capacity_kg <= mass);
        if minimal {
            out.push(Coalition::of(members.iter().map(|r| r.id.clone())));
        }
    }
    out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.robots.cmp(&b.robots)));
    out
}

/// Minimal-change plan update per the event-gated rule: with no event the
/// previous plan is retained unchanged; otherwise assignments that remain
/// admissible and feasible are kept and the rest of the frontier is assigned
/// by the workload heuristic.
pub fn replan(
    prev: &Plan,
    frontier: &BTreeSet<String>,
    event: &InterventionEvent,
    team: &[RobotProfile],
    array: &ComponentArray,
) -> PlanUpdate {
    if event.is_none() {
        return PlanUpdate {
            plan: prev.clone(),
            infeasible: BTreeSet::new(),
        };
    }
    replan_cover(prev, frontier, team, array)
}

/// Retain previous assignments still on the frontier whose coalition remains
/// payload-feasible, then assign every uncovered frontier component the
/// smallest feasible coalition containing the least-loaded feasible robot
/// (load = current assignment count, ties by robot id).
pub fn replan_cover(
    prev: &Plan,
    frontier: &BTreeSet<String>,
    team: &[RobotProfile],
    array: &ComponentArray,
) -> PlanUpdate {
    let mut plan = Plan {
        assignments: BTreeMap::new(),
        frontier: frontier.clone(),
    };
    for (comp, coalition) in &prev.assignments {
        if !frontier.contains(comp) {
            continue;
        }
        let Some(record) = array.component(comp) else {
            continue;
        };
        if coalition.capacity(team) > record.mass_kg {
            plan.assignments.insert(comp.clone(), coalition.clone());
        }
    }
    let infeasible = assign_remaining(&mut plan, frontier, team, array);
    PlanUpdate { plan, infeasible }
}

/// Baseline strategy: rebuild every assignment from scratch, ignoring the
/// previous plan.
pub fn replan_full(
    frontier: &BTreeSet<String>,
    team: &[RobotProfile],
    array: &ComponentArray,
) -> PlanUpdate {
    let mut plan = Plan {
        assignments: BTreeMap::new(),
        frontier: frontier.clone(),
    };
    let infeasible = assign_remaining(&mut plan, frontier, team, array);
    PlanUpdate { plan, infeasible }
}

fn assign_remaining(
    plan: &mut Plan,
    frontier: &BTreeSet<String>,
    team: &[RobotProfile],
    array: &ComponentArray,
) -> BTreeSet<String> {
    let mut loads = plan.load_counts(team);
    let mut infeasible = BTreeSet::new();
    for comp in frontier {
        if plan.assignments.contains_key(comp) {
            continue;
        }
        let Some(record) = array.component(comp) else {
            infeasible.insert(comp.clone());
            continue;
        };
        let candidates = feasible_coalitions(record, team);
        if candidates.is_empty() {
            infeasible.insert(comp.clone());
            continue;
        }
        let feasible_robots: BTreeSet<&String> =
            candidates.iter().flat_map(|c| c.robots.iter()).collect();
        let chosen_robot = feasible_robots
            .into_iter()
            .min_by_key(|r| (loads.get(*r).copied().unwrap_or(0), (*r).clone()))
            .expect("nonempty candidate set")
            .clone();
        let coalition = candidates
            .into_iter()
            .find(|c| c.contains(&chosen_robot))
            .expect("least-loaded robot appears in some coalition");
        for robot in &coalition.robots {
            *loads.entry(robot.clone()).or_insert(0) += 1;
        }
        plan.assignments.insert(comp.clone(), coalition);
    }
    infeasible
}

/// Plan-edit distance: shared-frontier components whose coalition changed.
pub fn edit_distance(curr: &Plan, prev: &Plan) -> usize {
    curr.frontier
        .intersection(&prev.frontier)
        .filter(|comp| curr.assignments.get(*comp) != prev.assignments.get(*comp))
        .count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::state::{EventKind, InterventionEvent};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn set(items: &[&str]) -> BTreeSet<String> {
        items.iter().map(|s| s.to_string()).collect()
    }

    fn homogeneous() -> Vec<RobotProfile> {
        vec![
            RobotProfile::new("cobot_1", 11.0),
            RobotProfile::new("cobot_2", 11.0),
        ]
    }

    fn detected() -> InterventionEvent {
        InterventionEvent {
            kind: EventKind::Detected,
            human_installed: set(&["x"]),
            human_removed: BTreeSet::new(),
        }
    }

    #[test]
    fn empty_uninstalled_means_empty_frontier() {
        let array = fixtures::timber27_array();
        let ids = array.component_ids();
        let state = SymbolicState::from_uninstalled(&ids, BTreeSet::new());
        assert!(frontier(&state, &array).is_empty());
    }

    #[test]
    fn initial_frontier_is_exactly_the_bottom_plates() {
        let array = fixtures::timber27_array();
        let ids = array.component_ids();
        let state = SymbolicState::all_uninstalled(&ids);
        assert_eq!(frontier(&state, &array), set(&["bottom_plate"]));
    }

    #[test]
    fn frontier_matches_bruteforce_on_random_dags() {
        // Random prerequisite DAGs over <= 12 nodes, all 2^n states.
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..25 {
            let n = rng.gen_range(1..=10);
            let array = random_dag_array(n, &mut rng);
            let ids: Vec<String> = array.component_ids().into_iter().collect();
            for mask in 0u32..(1 << n) {
                let installed: BTreeSet<String> = ids
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask & (1 << i) != 0)
                    .map(|(_, id)| id.clone())
                    .collect();
                let uninstalled: BTreeSet<String> = ids
                    .iter()
                    .filter(|id| !installed.contains(*id))
                    .cloned()
                    .collect();
                let state = SymbolicState {
                    installed: installed.clone(),
                    uninstalled,
                };
                let expected: BTreeSet<String> = array
                    .components
                    .iter()
                    .filter(|c| !installed.contains(&c.id))
                    .filter(|c| c.prerequisites.iter().all(|p| installed.contains(p)))
                    .map(|c| c.id.clone())
                    .collect();
                assert_eq!(frontier(&state, &array), expected);
            }
        }
    }

    pub(crate) fn random_dag_array(n: usize, rng: &mut ChaCha8Rng) -> ComponentArray {
        use crate::ontology::tests::dummy_record;
        use crate::ontology::{ComponentKind, ConstructionConstants};
        let mut components: Vec<_> = (0..n)
            .map(|i| dummy_record(&format!("n{i:02}"), ComponentKind::Stud))
            .collect();
        for i in 0..n {
            for j in 0..i {
                if rng.gen_bool(0.3) {
                    let dep = components[j].id.clone();
                    components[i].prerequisites.insert(dep);
                }
            }
        }
        ComponentArray {
            frame_id: "dag".into(),
            wall_name: "dag".into(),
            construction_constants: ConstructionConstants::default(),
            components,
            rules: Vec::new(),
        }
    }

    #[test]
    fn frontier_monotone_under_installs() {
        let array = fixtures::timber27_array();
        let ids = array.component_ids();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let id_vec: Vec<String> = ids.iter().cloned().collect();
        for _ in 0..50 {
            let installed: BTreeSet<String> = id_vec
                .iter()
                .filter(|_| rng.gen_bool(0.4))
                .cloned()
                .collect();
            let state = SymbolicState::from_uninstalled(
                &ids,
                ids.difference(&installed).cloned().collect(),
            );
            let before = frontier(&state, &array);
            let Some(next) = state.uninstalled.iter().next().cloned() else {
                continue;
            };
            let mut installed2 = installed.clone();
            installed2.insert(next.clone());
            let state2 = SymbolicState::from_uninstalled(
                &ids,
                ids.difference(&installed2).cloned().collect(),
            );
            let after = frontier(&state2, &array);
            for comp in &before {
                assert!(
                    after.contains(comp) || *comp == next,
                    "frontier shrank at {comp}"
                );
            }
        }
    }

    #[test]
    fn bottom_plate_needs_both_homogeneous_robots() {
        let array = fixtures::timber27_array();
        let plate = array.component("bottom_plate").unwrap();
        let coalitions = feasible_coalitions(plate, &homogeneous());
        assert_eq!(coalitions, vec![Coalition::of(["cobot_1", "cobot_2"])]);
    }

    #[test]
    fn heterogeneous_team_lifts_plate_with_big_robot() {
        let array = fixtures::timber27_array();
        let plate = array.component("bottom_plate").unwrap();
        let team = vec![
            RobotProfile::new("cobot_1", 15.0),
            RobotProfile::new("cobot_2", 6.0),
        ];
        let coalitions = feasible_coalitions(plate, &team);
        assert_eq!(coalitions, vec![Coalition::of(["cobot_1"])]);
    }

    #[test]
    fn light_component_takes_any_singleton() {
        let array = fixtures::timber27_array();
        let cripple = array.component("window_1_cripple_up_1").unwrap();
        let coalitions = feasible_coalitions(cripple, &homogeneous());
        assert_eq!(
            coalitions,
            vec![Coalition::of(["cobot_1"]), Coalition::of(["cobot_2"])]
        );
    }

    #[test]
    fn overweight_component_is_infeasible() {
        let mut record = fixtures::timber27_array()
            .component("bottom_plate")
            .unwrap()
            .clone();
        record.mass_kg = 30.0;
        assert!(feasible_coalitions(&record, &homogeneous()).is_empty());
    }

    #[test]
    fn no_event_returns_previous_plan_unchanged() {
        let array = fixtures::timber27_array();
        let mut prev = Plan::empty();
        prev.frontier = set(&["stud_1", "stud_2"]);
        prev.assignments
            .insert("stud_1".into(), Coalition::of(["cobot_1"]));
        let update = replan(
            &prev,
            &set(&["stud_1", "stud_2", "stud_3"]),
            &InterventionEvent::none(),
            &homogeneous(),
            &array,
        );
        assert_eq!(update.plan, prev);
        assert!(update.infeasible.is_empty());
    }

    #[test]
    fn human_install_drops_its_task_and_keeps_the_rest() {
        let array = fixtures::timber27_array();
        // Before the event the robots were on cripple_up_2 and stud_5.
        let mut prev = Plan::empty();
        prev.frontier = set(&["window_1_cripple_up_2", "stud_5"]);
        prev.assignments
            .insert("window_1_cripple_up_2".into(), Coalition::of(["cobot_1"]));
        prev.assignments
            .insert("stud_5".into(), Coalition::of(["cobot_2"]));
        // A human installs cripple_up_2; cripple_up_1 becomes the open task.
        let frontier = set(&["window_1_cripple_up_1", "stud_5"]);
        let update = replan(&prev, &frontier, &detected(), &homogeneous(), &array);
        assert_eq!(
            update.plan.assignments.get("stud_5"),
            Some(&Coalition::of(["cobot_2"]))
        );
        assert!(!update
            .plan
            .assignments
            .contains_key("window_1_cripple_up_2"));
        assert_eq!(
            update.plan.assignments.get("window_1_cripple_up_1"),
            Some(&Coalition::of(["cobot_1"]))
        );
        assert_eq!(edit_distance(&update.plan, &prev), 0);
    }

    #[test]
    fn new_component_goes_to_least_loaded_robot() {
        let array = fixtures::timber27_array();
        let mut prev = Plan::empty();
        prev.frontier = set(&["stud_1", "stud_2", "stud_3"]);
        prev.assignments
            .insert("stud_1".into(), Coalition::of(["cobot_1"]));
        prev.assignments
            .insert("stud_2".into(), Coalition::of(["cobot_1"]));
        prev.assignments
            .insert("stud_3".into(), Coalition::of(["cobot_2"]));
        let frontier = set(&["stud_1", "stud_2", "stud_3", "window_1_cripple_down_1"]);
        let update = replan(&prev, &frontier, &detected(), &homogeneous(), &array);
        // Exhaustive check over the two possible assignments: loads are
        // {cobot_1: 2, cobot_2: 1}, so cobot_2 is the unique minimizer.
        let loads = prev.load_counts(&homogeneous());
        let best = ["cobot_1", "cobot_2"]
            .iter()
            .min_by_key(|r| (loads[**r], r.to_string()))
            .unwrap();
        assert_eq!(*best, "cobot_2");
        assert_eq!(
            update.plan.assignments.get("window_1_cripple_down_1"),
            Some(&Coalition::of(["cobot_2"]))
        );
    }

    #[test]
    fn edit_distance_cases() {
        let mut a = Plan::empty();
        a.frontier = set(&["x", "y"]);
        a.assignments.insert("x".into(), Coalition::of(["r1"]));
        a.assignments.insert("y".into(), Coalition::of(["r2"]));
        assert_eq!(edit_distance(&a, &a), 0);

        let mut b = a.clone();
        b.assignments.insert("x".into(), Coalition::of(["r2"]));
        assert_eq!(edit_distance(&b, &a), 1);

        // A component present only in one frontier contributes nothing.
        let mut c = a.clone();
        c.frontier.insert("z".into());
        c.assignments.insert("z".into(), Coalition::of(["r1"]));
        assert_eq!(edit_distance(&c, &a), 0);
    }

    #[test]
    fn emitted_plans_are_always_feasible() {
        let array = fixtures::timber27_array();
        let ids = array.component_ids();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let id_vec: Vec<String> = ids.iter().cloned().collect();
        let team = homogeneous();
        for _ in 0..100 {
            let installed: BTreeSet<String> = id_vec
                .iter()
                .filter(|_| rng.gen_bool(0.5))
                .cloned()
                .collect();
            let state = SymbolicState::from_uninstalled(
                &ids,
                ids.difference(&installed).cloned().collect(),
            );
            let front = frontier(&state, &array);
            let update = replan_cover(&Plan::empty(), &front, &team, &array);
            assert_eq!(
                update.plan.assignments.len() + update.infeasible.len(),
                front.len()
            );
            for (comp, coalition) in &update.plan.assignments {
                let record = array.component(comp).unwrap();
                assert!(
                    coalition.capacity(&team) > record.mass_kg,
                    "{comp} infeasible"
                );
                assert!(feasible_coalitions(record, &team).contains(coalition));
            }
        }
    }

    #[test]
    fn retained_components_never_count_toward_edit_distance() {
        let array = fixtures::timber27_array();
        let team = homogeneous();
        let ids = array.component_ids();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let id_vec: Vec<String> = ids.iter().cloned().collect();
        let mut prev = Plan::empty();
        for _ in 0..60 {
            let installed: BTreeSet<String> = id_vec
                .iter()
                .filter(|_| rng.gen_bool(0.5))
                .cloned()
                .collect();
            let state = SymbolicState::from_uninstalled(
                &ids,
                ids.difference(&installed).cloned().collect(),
            );
            let front = frontier(&state, &array);
            let update = replan_cover(&prev, &front, &team, &array);
            // Payload feasibility never changes, so retention keeps every
            // shared-frontier coalition and the distance stays zero.
            assert_eq!(edit_distance(&update.plan, &prev), 0);
            prev = update.plan;
        }
    }
}
