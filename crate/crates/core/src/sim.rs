//! The reactive closed loop: estimate, reconcile, detect events, plan,
//! compile, tick, apply human policy; plus metrics and batch aggregation.

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bt::{self, ActionDurations, BTNode, TickStatus};
use crate::ontology::ComponentArray;
use crate::perception::{NoiseModel, NoisyEstimator, StateEstimator};
use crate::planner::{
    edit_distance, frontier, replan, replan_cover, replan_full, Coalition, Plan, PlanUpdate,
    RobotProfile,
};
use crate::state::{detect_event, reconcile, InterventionEvent, SymbolicState};
use crate::world::{ExecEvent, World};

const NOISE_SEED_SALT: u64 = 0x9e37_79b9_7f4a_7c15;
const POLICY_SEED_SALT: u64 = 0xd1b5_4a32_d192_ed03;

/// Fraction of cycles in which the adversarial policy acts. Calibrated so
/// assemblies still complete while the cycle count roughly doubles
/// relative to no intervention; acting every cycle outpaces two robots and
/// livelocks the build.
pub const ADVERSARIAL_EVENT_RATE: f64 = 0.15;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum HumanPolicy {
    NoIntervention,
    Random {
        p_event: f64,
        install_frac: f64,
        seed: u64,
    },
    Adversarial {
        seed: u64,
    },
    Cooperative {
        seed: u64,
    },
}

impl HumanPolicy {
    fn seed(&self) -> u64 {
        match self {
            HumanPolicy::NoIntervention => 0,
            HumanPolicy::Random { seed, .. }
            | HumanPolicy::Adversarial { seed }
            | HumanPolicy::Cooperative { seed } => *seed,
        }
    }

    fn set_seed(&mut self, new_seed: u64) {
        match self {
            HumanPolicy::NoIntervention => {}
            HumanPolicy::Random { seed, .. }
            | HumanPolicy::Adversarial { seed }
            | HumanPolicy::Cooperative { seed } => *seed = new_seed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlannerMode {
    MinimalChange,
    FullReplanning,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub scenario_id: String,
    pub team: Vec<RobotProfile>,
    pub policy: HumanPolicy,
    pub planner_mode: PlannerMode,
    pub seed: u64,
    pub noise: NoiseModel,
    pub max_cycles: u32,
}

impl ScenarioConfig {
    /// Re-key the scenario on a master seed; the noise and policy streams
    /// get independent derived seeds.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self.noise.seed = seed ^ NOISE_SEED_SALT;
        self.policy.set_seed(seed ^ POLICY_SEED_SALT);
        self
    }
}

/// Human actions applied to the world in one cycle.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct HumanActions {
    pub installed: BTreeSet<String>,
    pub removed: BTreeSet<String>,
}

impl HumanActions {
    pub fn is_empty(&self) -> bool {
        self.installed.is_empty() && self.removed.is_empty()
    }
}

/// One closed-loop iteration as observed by the planner, plus the execution
/// events of its tick. Planning wall time stays in memory only so trace
/// files are byte-stable across runs.
#[derive(Debug, Clone, Serialize)]
pub struct TraceRecord {
    pub iteration: u64,
    pub raw_uninstalled: BTreeSet<String>,
    pub installed: BTreeSet<String>,
    pub uninstalled: BTreeSet<String>,
    pub event: InterventionEvent,
    pub frontier: BTreeSet<String>,
    pub plan: BTreeMap<String, Vec<String>>,
    pub infeasible: BTreeSet<String>,
    pub statuses: BTreeMap<String, TickStatus>,
    pub human_installed: BTreeSet<String>,
    pub human_removed: BTreeSet<String>,
    pub exec_events: Vec<ExecEvent>,
    pub precedence_violations: Vec<String>,
    #[serde(skip)]
    pub planning_time_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub cycles: u64,
    pub mean_planning_time_ms: f64,
    pub mean_edit_distance: f64,
    pub mean_workload_deviation: f64,
    pub completed: bool,
}

/// Run one scenario with the configured noisy estimator.
pub fn run_scenario(
    config: &ScenarioConfig,
    array: &ComponentArray,
) -> (MetricsReport, Vec<TraceRecord>) {
    let estimator = NoisyEstimator {
        model: config.noise,
    };
    run_scenario_with(config, array, &estimator)
}

/// Run one scenario against any state estimator.
pub fn run_scenario_with(
    config: &ScenarioConfig,
    array: &ComponentArray,
    estimator: &dyn StateEstimator,
) -> (MetricsReport, Vec<TraceRecord>) {
    assert!(!config.team.is_empty(), "team must be nonempty");
    assert!(config.max_cycles > 0, "max cycles must be positive");

    let durations = ActionDurations::default();
    let mut world = World::new(array);
    let ids = array.component_ids();
    let mut prev_state = SymbolicState::all_uninstalled(&ids);
    let mut prev_plan = Plan::empty();
    let mut trees: BTreeMap<String, BTNode> = BTreeMap::new();
    let mut expected_completions: BTreeSet<String> = BTreeSet::new();
    let mut policy_rng = ChaCha8Rng::seed_from_u64(config.policy.seed());
    let mut trace: Vec<TraceRecord> = Vec::new();
    let mut completed = false;

    for iteration in 0..config.max_cycles as u64 {
        // State update.
        let raw = estimator.estimate(&world.true_state(), iteration);
        let state = reconcile(&raw, array)
            .expect("raw set stays within the component set and the rule set converges");
        let event = detect_event(&prev_state, &state, &expected_completions)
            .expect("states share one universe");
        if state.uninstalled.is_empty() {
            completed = true;
            break;
        }

        // Frontier evaluation and plan update. Replanning is event-gated;
        // cycles without an event only extend coverage to newly admissible
        // components, never touching existing assignments.
        let front = frontier(&state, array);
        let plan_started = Instant::now();
        let PlanUpdate { plan, infeasible } = if event.is_none() {
            replan_cover(&prev_plan, &front, &config.team, array)
        } else {
            match config.planner_mode {
                PlannerMode::MinimalChange => {
                    replan(&prev_plan, &front, &event, &config.team, array)
                }
                PlannerMode::FullReplanning => replan_full(&front, &config.team, array),
            }
        };
        let planning_time_ms = plan_started.elapsed().as_secs_f64() * 1e3;

        // Tree update: cancelled or reassigned tasks lose their progress.
        for (component, coalition) in &prev_plan.assignments {
            if plan.assignments.get(component) != Some(coalition) {
                world.clear_component_exec(component);
            }
        }
        trees = bt::compile(&plan, &prev_plan, &trees, &config.team);

        // Execution.
        let events_before = world.events.len();
        let violations_before = world.precedence_violations.len();
        let statuses = bt::tick(&trees, &mut world, &durations)
            .expect("compiled trees reference their own barriers");
        expected_completions = world.take_completions();

        // Human intervention between cycles.
        let active: BTreeSet<String> = trees
            .iter()
            .filter_map(|(robot, root)| bt::current_target(root, robot, &world))
            .map(str::to_string)
            .collect();
        let actions = apply_policy(
            &config.policy,
            &mut world,
            array,
            &front,
            &active,
            &mut policy_rng,
        );

        trace.push(TraceRecord {
            iteration,
            raw_uninstalled: raw,
            installed: state.installed.clone(),
            uninstalled: state.uninstalled.clone(),
            event,
            frontier: front,
            plan: plan
                .assignments
                .iter()
                .map(|(c, coalition)| (c.clone(), coalition.robots.iter().cloned().collect()))
                .collect(),
            infeasible,
            statuses,
            human_installed: actions.installed,
            human_removed: actions.removed,
            exec_events: world.events[events_before..].to_vec(),
            precedence_violations: world.precedence_violations[violations_before..].to_vec(),
            planning_time_ms,
        });
        prev_state = state;
        prev_plan = plan;
    }

    let metrics = compute_metrics(&trace, completed);
    (metrics, trace)
}

/// Apply one cycle of the human policy to the ground-truth world.
///
/// Installs always target admissible components of the true world; removals
/// only target components nothing else stands on, so the world stays
/// rule-consistent.
pub fn apply_policy(
    policy: &HumanPolicy,
    world: &mut World,
    array: &ComponentArray,
    _planner_frontier: &BTreeSet<String>,
    active_targets: &BTreeSet<String>,
    rng: &mut ChaCha8Rng,
) -> HumanActions {
    let mut actions = HumanActions::default();
    match policy {
        HumanPolicy::NoIntervention => {}
        HumanPolicy::Random {
            p_event,
            install_frac,
            ..
        } => {
            if rng.gen::<f64>() < *p_event {
                let install = rng.gen::<f64>() < *install_frac;
                if install {
                    if !random_install(world, rng, &mut actions) {
                        random_remove(world, rng, &mut actions);
                    }
                } else if !random_remove(world, rng, &mut actions) {
                    random_install(world, rng, &mut actions);
                }
            }
        }
        HumanPolicy::Adversarial { .. } => {
            if rng.gen::<f64>() < ADVERSARIAL_EVENT_RATE {
                if let Some(target) = adversarial_target(world, array) {
                    actions.removed = world.human_remove(&target);
                }
            }
        }
        HumanPolicy::Cooperative { .. } => {
            let candidates: Vec<String> = world
                .admissible()
                .into_iter()
                .filter(|c| !active_targets.contains(c))
                .collect();
            if !candidates.is_empty() {
                let pick = &candidates[rng.gen_range(0..candidates.len())];
                actions.installed = world.human_install(pick);
            }
        }
    }
    actions
}

fn random_install(world: &mut World, rng: &mut ChaCha8Rng, actions: &mut HumanActions) -> bool {
    let candidates: Vec<String> = world.admissible().into_iter().collect();
    if candidates.is_empty() {
        return false;
    }
    let pick = &candidates[rng.gen_range(0..candidates.len())];
    actions.installed = world.human_install(pick);
    true
}

fn random_remove(world: &mut World, rng: &mut ChaCha8Rng, actions: &mut HumanActions) -> bool {
    let candidates: Vec<String> = world.removable().into_iter().collect();
    if candidates.is_empty() {
        return false;
    }
    let pick = &candidates[rng.gen_range(0..candidates.len())];
    actions.removed = world.human_remove(pick);
    true
}

/// The removable installed component whose removal invalidates the most
/// currently admissible components, ties broken by id.
pub fn adversarial_target(world: &World, array: &ComponentArray) -> Option<String> {
    let admissible = world.admissible();
    let pre = array.prerequisites();
    world
        .removable()
        .into_iter()
        .map(|candidate| {
            // Removable candidates have no outside dependents, so removing
            // one takes out exactly its layer group.
            let removed = world.layer_group_of(&candidate);
            let invalidated = admissible
                .iter()
                .filter(|v| pre[*v].iter().any(|p| removed.contains(p)))
                .count();
            (candidate, invalidated)
        })
        .max_by(|(id_a, score_a), (id_b, score_b)| {
            score_a.cmp(score_b).then_with(|| id_b.cmp(id_a))
        })
        .map(|(id, _)| id)
}

/// Fold a trace into the evaluation metrics. The mean edit distance runs
/// over replanning iterations only and is zero when none occurred; workload
/// deviation is the population standard deviation of per-robot assignment
/// counts, averaged over all iterations.
pub fn compute_metrics(trace: &[TraceRecord], completed: bool) -> MetricsReport {
    let cycles = trace.len() as u64;
    let mut edit_sum = 0.0;
    let mut replan_count = 0usize;
    let mut prev_plan = Plan::empty();
    let mut deviation_sum = 0.0;
    let mut time_sum = 0.0;
    for record in trace {
        let plan = plan_from_record(record);
        if record.event.kind == crate::state::EventKind::Detected {
            edit_sum += edit_distance(&plan, &prev_plan) as f64;
            replan_count += 1;
        }
        let robots: Vec<&String> = record.statuses.keys().collect();
        if !robots.is_empty() {
            let counts: Vec<f64> = robots
                .iter()
                .map(|r| {
                    record
                        .plan
                        .values()
                        .filter(|coalition| coalition.contains(*r))
                        .count() as f64
                })
                .collect();
            let mean = counts.iter().sum::<f64>() / counts.len() as f64;
            let variance =
                counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / counts.len() as f64;
            deviation_sum += variance.sqrt();
        }
        time_sum += record.planning_time_ms;
        prev_plan = plan;
    }
    let mean_edit_distance = if replan_count == 0 {
        0.0
    } else {
        edit_sum / replan_count as f64
    };
    let (mean_workload_deviation, mean_planning_time_ms) = if trace.is_empty() {
        (0.0, 0.0)
    } else {
        (
            deviation_sum / trace.len() as f64,
            time_sum / trace.len() as f64,
        )
    };
    MetricsReport {
        cycles,
        mean_planning_time_ms,
        mean_edit_distance,
        mean_workload_deviation,
        completed,
    }
}

fn plan_from_record(record: &TraceRecord) -> Plan {
    Plan {
        assignments: record
            .plan
            .iter()
            .map(|(c, robots)| (c.clone(), Coalition::of(robots.iter().cloned())))
            .collect(),
        frontier: record.frontier.clone(),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunRow {
    pub scenario_id: String,
    pub seed: u64,
    pub metrics: MetricsReport,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Stats {
    pub mean: f64,
    pub median: f64,
    pub stddev: f64,
}

pub fn stats(values: &[f64]) -> Stats {
    if values.is_empty() {
        return Stats {
            mean: 0.0,
            median: 0.0,
            stddev: 0.0,
        };
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let variance = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / values.len() as f64;
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mid = sorted.len() / 2;
    let median = if sorted.len() % 2 == 1 {
        sorted[mid]
    } else {
        (sorted[mid - 1] + sorted[mid]) / 2.0
    };
    Stats {
        mean,
        median,
        stddev: variance.sqrt(),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AggregateRow {
    pub scenario_id: String,
    pub seeds: usize,
    pub completed_runs: usize,
    pub cycles: Stats,
    pub time_ms: Stats,
    pub edit_distance: Stats,
    pub workload_deviation: Stats,
}

#[derive(Debug, Clone, Serialize)]
pub struct BatchResult {
    pub runs: Vec<RunRow>,
    pub aggregates: Vec<AggregateRow>,
}

/// Run every scenario template over every seed. Scenarios share nothing
/// mutable, so runs execute in parallel; row order follows config order.
pub fn run_batch(
    templates: &[ScenarioConfig],
    seeds: &[u64],
    array: &ComponentArray,
) -> BatchResult {
    let jobs: Vec<(usize, ScenarioConfig)> = templates
        .iter()
        .enumerate()
        .flat_map(|(i, template)| {
            seeds
                .iter()
                .map(move |seed| (i, template.clone().with_seed(*seed)))
        })
        .collect();
    let runs: Vec<RunRow> = jobs
        .par_iter()
        .map(|(_, config)| {
            let (metrics, _) = run_scenario(config, array);
            RunRow {
                scenario_id: config.scenario_id.clone(),
                seed: config.seed,
                metrics,
            }
        })
        .collect();

    let aggregates = templates
        .iter()
        .map(|template| {
            let rows: Vec<&RunRow> = runs
                .iter()
                .filter(|r| r.scenario_id == template.scenario_id)
                .collect();
            let pick = |f: fn(&MetricsReport) -> f64| -> Vec<f64> {
                rows.iter().map(|r| f(&r.metrics)).collect()
            };
            AggregateRow {
                scenario_id: template.scenario_id.clone(),
                seeds: rows.len(),
                completed_runs: rows.iter().filter(|r| r.metrics.completed).count(),
                cycles: stats(&pick(|m| m.cycles as f64)),
                time_ms: stats(&pick(|m| m.mean_planning_time_ms)),
                edit_distance: stats(&pick(|m| m.mean_edit_distance)),
                workload_deviation: stats(&pick(|m| m.mean_workload_deviation)),
            }
        })
        .collect();
    BatchResult { runs, aggregates }
}

/// Newline-delimited JSON, one record per iteration.
pub fn trace_to_jsonl(trace: &[TraceRecord]) -> String {
    let mut out = String::new();
    for record in trace {
        out.push_str(&serde_json::to_string(record).expect("trace serializes"));
        out.push('\n');
    }
    out
}

/// Per-run table with the fixed column order.
pub fn runs_csv(rows: &[RunRow]) -> String {
    let mut out =
        String::from("scenario,seed,cycles,time_ms,edit_distance,workload_deviation,completed\n");
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{:.6},{:.4},{:.4},{}\n",
            row.scenario_id,
            row.seed,
            row.metrics.cycles,
            row.metrics.mean_planning_time_ms,
            row.metrics.mean_edit_distance,
            row.metrics.mean_workload_deviation,
            row.metrics.completed
        ));
    }
    out
}

/// Aggregate table, one row per scenario.
pub fn aggregate_csv(rows: &[AggregateRow]) -> String {
    let mut out = String::from(
        "scenario,seeds,completed_runs,cycles_mean,cycles_median,cycles_stddev,\
         time_ms_mean,edit_distance_mean,edit_distance_median,workload_deviation_mean\n",
    );
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{:.2},{:.2},{:.2},{:.6},{:.4},{:.4},{:.4}\n",
            row.scenario_id,
            row.seeds,
            row.completed_runs,
            row.cycles.mean,
            row.cycles.median,
            row.cycles.stddev,
            row.time_ms.mean,
            row.edit_distance.mean,
            row.edit_distance.median,
            row.workload_deviation.mean
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::perception::PerfectEstimator;
    use crate::scenarios;
    use crate::state::EventKind;

    fn s1(seed: u64) -> ScenarioConfig {
        scenarios::builtin("s1", seed).unwrap()
    }

    #[test]
    fn no_intervention_run_completes_with_zero_edit_distance() {
        let array = fixtures::timber27_array();
        let (metrics, trace) = run_scenario(&s1(3), &array);
        assert!(metrics.completed);
        assert_eq!(metrics.mean_edit_distance, 0.0);
        // Every component ends up installed by a robot.
        let installed: BTreeSet<String> = trace
            .iter()
            .flat_map(|r| r.exec_events.iter())
            .filter_map(|e| match e {
                ExecEvent::RobotInstalled { component, .. } => Some(component.clone()),
                _ => None,
            })
            .collect();
        assert_eq!(installed, array.component_ids());
        // No events ever fire without a human.
        assert!(trace.iter().all(|r| r.event.kind == EventKind::None));
    }

    #[test]
    fn full_replanning_under_adversary_reassigns_tasks() {
        let array = fixtures::timber27_array();
        let seeds: Vec<u64> = (0..6).collect();
        let batch = run_batch(&[scenarios::builtin("s6", 0).unwrap()], &seeds, &array);
        assert!(batch.runs.iter().all(|r| r.metrics.completed));
        let mean_edit = batch.aggregates[0].edit_distance.mean;
        assert!(mean_edit > 0.0, "edit {mean_edit}");
    }

    #[test]
    fn solo_run_makes_progress_every_task_chain_length() {
        // With zero noise and no humans, the uninstalled set shrinks at
        // least once per task-chain duration (cooperative chain: Move,
        // CoPick, barrier, CoInstall = 4 working ticks plus one idle
        // observation cycle at the start).
        let array = fixtures::timber27_array();
        let (_, trace) = run_scenario(&s1(0), &array);
        let window = 5;
        let sizes: Vec<usize> = trace.iter().map(|r| r.uninstalled.len()).collect();
        for pair in sizes.windows(window + 1) {
            assert!(
                pair[window] < pair[0],
                "no progress across {window} cycles: {pair:?}"
            );
        }
    }

    #[test]
    fn cycle_cap_yields_incomplete_run_with_one_record() {
        let array = fixtures::timber27_array();
        let mut config = s1(3);
        config.max_cycles = 1;
        let (metrics, trace) = run_scenario(&config, &array);
        assert!(!metrics.completed);
        assert_eq!(trace.len(), 1);
        assert_eq!(metrics.cycles, 1);
    }

    fn strip_time(mut m: MetricsReport) -> MetricsReport {
        m.mean_planning_time_ms = 0.0;
        m
    }

    #[test]
    fn zero_noise_loop_equals_perfect_estimator_loop() {
        let array = fixtures::timber27_array();
        let config = s1(9);
        let (m1, t1) = run_scenario(&config, &array);
        let (m2, t2) = run_scenario_with(&config, &array, &PerfectEstimator);
        assert_eq!(strip_time(m1), strip_time(m2));
        assert_eq!(trace_to_jsonl(&t1), trace_to_jsonl(&t2));
    }

    #[test]
    fn no_intervention_policy_is_inert() {
        let array = fixtures::timber27_array();
        let mut world = World::new(&array);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..50 {
            let actions = apply_policy(
                &HumanPolicy::NoIntervention,
                &mut world,
                &array,
                &BTreeSet::new(),
                &BTreeSet::new(),
                &mut rng,
            );
            assert!(actions.is_empty());
        }
    }

    #[test]
    fn cooperative_installs_exactly_one_untargeted_component() {
        let array = fixtures::timber27_array();
        let mut world = World::new(&array);
        world.human_install("bottom_plate");
        let active = BTreeSet::from(["stud_1".to_string()]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let actions = apply_policy(
            &HumanPolicy::Cooperative { seed: 1 },
            &mut world,
            &array,
            &BTreeSet::new(),
            &active,
            &mut rng,
        );
        assert_eq!(actions.installed.len(), 1);
        assert!(actions.removed.is_empty());
        let picked = actions.installed.iter().next().unwrap();
        assert_ne!(picked, "stud_1");
        assert!(world.installed.contains(picked));
    }

    #[test]
    fn adversary_picks_the_most_invalidating_removal() {
        let array = fixtures::timber27_array();
        let mut world = World::new(&array);
        // Build up to the point where the sill is next: the trimmers and
        // cripples below it are removable leaves with different impact.
        for id in [
            "bottom_plate",
            "window_1_trimmer_left_down",
            "window_1_trimmer_right_down",
            "window_1_cripple_down_1",
            "window_1_cripple_down_2",
            "stud_1",
        ] {
            world.human_install(id);
        }
        let chosen = adversarial_target(&world, &array).unwrap();

        // Exhaustive scoring oracle over the removable installed set.
        let admissible = world.admissible();
        let pre = array.prerequisites();
        let mut best: Option<(usize, String)> = None;
        for candidate in world.removable() {
            let mut probe = world.clone();
            let removed = probe.human_remove(&candidate);
            let score = admissible
                .iter()
                .filter(|v| pre[*v].iter().any(|p| removed.contains(p)))
                .count();
            let better = match &best {
                None => true,
                Some((s, id)) => score > *s || (score == *s && candidate < *id),
            };
            if better {
                best = Some((score, candidate));
            }
        }
        assert_eq!(chosen, best.unwrap().1);
    }

    #[test]
    fn workload_deviation_matches_hand_computed_values() {
        let balanced = TraceRecord {
            iteration: 0,
            raw_uninstalled: BTreeSet::new(),
            installed: BTreeSet::new(),
            uninstalled: BTreeSet::new(),
            event: InterventionEvent::none(),
            frontier: BTreeSet::from(["a".to_string(), "b".to_string()]),
            plan: BTreeMap::from([
                ("a".to_string(), vec!["r1".to_string()]),
                ("b".to_string(), vec!["r2".to_string()]),
            ]),
            infeasible: BTreeSet::new(),
            statuses: BTreeMap::from([
                ("r1".to_string(), TickStatus::Running),
                ("r2".to_string(), TickStatus::Running),
            ]),
            human_installed: BTreeSet::new(),
            human_removed: BTreeSet::new(),
            exec_events: Vec::new(),
            precedence_violations: Vec::new(),
            planning_time_ms: 0.0,
        };
        let metrics = compute_metrics(std::slice::from_ref(&balanced), false);
        assert_eq!(metrics.mean_workload_deviation, 0.0);
        assert_eq!(metrics.mean_edit_distance, 0.0);

        // Counts (3, 1): mean 2, deviations +/-1, population std 1.0.
        let mut skewed = balanced;
        skewed.frontier = ["a", "b", "c", "d"].iter().map(|s| s.to_string()).collect();
        skewed.plan = BTreeMap::from([
            ("a".to_string(), vec!["r1".to_string()]),
            ("b".to_string(), vec!["r1".to_string()]),
            ("c".to_string(), vec!["r1".to_string()]),
            ("d".to_string(), vec!["r2".to_string()]),
        ]);
        let metrics = compute_metrics(&[skewed], false);
        assert!((metrics.mean_workload_deviation - 1.0).abs() < 1e-12);
    }

    #[test]
    fn batch_is_deterministic_and_matches_single_runs() {
        let array = fixtures::timber27_array();
        let templates = vec![s1(0)];
        let batch_a = run_batch(&templates, &[4], &array);
        let batch_b = run_batch(&templates, &[4], &array);
        assert_eq!(
            strip_time(batch_a.runs[0].metrics.clone()),
            strip_time(batch_b.runs[0].metrics.clone())
        );
        let (metrics, _) = run_scenario(&s1(0).with_seed(4), &array);
        assert_eq!(
            strip_time(batch_a.runs[0].metrics.clone()),
            strip_time(metrics)
        );
    }

    #[test]
    fn cycle_medians_order_by_policy_helpfulness() {
        let array = fixtures::timber27_array();
        let seeds: Vec<u64> = (0..8).collect();
        let batch = run_batch(
            &[
                scenarios::builtin("s1", 0).unwrap(),
                scenarios::builtin("s5", 0).unwrap(),
                scenarios::builtin("s7", 0).unwrap(),
            ],
            &seeds,
            &array,
        );
        let s1_median = batch.aggregates[0].cycles.median;
        let s5_median = batch.aggregates[1].cycles.median;
        let s7_median = batch.aggregates[2].cycles.median;
        assert!(s7_median < s1_median, "s7 {s7_median} vs s1 {s1_median}");
        assert!(s5_median > s1_median, "s5 {s5_median} vs s1 {s1_median}");
    }

    #[test]
    fn noisy_estimation_still_completes_the_assembly() {
        let array = fixtures::timber27_array();
        let mut config = s1(5);
        config.noise.false_install_rate = 0.02;
        config.noise.false_missing_rate = 0.05;
        let (metrics, trace) = run_scenario(&config, &array);
        assert!(metrics.completed, "cycles {}", metrics.cycles);
        // Phantom state changes surface as detected events.
        assert!(trace.iter().any(|r| r.event.kind == EventKind::Detected));
    }
}
