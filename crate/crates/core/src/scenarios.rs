//! Built-in study configurations: the three robot teams and the seven
//! scenario rows combining teams, human policies, and planner modes.

use crate::perception::NoiseModel;
use crate::planner::RobotProfile;
use crate::sim::{HumanPolicy, PlannerMode, ScenarioConfig};

/// Default event rate of the random human policy.
pub const RANDOM_P_EVENT: f64 = 0.15;
/// Fraction of random events that install rather than remove.
pub const RANDOM_INSTALL_FRAC: f64 = 0.7;
pub const DEFAULT_MAX_CYCLES: u32 = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TeamKind {
    Homogeneous,
    Heterogeneous,
    Scalable,
}

impl TeamKind {
    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "homogeneous" => Some(Self::Homogeneous),
            "heterogeneous" => Some(Self::Heterogeneous),
            "scalable" => Some(Self::Scalable),
            _ => None,
        }
    }
}

/// Robot team presets: two 11 kg cobots, a 15/6 kg asymmetric pair, or
/// three 9 kg cobots.
pub fn team(kind: TeamKind) -> Vec<RobotProfile> {
    match kind {
        TeamKind::Homogeneous => vec![
            RobotProfile::new("cobot_1", 11.0),
            RobotProfile::new("cobot_2", 11.0),
        ],
        TeamKind::Heterogeneous => vec![
            RobotProfile::new("cobot_1", 15.0),
            RobotProfile::new("cobot_2", 6.0),
        ],
        TeamKind::Scalable => vec![
            RobotProfile::new("cobot_1", 9.0),
            RobotProfile::new("cobot_2", 9.0),
            RobotProfile::new("cobot_3", 9.0),
        ],
    }
}

pub fn random_policy() -> HumanPolicy {
    HumanPolicy::Random {
        p_event: RANDOM_P_EVENT,
        install_frac: RANDOM_INSTALL_FRAC,
        seed: 0,
    }
}

pub const SCENARIO_IDS: [&str; 7] = ["s1", "s2", "s3", "s4", "s5", "s6", "s7"];

/// The built-in scenario table keyed on a master seed.
pub fn builtin(id: &str, seed: u64) -> Option<ScenarioConfig> {
    let (team_kind, policy, mode) = match id {
        "s1" => (
            TeamKind::Homogeneous,
            HumanPolicy::NoIntervention,
            PlannerMode::MinimalChange,
        ),
        "s2" => (
            TeamKind::Homogeneous,
            random_policy(),
            PlannerMode::MinimalChange,
        ),
        "s3" => (
            TeamKind::Heterogeneous,
            random_policy(),
            PlannerMode::MinimalChange,
        ),
        "s4" => (
            TeamKind::Scalable,
            random_policy(),
            PlannerMode::MinimalChange,
        ),
        "s5" => (
            TeamKind::Homogeneous,
            HumanPolicy::Adversarial { seed: 0 },
            PlannerMode::MinimalChange,
        ),
        "s6" => (
            TeamKind::Homogeneous,
            HumanPolicy::Adversarial { seed: 0 },
            PlannerMode::FullReplanning,
        ),
        "s7" => (
            TeamKind::Homogeneous,
            HumanPolicy::Cooperative { seed: 0 },
            PlannerMode::MinimalChange,
        ),
        _ => return None,
    };
    let config = ScenarioConfig {
        scenario_id: id.to_string(),
        team: team(team_kind),
        policy,
        planner_mode: mode,
        seed: 0,
        noise: NoiseModel::noiseless(0),
        max_cycles: DEFAULT_MAX_CYCLES,
    };
    Some(config.with_seed(seed))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_seven_scenarios_exist() {
        for id in SCENARIO_IDS {
            let config = builtin(id, 1).expect(id);
            assert_eq!(config.scenario_id, id);
            assert!(!config.team.is_empty());
        }
        assert!(builtin("s8", 1).is_none());
    }

    #[test]
    fn scenario_rows_match_the_study_table() {
        assert_eq!(
            builtin("s3", 0).unwrap().team,
            team(TeamKind::Heterogeneous)
        );
        assert_eq!(builtin("s4", 0).unwrap().team.len(), 3);
        assert!(matches!(
            builtin("s5", 0).unwrap().policy,
            HumanPolicy::Adversarial { .. }
        ));
        assert_eq!(
            builtin("s6", 0).unwrap().planner_mode,
            PlannerMode::FullReplanning
        );
        assert_eq!(
            builtin("s5", 0).unwrap().planner_mode,
            PlannerMode::MinimalChange
        );
        assert!(matches!(
            builtin("s7", 0).unwrap().policy,
            HumanPolicy::Cooperative { .. }
        ));
    }

    #[test]
    fn seeding_rekeys_policy_and_noise_streams() {
        let a = builtin("s2", 5).unwrap();
        let b = builtin("s2", 6).unwrap();
        assert_ne!(a.noise.seed, b.noise.seed);
        assert_ne!(a.seed, b.seed);
    }
}
