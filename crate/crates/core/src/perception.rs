//! State-estimator interface standing in for the perception stack, with a
//! seeded noise model over the true symbolic state.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::state::SymbolicState;

/// Independent per-component corruption rates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    /// Probability an uninstalled component is reported installed.
    pub false_install_rate: f64,
    /// Probability an installed component is reported uninstalled.
    pub false_missing_rate: f64,
    pub seed: u64,
}

impl NoiseModel {
    pub fn noiseless(seed: u64) -> Self {
        Self {
            false_install_rate: 0.0,
            false_missing_rate: 0.0,
            seed,
        }
    }
}

/// Produces the raw uninstalled set an external perception system would.
pub trait StateEstimator {
    fn estimate(&self, true_state: &SymbolicState, iteration: u64) -> BTreeSet<String>;
}

/// Reports the true state verbatim.
#[derive(Debug, Default, Clone, Copy)]
pub struct PerfectEstimator;

impl StateEstimator for PerfectEstimator {
    fn estimate(&self, true_state: &SymbolicState, _iteration: u64) -> BTreeSet<String> {
        true_state.uninstalled.clone()
    }
}

/// Corrupt the raw uninstalled set: installed ids flip into it with the
/// false-missing rate, uninstalled ids drop out with the false-install rate.
/// The stream is a pure function of (seed, iteration).
pub fn estimate(
    true_state: &SymbolicState,
    model: &NoiseModel,
    iteration: u64,
) -> BTreeSet<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(model.seed);
    rng.set_stream(iteration);
    let mut raw = BTreeSet::new();
    for id in &true_state.installed {
        if rng.gen::<f64>() < model.false_missing_rate {
            raw.insert(id.clone());
        }
    }
    for id in &true_state.uninstalled {
        if rng.gen::<f64>() >= model.false_install_rate {
            raw.insert(id.clone());
        }
    }
    raw
}

#[derive(Debug, Clone, Copy)]
pub struct NoisyEstimator {
    pub model: NoiseModel,
}

impl StateEstimator for NoisyEstimator {
    fn estimate(&self, true_state: &SymbolicState, iteration: u64) -> BTreeSet<String> {
        estimate(true_state, &self.model, iteration)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn split_state(n_installed: usize, n_total: usize) -> SymbolicState {
        let ids: BTreeSet<String> = (0..n_total).map(|i| format!("c{i:02}")).collect();
        let uninstalled = ids.iter().skip(n_installed).cloned().collect();
        SymbolicState::from_uninstalled(&ids, uninstalled)
    }

    #[test]
    fn zero_rates_reproduce_the_true_set() {
        let state = split_state(13, 27);
        let raw = estimate(&state, &NoiseModel::noiseless(9), 3);
        assert_eq!(raw, state.uninstalled);
    }

    #[test]
    fn total_rates_invert_the_state() {
        let state = split_state(13, 27);
        let model = NoiseModel {
            false_install_rate: 1.0,
            false_missing_rate: 1.0,
            seed: 9,
        };
        let raw = estimate(&state, &model, 0);
        assert_eq!(raw, state.installed);
    }

    #[test]
    fn flip_frequency_tracks_the_rates() {
        let state = split_state(13, 27);
        let model = NoiseModel {
            false_install_rate: 0.1,
            false_missing_rate: 0.1,
            seed: 42,
        };
        let draws = 10_000u64;
        let mut missing_flips = 0usize;
        let mut install_flips = 0usize;
        for iteration in 0..draws {
            let raw = estimate(&state, &model, iteration);
            missing_flips += state
                .installed
                .iter()
                .filter(|id| raw.contains(*id))
                .count();
            install_flips += state
                .uninstalled
                .iter()
                .filter(|id| !raw.contains(*id))
                .count();
        }
        let missing_rate = missing_flips as f64 / (draws as f64 * state.installed.len() as f64);
        let install_rate = install_flips as f64 / (draws as f64 * state.uninstalled.len() as f64);
        assert!(
            (missing_rate - 0.1).abs() < 0.01,
            "missing rate {missing_rate}"
        );
        assert!(
            (install_rate - 0.1).abs() < 0.01,
            "install rate {install_rate}"
        );
    }

    #[test]
    fn identical_inputs_give_identical_output() {
        let state = split_state(10, 27);
        let model = NoiseModel {
            false_install_rate: 0.3,
            false_missing_rate: 0.2,
            seed: 7,
        };
        assert_eq!(estimate(&state, &model, 11), estimate(&state, &model, 11));
        assert_ne!(estimate(&state, &model, 11), estimate(&state, &model, 12));
    }
}
