//! Named configurations for every reported experiment.

use qrl_core::baseline::OutputHead;
use qrl_core::dqn::{DecaySchedule, LossMode};
use qrl_core::envs::EnvKind;

use crate::config::{ExperimentConfig, InputWeightLayout, ModelKind, SCHEMA_VERSION};
use crate::error::{HarnessError, Result};
use crate::experiment::CurveBundle;

pub const PRESET_NAMES: [&str; 13] = [
    "fl-depth-5",
    "fl-depth-10",
    "fl-depth-15",
    "cp-full",
    "cp-no-reupload",
    "cp-input-only-unit",
    "cp-input-only-90",
    "cp-input-only-180",
    "cp-output-only",
    "nn-57",
    "nn-167",
    "nn-167-softmax",
    "cp-full-per-layer",
];

pub const DEFAULT_SEEDS: std::ops::Range<u64> = 0..10;

fn frozen_lake(name: &str, layers: usize) -> ExperimentConfig {
    ExperimentConfig {
        schema_version: SCHEMA_VERSION,
        name: name.to_string(),
        environment: EnvKind::FrozenLake,
        model: ModelKind::Pqc,
        episodes: 1000,
        seeds: DEFAULT_SEEDS.collect(),
        gamma: 0.8,
        eta: 0.001,
        batch_size: 11,
        epsilon_init: 1.0,
        epsilon_dec: 0.99,
        epsilon_min: 0.01,
        update_model: 5,
        update_target_model: 10,
        replay_memory: 10_000,
        qubits: Some(4),
        layers: Some(layers),
        data_reuploading: Some(false),
        train_w_d: Some(false),
        train_w_o: Some(false),
        eta_w_d: None,
        eta_w_o: None,
        input_weights: None,
        output_factor: None,
        hidden_units: None,
        output_head: None,
        loss: LossMode::Squared,
        epsilon_decay: DecaySchedule::PerEpisode,
        cap_is_terminal: true,
        track_mae: true,
    }
}

fn cart_pole_pqc(name: &str) -> ExperimentConfig {
    ExperimentConfig {
        schema_version: SCHEMA_VERSION,
        name: name.to_string(),
        environment: EnvKind::CartPole,
        model: ModelKind::Pqc,
        episodes: 5000,
        seeds: DEFAULT_SEEDS.collect(),
        gamma: 0.99,
        eta: 0.001,
        batch_size: 16,
        epsilon_init: 1.0,
        epsilon_dec: 0.99,
        epsilon_min: 0.01,
        update_model: 10,
        update_target_model: 30,
        replay_memory: 10_000,
        qubits: Some(4),
        layers: Some(5),
        data_reuploading: Some(true),
        train_w_d: Some(true),
        train_w_o: Some(true),
        eta_w_d: Some(0.001),
        eta_w_o: Some(0.1),
        input_weights: Some(InputWeightLayout::Shared),
        output_factor: None,
        hidden_units: None,
        output_head: None,
        loss: LossMode::Absolute,
        epsilon_decay: DecaySchedule::PerEpisode,
        cap_is_terminal: true,
        track_mae: false,
    }
}

fn input_only(name: &str, factor: Option<f64>) -> ExperimentConfig {
    ExperimentConfig {
        train_w_o: Some(false),
        eta_w_o: None,
        output_factor: factor,
        ..cart_pole_pqc(name)
    }
}

fn network(name: &str, hidden: &[usize], head: OutputHead) -> ExperimentConfig {
    ExperimentConfig {
        schema_version: SCHEMA_VERSION,
        name: name.to_string(),
        environment: EnvKind::CartPole,
        model: ModelKind::Nn,
        episodes: 5000,
        seeds: DEFAULT_SEEDS.collect(),
        gamma: 0.99,
        eta: 0.01,
        batch_size: 16,
        epsilon_init: 1.0,
        epsilon_dec: 0.99,
        epsilon_min: 0.01,
        update_model: 5,
        update_target_model: 10,
        replay_memory: 10_000,
        qubits: None,
        layers: None,
        data_reuploading: None,
        train_w_d: None,
        train_w_o: None,
        eta_w_d: None,
        eta_w_o: None,
        input_weights: None,
        output_factor: None,
        hidden_units: Some(hidden.to_vec()),
        output_head: Some(head),
        loss: LossMode::Absolute,
        epsilon_decay: DecaySchedule::PerEpisode,
        cap_is_terminal: true,
        track_mae: false,
    }
}

pub fn preset(name: &str) -> Result<ExperimentConfig> {
    let config = match name {
        "fl-depth-5" => frozen_lake(name, 5),
        "fl-depth-10" => frozen_lake(name, 10),
        "fl-depth-15" => frozen_lake(name, 15),
        "cp-full" => cart_pole_pqc(name),
        "cp-full-per-layer" => ExperimentConfig {
            input_weights: Some(InputWeightLayout::PerLayer),
            ..cart_pole_pqc(name)
        },
        "cp-no-reupload" => ExperimentConfig {
            data_reuploading: Some(false),
            ..cart_pole_pqc(name)
        },
        "cp-input-only-unit" => input_only(name, None),
        "cp-input-only-90" => input_only(name, Some(90.0)),
        "cp-input-only-180" => input_only(name, Some(180.0)),
        "cp-output-only" => ExperimentConfig {
            train_w_d: Some(false),
            eta_w_d: None,
            input_weights: None,
            ..cart_pole_pqc(name)
        },
        "nn-57" => network(name, &[4, 5], OutputHead::Linear),
        "nn-167" => network(name, &[9, 10], OutputHead::Linear),
        "nn-167-softmax" => network(name, &[9, 10], OutputHead::Softmax),
        _ => return Err(HarnessError::UnknownPreset(name.to_string())),
    };
    Ok(config)
}

/// Population-level outcome a preset is expected to reach with its default
/// seeds, checked by `qrl run --assert`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Expectation {
    /// At least `seeds` runs solve within the first `within` episodes.
    MinSolved { seeds: usize, within: usize },
    /// No run solves within the first `within` episodes.
    NoneSolved { within: usize },
    /// Seed-averaged mean score of episodes `at - 99..=at` stays below `bound`.
    TrailingMeanBelow { bound: f64, at: usize },
}

impl Expectation {
    /// Episodes a run needs for the check to be meaningful.
    pub fn horizon(&self) -> usize {
        match *self {
            Expectation::MinSolved { within, .. } | Expectation::NoneSolved { within } => within,
            Expectation::TrailingMeanBelow { at, .. } => at,
        }
    }

    /// Whether the bundle meets the expectation, with a one-line summary.
    pub fn evaluate(&self, bundle: &CurveBundle) -> (bool, String) {
        match *self {
            Expectation::MinSolved { seeds, within } => {
                let n = bundle.solved_within(within);
                (
                    n >= seeds,
                    format!("{n}/{} seeds solved within {within} episodes (need {seeds})", bundle.seeds.len()),
                )
            }
            Expectation::NoneSolved { within } => {
                let n = bundle.solved_within(within);
                (n == 0, format!("{n}/{} seeds solved within {within} episodes (need 0)", bundle.seeds.len()))
            }
            Expectation::TrailingMeanBelow { bound, at } => {
                let mean = bundle.trailing_mean_at(at, 100);
                (mean < bound, format!("trailing-100 mean {mean:.2} at episode {at} (need < {bound})"))
            }
        }
    }
}

pub fn expectation(name: &str) -> Option<Expectation> {
    match name {
        "fl-depth-5" | "fl-depth-10" | "fl-depth-15" => Some(Expectation::MinSolved {
            seeds: 9,
            within: 1000,
        }),
        "cp-full" => Some(Expectation::MinSolved {
            seeds: 8,
            within: 3000,
        }),
        "cp-input-only-unit" | "cp-input-only-180" => Some(Expectation::TrailingMeanBelow {
            bound: 50.0,
            at: 1000,
        }),
        "nn-167-softmax" => Some(Expectation::NoneSolved { within: 3000 }),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_builds() {
        for name in PRESET_NAMES {
            let config = preset(name).unwrap();
            assert_eq!(config.name, name);
            config.dqn_config(0).unwrap();
        }
        assert!(matches!(preset("cp-nope"), Err(HarnessError::UnknownPreset(_))));
    }

    #[test]
    fn parameter_counts() {
        let count = |name| preset(name).unwrap().param_count().unwrap();
        assert_eq!(count("cp-full"), 46);
        assert_eq!(count("cp-full-per-layer"), 62);
        assert_eq!(count("cp-output-only"), 42);
        assert_eq!(count("cp-input-only-unit"), 44);
        assert_eq!(count("fl-depth-5"), 40);
        assert_eq!(count("fl-depth-15"), 120);
        assert_eq!(count("nn-57"), 57);
        assert_eq!(count("nn-167"), 167);
        assert_eq!(count("nn-167-softmax"), 167);
    }
}
