//! Flat TOML experiment files.
//!
//! Keys follow the hyperparameter names of the published tables (`batch size`,
//! `update target model`, `train w_d`, ...). Greek symbols are spelled out
//! (`gamma`, `eta`, `eta_w_d`, `epsilon_init`). Keys that only make sense for
//! one model family are omitted for the other.

use std::path::Path;

use qrl_core::baseline::{MlpConfig, OutputHead};
use qrl_core::dqn::{AdamHyper, DecaySchedule, DqnConfig, LearningRates, LossMode, ModelConfig};
use qrl_core::envs::EnvKind;
use qrl_core::qmodel::{
    AnsatzConfig, EncoderConfig, InputWeights, ObservableSet, OutputScaling, PqcConfig, Readout,
};
use qrl_core::replay::EpsilonSchedule;
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Pqc,
    Nn,
}

/// Layout of trainable input weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputWeightLayout {
    Shared,
    PerLayer,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub name: String,
    pub environment: EnvKind,
    pub model: ModelKind,
    pub episodes: usize,
    pub seeds: Vec<u64>,

    pub gamma: f64,
    pub eta: f64,
    #[serde(rename = "batch size")]
    pub batch_size: usize,
    pub epsilon_init: f64,
    pub epsilon_dec: f64,
    pub epsilon_min: f64,
    #[serde(rename = "update model")]
    pub update_model: usize,
    #[serde(rename = "update target model")]
    pub update_target_model: usize,
    #[serde(rename = "size of replay memory")]
    pub replay_memory: usize,

    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qubits: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layers: Option<usize>,
    #[serde(rename = "data re-uploading", default, skip_serializing_if = "Option::is_none")]
    pub data_reuploading: Option<bool>,
    #[serde(rename = "train w_d", default, skip_serializing_if = "Option::is_none")]
    pub train_w_d: Option<bool>,
    #[serde(rename = "train w_o", default, skip_serializing_if = "Option::is_none")]
    pub train_w_o: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta_w_d: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta_w_o: Option<f64>,
    /// Layout of the input weights when `train w_d` is set.
    #[serde(rename = "input weights", default, skip_serializing_if = "Option::is_none")]
    pub input_weights: Option<InputWeightLayout>,
    /// Fixed multiplier on the rescaled expectation when `train w_o` is off.
    #[serde(rename = "output factor", default, skip_serializing_if = "Option::is_none")]
    pub output_factor: Option<f64>,

    #[serde(rename = "hidden units", default, skip_serializing_if = "Option::is_none")]
    pub hidden_units: Option<Vec<usize>>,
    #[serde(rename = "output head", default, skip_serializing_if = "Option::is_none")]
    pub output_head: Option<OutputHead>,

    pub loss: LossMode,
    #[serde(rename = "epsilon decay")]
    pub epsilon_decay: DecaySchedule,
    #[serde(rename = "cap is terminal")]
    pub cap_is_terminal: bool,
    #[serde(rename = "track mae")]
    pub track_mae: bool,
}

fn missing(key: &str) -> HarnessError {
    HarnessError::Config(format!("missing key `{key}`"))
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: ExperimentConfig =
            toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        config.check()?;
        Ok(config)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            HarnessError::Config(msg) => HarnessError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_toml()?).map_err(|e| HarnessError::io(path, e))
    }

    pub fn check(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(HarnessError::Config(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if self.episodes == 0 {
            return Err(HarnessError::Config("`episodes` must be positive".into()));
        }
        if self.seeds.is_empty() {
            return Err(HarnessError::Config("`seeds` is empty".into()));
        }
        self.dqn_config(self.seeds[0])?;
        Ok(())
    }

    /// Function approximator described by the model-specific keys.
    pub fn model_config(&self) -> Result<ModelConfig> {
        match self.model {
            ModelKind::Pqc => {
                let qubits = self.qubits.ok_or_else(|| missing("qubits"))?;
                let layers = self.layers.ok_or_else(|| missing("layers"))?;
                let reupload = self.data_reuploading.unwrap_or(false);
                let train_w_d = self.train_w_d.unwrap_or(false);
                let train_w_o = self.train_w_o.unwrap_or(false);
                let (encoder, readout) = match self.environment {
                    EnvKind::FrozenLake => {
                        if train_w_d || reupload {
                            return Err(HarnessError::Config(
                                "basis encoding has no input weights or re-uploading".into(),
                            ));
                        }
                        (EncoderConfig::Basis, Readout::PerQubitZ)
                    }
                    EnvKind::CartPole => {
                        let input_weights = match (train_w_d, self.input_weights) {
                            (false, _) => InputWeights::Fixed,
                            (true, Some(InputWeightLayout::PerLayer)) => InputWeights::PerLayer,
                            (true, _) => InputWeights::Shared,
                        };
                        (
                            EncoderConfig::ContinuousArctan { input_weights },
                            Readout::PairedZZ,
                        )
                    }
                };
                let scaling = match (train_w_o, self.output_factor) {
                    (true, _) => OutputScaling::TrainableOutputWeight,
                    (false, None) => OutputScaling::FixedUnit,
                    (false, Some(c)) => OutputScaling::FixedFactor(c),
                };
                let config = PqcConfig {
                    ansatz: AnsatzConfig::new(qubits, layers, reupload),
                    encoder,
                    readout: ObservableSet::from_readout(readout, qubits, scaling),
                };
                config.validate()?;
                Ok(ModelConfig::Pqc(config))
            }
            ModelKind::Nn => {
                let hidden = self.hidden_units.clone().ok_or_else(|| missing("hidden units"))?;
                let (inputs, outputs) = match self.environment {
                    EnvKind::CartPole => (4, 2),
                    EnvKind::FrozenLake => {
                        return Err(HarnessError::Config(
                            "dense networks are only set up for cart pole".into(),
                        ))
                    }
                };
                let mut sizes = vec![inputs];
                sizes.extend(hidden);
                sizes.push(outputs);
                let config = MlpConfig::new(sizes, self.output_head.unwrap_or_default());
                config.validate()?;
                Ok(ModelConfig::Mlp(config))
            }
        }
    }

    /// Training configuration for one seed.
    pub fn dqn_config(&self, seed: u64) -> Result<DqnConfig> {
        let config = DqnConfig {
            env: self.environment,
            model: self.model_config()?,
            gamma: self.gamma,
            batch_size: self.batch_size,
            update_model_every: self.update_model,
            update_target_every: self.update_target_model,
            learning_rates: LearningRates {
                theta: self.eta,
                input_weights: self.eta_w_d.unwrap_or(0.0),
                output_weights: self.eta_w_o.unwrap_or(0.0),
            },
            max_episodes: self.episodes,
            epsilon: EpsilonSchedule::new(self.epsilon_init, self.epsilon_dec, self.epsilon_min),
            epsilon_decay: self.epsilon_decay,
            memory_capacity: self.replay_memory,
            loss: self.loss,
            cap_is_terminal: self.cap_is_terminal,
            adam: AdamHyper::default(),
            track_mae: self.track_mae,
            seed,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn param_count(&self) -> Result<usize> {
        Ok(self.model_config()?.param_count())
    }
}
