//! Deep Q-learning with experience replay and a periodically synchronised
//! target network.

mod adam;
mod model;

pub use adam::{AdamHyper, AdamState};
pub use model::{MlpModel, PqcModel, QFunction, TableModel};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::baseline::MlpConfig;
use crate::envs::{
    frozen_lake,
    fl_optimal_q, CartPole, EnvKind, Environment, FrozenLake, Observation, Transition,
};
use crate::error::{Error, Result};
use crate::qmodel::{EncoderConfig, PqcConfig};
use crate::replay::{argmax, select_action, EpsilonSchedule, ReplayMemory};

/// Form of the per-sample error in the batch loss.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum LossMode {
    /// Mean of squared errors on the taken actions.
    #[default]
    Squared,
    /// Mean of the Euclidean norm of the Q-vector difference, which is the
    /// absolute error of the one altered entry.
    Absolute,
}

/// When the exploration rate decays.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DecaySchedule {
    #[default]
    PerEpisode,
    PerStep,
}

/// Function approximator and its configuration.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelConfig {
    Pqc(PqcConfig),
    Mlp(MlpConfig),
}

impl ModelConfig {
    pub fn param_count(&self) -> usize {
        match self {
            ModelConfig::Pqc(c) => c.param_count(),
            ModelConfig::Mlp(c) => c.param_count(),
        }
    }
}

/// Learning rates per parameter group. Dense networks only use `theta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LearningRates {
    pub theta: f64,
    pub input_weights: f64,
    pub output_weights: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DqnConfig {
    pub env: EnvKind,
    pub model: ModelConfig,
    pub gamma: f64,
    pub batch_size: usize,
    /// Global environment steps between gradient updates.
    pub update_model_every: usize,
    /// Global environment steps between target-network copies.
    pub update_target_every: usize,
    pub learning_rates: LearningRates,
    pub max_episodes: usize,
    pub epsilon: EpsilonSchedule,
    pub epsilon_decay: DecaySchedule,
    pub memory_capacity: usize,
    pub loss: LossMode,
    /// Treat step-cap truncation like a real terminal state (no bootstrap).
    pub cap_is_terminal: bool,
    pub adam: AdamHyper,
    /// Record the Frozen Lake MAE against the optimal table after every step.
    pub track_mae: bool,
    pub seed: u64,
}

impl DqnConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Config(msg.to_string()));
        if !(0.0..=1.0).contains(&self.gamma) {
            return bad("gamma must lie in [0, 1]");
        }
        if self.batch_size == 0 || self.update_model_every == 0 || self.update_target_every == 0 {
            return bad("batch size and update intervals must be positive");
        }
        if self.memory_capacity < self.batch_size {
            return bad("replay memory smaller than one batch");
        }
        if self.track_mae && self.env != EnvKind::FrozenLake {
            return bad("MAE tracking needs the Frozen Lake environment");
        }
        match &self.model {
            ModelConfig::Pqc(c) => {
                c.validate()?;
                if c.n_actions() != self.env.n_actions() {
                    return bad("readout size differs from the action count");
                }
                let fits = match (&c.encoder, self.env) {
                    (EncoderConfig::Basis, EnvKind::FrozenLake) => {
                        1 << c.ansatz.n_qubits == frozen_lake::N_STATES
                    }
                    (EncoderConfig::ContinuousArctan { .. }, EnvKind::CartPole) => {
                        c.ansatz.n_qubits == 4
                    }
                    _ => false,
                };
                if !fits {
                    return bad("encoding does not fit the environment's observations");
                }
            }
            ModelConfig::Mlp(c) => {
                c.validate()?;
                if self.env == EnvKind::FrozenLake {
                    return bad("dense baseline needs a continuous environment");
                }
                if c.n_outputs() != self.env.n_actions() || c.n_inputs() != 4 {
                    return bad("network shape does not fit the environment");
                }
            }
        }
        Ok(())
    }
}

/// Independent random streams derived from one run seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RngStream {
    Init = 0,
    Environment = 1,
    Policy = 2,
    Replay = 3,
}

pub fn stream_rng(seed: u64, stream: RngStream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub score: f64,
    /// Exploration rate in effect at the start of the episode.
    pub epsilon: f64,
    pub steps: usize,
    /// Losses of the gradient updates made during the episode.
    pub losses: Vec<f64>,
    /// Largest Q-value seen while choosing actions.
    pub max_q: f64,
    pub solved: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainLog {
    pub episodes: Vec<EpisodeRecord>,
    /// Index of the episode after which the solve predicate first held.
    pub solved_at: Option<usize>,
    pub max_score: f64,
    /// Frozen Lake MAE after every environment step, when tracked.
    pub mae: Vec<f64>,
    /// Parameter groups at the end of training.
    pub final_params: Vec<Vec<f64>>,
}

impl TrainLog {
    pub fn scores(&self) -> Vec<f64> {
        self.episodes.iter().map(|e| e.score).collect()
    }

    /// Scores extended to `len` episodes with the maximum score once solved.
    /// Unsolved runs are extended with NaN, which should not happen when
    /// `len` equals the episode cap.
    pub fn padded_scores(&self, len: usize) -> Vec<f64> {
        let mut scores = self.scores();
        scores.truncate(len);
        let fill = if self.solved_at.is_some() {
            self.max_score
        } else {
            f64::NAN
        };
        scores.resize(len, fill);
        scores
    }

    /// Mean score over the last `window` of the first `episodes` padded
    /// episodes.
    pub fn trailing_mean(&self, episodes: usize, window: usize) -> f64 {
        let scores = self.padded_scores(episodes);
        let tail = &scores[scores.len().saturating_sub(window)..];
        tail.iter().sum::<f64>() / tail.len() as f64
    }

    pub fn total_steps(&self) -> usize {
        self.episodes.iter().map(|e| e.steps).sum()
    }
}

/// Regression target of every transition:
/// `r` at terminal states, `r + γ · max_a Q̂(s', a)` otherwise.
pub fn compute_targets<M: QFunction>(
    batch: &[&Transition],
    target_model: &M,
    gamma: f64,
    cap_is_terminal: bool,
) -> Result<Vec<(usize, f64)>> {
    batch
        .iter()
        .map(|t| {
            let terminal = t.done && (cap_is_terminal || !t.truncated);
            let value = if terminal || gamma == 0.0 {
                t.reward
            } else {
                let next = target_model.q_values(&t.next_state)?;
                t.reward + gamma * next[argmax(&next)]
            };
            Ok((t.action, value))
        })
        .collect()
}

/// Batch loss between predictions on the taken actions and their targets.
pub fn loss(predictions: &[f64], targets: &[f64], mode: LossMode) -> f64 {
    assert_eq!(predictions.len(), targets.len(), "batch size mismatch");
    let n = predictions.len() as f64;
    predictions
        .iter()
        .zip(targets)
        .map(|(q, y)| match mode {
            LossMode::Squared => (q - y) * (q - y),
            LossMode::Absolute => (q - y).abs(),
        })
        .sum::<f64>()
        / n
}

/// d loss / d prediction for one sample.
fn loss_derivative(q: f64, y: f64, n: usize, mode: LossMode) -> f64 {
    match mode {
        LossMode::Squared => 2.0 * (q - y) / n as f64,
        LossMode::Absolute => (q - y).signum() / n as f64,
    }
}

/// One optimizer step on a batch. Returns the loss before the step.
pub fn gradient_step<M: QFunction>(
    model: &mut M,
    target_model: &M,
    batch: &[&Transition],
    config: &DqnConfig,
    optimizer: &mut AdamState,
    learning_rates: &[f64],
) -> Result<f64> {
    let targets = compute_targets(batch, target_model, config.gamma, config.cap_is_terminal)?;
    let sizes = model.group_sizes();
    let mut grads: Vec<Vec<f64>> = sizes.iter().map(|&n| vec![0.0; n]).collect();
    let mut predictions = Vec::with_capacity(batch.len());
    for (t, &(action, target)) in batch.iter().zip(&targets) {
        let (q, g) = model.q_gradient(&t.state, action)?;
        let weight = loss_derivative(q, target, batch.len(), config.loss);
        for (acc, part) in grads.iter_mut().zip(&g) {
            for (a, p) in acc.iter_mut().zip(part) {
                *a += weight * p;
            }
        }
        predictions.push(q);
    }
    let target_values: Vec<f64> = targets.iter().map(|&(_, y)| y).collect();
    let value = loss(&predictions, &target_values, config.loss);
    optimizer.update(&mut model.param_groups_mut(), &grads, learning_rates);
    Ok(value)
}

/// Mean absolute difference between the model's 64 Frozen Lake Q-values and
/// the optimal table.
pub fn frozen_lake_mae<M: QFunction>(model: &M, gamma: f64) -> Result<f64> {
    let optimal = fl_optimal_q(gamma);
    let mut total = 0.0;
    for (s, row) in optimal.iter().enumerate() {
        let q = model.q_values(&Observation::Discrete(s))?;
        total += q.iter().zip(row).map(|(a, b)| (a - b).abs()).sum::<f64>();
    }
    Ok(total / (optimal.len() * optimal[0].len()) as f64)
}

/// Learning rate of every parameter group of a model built from `config`.
fn group_learning_rates(model: &ModelConfig, rates: &LearningRates) -> Vec<f64> {
    match model {
        ModelConfig::Pqc(_) => vec![rates.theta, rates.input_weights, rates.output_weights],
        ModelConfig::Mlp(_) => vec![rates.theta],
    }
}

/// Runs DQN training as configured, building the model and environment.
pub fn train(config: &DqnConfig) -> Result<TrainLog> {
    config.validate()?;
    let mut init_rng = stream_rng(config.seed, RngStream::Init);
    let rates = group_learning_rates(&config.model, &config.learning_rates);
    match (&config.model, config.env) {
        (ModelConfig::Pqc(c), env) => {
            let model = PqcModel::new(c.clone(), c.init_params(&mut init_rng))?;
            match env {
                EnvKind::FrozenLake => train_model(config, model, FrozenLake::new(), &rates),
                EnvKind::CartPole => {
                    train_model(config, model, CartPole::new(Default::default()), &rates)
                }
            }
        }
        (ModelConfig::Mlp(c), EnvKind::CartPole) => {
            let model = MlpModel::new(c.clone(), c.init_params(&mut init_rng))?;
            train_model(config, model, CartPole::new(Default::default()), &rates)
        }
        (ModelConfig::Mlp(_), EnvKind::FrozenLake) => Err(Error::Config(
            "dense baseline needs a continuous environment".into(),
        )),
    }
}

/// The DQN loop for an already initialised model and environment.
pub fn train_model<M: QFunction, E: Environment>(
    config: &DqnConfig,
    mut model: M,
    mut env: E,
    learning_rates: &[f64],
) -> Result<TrainLog> {
    let mut env_rng = stream_rng(config.seed, RngStream::Environment);
    let mut policy_rng = stream_rng(config.seed, RngStream::Policy);
    let mut replay_rng = stream_rng(config.seed, RngStream::Replay);

    let mut target = model.clone();
    let mut optimizer = AdamState::new(&model.group_sizes(), config.adam);
    let mut memory = ReplayMemory::new(config.memory_capacity);
    let mut epsilon = config.epsilon.clone();
    let mut log = TrainLog {
        episodes: Vec::new(),
        solved_at: None,
        max_score: env.max_score(),
        mae: Vec::new(),
        final_params: Vec::new(),
    };
    let mut scores = Vec::with_capacity(config.max_episodes);
    let mut global_step = 0usize;

    for episode in 0..config.max_episodes {
        let mut state = env.reset(&mut env_rng);
        let mut record = EpisodeRecord {
            score: 0.0,
            epsilon: epsilon.value,
            steps: 0,
            losses: Vec::new(),
            max_q: f64::NEG_INFINITY,
            solved: false,
        };
        loop {
            let q = model.q_values(&state)?;
            record.max_q = q.iter().copied().fold(record.max_q, f64::max);
            let action = select_action(&q, &epsilon, &mut policy_rng);
            let transition = env.step(action)?;
            record.score += transition.reward;
            record.steps += 1;
            global_step += 1;
            let done = transition.done;
            let next_state = transition.next_state.clone();
            memory.push(transition);

            if global_step.is_multiple_of(config.update_model_every) {
                if let Some(batch) = memory.sample(config.batch_size, &mut replay_rng) {
                    let value = gradient_step(
                        &mut model,
                        &target,
                        &batch,
                        config,
                        &mut optimizer,
                        learning_rates,
                    )?;
                    record.losses.push(value);
                }
            }
            if global_step.is_multiple_of(config.update_target_every) {
                target.copy_params_from(&model);
            }
            if config.track_mae {
                log.mae.push(frozen_lake_mae(&model, config.gamma)?);
            }
            if config.epsilon_decay == DecaySchedule::PerStep {
                epsilon.decay();
            }
            if done {
                break;
            }
            state = next_state;
        }
        if config.epsilon_decay == DecaySchedule::PerEpisode {
            epsilon.decay();
        }
        scores.push(record.score);
        record.solved = env.is_solved(&scores);
        let solved = record.solved;
        log.episodes.push(record);
        if solved {
            log.solved_at = Some(episode);
            break;
        }
    }
    log.final_params = model.param_groups().iter().map(|g| g.to_vec()).collect();
    Ok(log)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn transition(reward: f64, next: usize, done: bool, truncated: bool) -> Transition {
        Transition {
            state: Observation::Discrete(0),
            action: 1,
            reward,
            next_state: Observation::Discrete(next),
            done,
            truncated,
        }
    }

    #[test]
    fn terminal_targets_drop_bootstrap() {
        let mut model = TableModel::new(2, 2, 0.0);
        model.table = vec![0.0, 0.0, 50.0, 3.0];
        let t_done = transition(1.0, 1, true, false);
        let t_live = transition(1.0, 1, false, false);
        let targets = compute_targets(&[&t_done, &t_live], &model, 0.99, true).unwrap();
        assert_eq!(targets[0], (1, 1.0));
        assert!((targets[1].1 - 50.5).abs() < 1e-12);

        let zero_gamma = compute_targets(&[&t_live], &model, 0.0, true).unwrap();
        assert_eq!(zero_gamma[0].1, 1.0);
    }

    #[test]
    fn truncation_toggle() {
        let mut model = TableModel::new(2, 2, 0.0);
        model.table = vec![0.0, 0.0, 10.0, 0.0];
        let t = transition(1.0, 1, true, true);
        assert_eq!(compute_targets(&[&t], &model, 0.5, true).unwrap()[0].1, 1.0);
        assert_eq!(compute_targets(&[&t], &model, 0.5, false).unwrap()[0].1, 6.0);
    }

    #[test]
    fn loss_modes() {
        assert_eq!(loss(&[0.3, 0.7], &[0.3, 0.7], LossMode::Squared), 0.0);
        assert_eq!(loss(&[1.0], &[0.5], LossMode::Squared), 0.25);
        assert_eq!(loss(&[1.0], &[0.5], LossMode::Absolute), 0.5);
    }

    #[test]
    fn padded_scores_fill_with_maximum() {
        let rec = |score| EpisodeRecord {
            score,
            epsilon: 1.0,
            steps: 1,
            losses: vec![],
            max_q: 0.0,
            solved: false,
        };
        let log = TrainLog {
            episodes: vec![rec(10.0), rec(200.0)],
            solved_at: Some(1),
            max_score: 200.0,
            mae: vec![],
            final_params: vec![],
        };
        assert_eq!(log.padded_scores(4), vec![10.0, 200.0, 200.0, 200.0]);
        assert_eq!(log.trailing_mean(4, 2), 200.0);
        assert_eq!(log.trailing_mean(2, 100), 105.0);
    }

    #[test]
    fn mae_of_exact_table_is_zero() {
        let optimal = fl_optimal_q(0.8);
        let mut model = TableModel::new(16, 4, 0.0);
        model.table = optimal.iter().flatten().copied().collect();
        assert_eq!(frozen_lake_mae(&model, 0.8).unwrap(), 0.0);
    }
}
