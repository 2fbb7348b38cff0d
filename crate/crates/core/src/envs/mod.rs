//! Deterministic Frozen Lake and Cart Pole environments.

pub mod cart_pole;
pub mod frozen_lake;

pub use cart_pole::{CartPole, CartPoleAction, CartPoleState};
pub use frozen_lake::{
    fl_optimal_q, shortest_distances, tabular_q_learning, FrozenLake, FrozenLakeAction, QTable,
    TabularConfig,
};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Environment state as seen by a Q-function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Observation {
    /// Index of a discrete state.
    Discrete(usize),
    /// Real feature vector.
    Continuous(Vec<f64>),
}

impl Observation {
    pub fn dim(&self) -> usize {
        match self {
            Observation::Discrete(_) => 1,
            Observation::Continuous(v) => v.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub state: Observation,
    pub action: usize,
    pub reward: f64,
    pub next_state: Observation,
    pub done: bool,
    /// The episode ended only because it hit the step cap.
    pub truncated: bool,
}

/// Which environment a run uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvKind {
    FrozenLake,
    CartPole,
}

/// Episodic environment with a discrete action space.
pub trait Environment {
    fn n_actions(&self) -> usize;

    /// Starts a new episode and returns the initial observation.
    fn reset<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Observation;

    /// Advances one step. Stepping after the episode ended is an error.
    fn step(&mut self, action: usize) -> Result<Transition>;

    /// Highest achievable episode score.
    fn max_score(&self) -> f64;

    /// Solve predicate over all episode scores so far.
    fn is_solved(&self, scores: &[f64]) -> bool;
}

/// Step cap shared by both environments.
pub const MAX_EPISODE_STEPS: usize = 200;

/// Number of trailing episodes the solve predicates look at.
pub const SOLVE_WINDOW: usize = 100;

impl EnvKind {
    pub fn n_actions(self) -> usize {
        match self {
            EnvKind::FrozenLake => 4,
            EnvKind::CartPole => 2,
        }
    }

    pub fn max_score(self) -> f64 {
        match self {
            EnvKind::FrozenLake => 1.0,
            EnvKind::CartPole => MAX_EPISODE_STEPS as f64,
        }
    }

    pub fn is_solved(self, scores: &[f64]) -> bool {
        match self {
            EnvKind::FrozenLake => FrozenLake::solved(scores),
            EnvKind::CartPole => CartPole::solved(scores),
        }
    }
}
