use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Environment, Observation, Transition, MAX_EPISODE_STEPS, SOLVE_WINDOW};
use crate::error::{Error, Result};
use crate::replay::{select_action, EpsilonSchedule};

pub const GRID_SIZE: usize = 4;
pub const N_STATES: usize = GRID_SIZE * GRID_SIZE;
pub const N_ACTIONS: usize = 4;
pub const START: usize = 0;
pub const GOAL: usize = 15;
pub const HOLES: [usize; 4] = [5, 7, 11, 12];

/// 16×4 table of action values indexed `[state][action]`.
pub type QTable = [[f64; N_ACTIONS]; N_STATES];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrozenLakeAction {
    Left = 0,
    Down = 1,
    Right = 2,
    Up = 3,
}

impl FrozenLakeAction {
    pub const ALL: [FrozenLakeAction; 4] = [
        FrozenLakeAction::Left,
        FrozenLakeAction::Down,
        FrozenLakeAction::Right,
        FrozenLakeAction::Up,
    ];

    pub fn from_index(index: usize) -> Result<Self> {
        Self::ALL.get(index).copied().ok_or(Error::ActionOutOfRange {
            action: index,
            n_actions: N_ACTIONS,
        })
    }
}

pub fn is_hole(cell: usize) -> bool {
    HOLES.contains(&cell)
}

pub fn is_terminal(cell: usize) -> bool {
    cell == GOAL || is_hole(cell)
}

/// Cell reached by moving from `cell`; moves off the grid leave it unchanged.
pub fn move_cell(cell: usize, action: FrozenLakeAction) -> usize {
    let (row, col) = (cell / GRID_SIZE, cell % GRID_SIZE);
    let (row, col) = match action {
        FrozenLakeAction::Left => (row, col.saturating_sub(1)),
        FrozenLakeAction::Down => ((row + 1).min(GRID_SIZE - 1), col),
        FrozenLakeAction::Right => (row, (col + 1).min(GRID_SIZE - 1)),
        FrozenLakeAction::Up => (row.saturating_sub(1), col),
    };
    row * GRID_SIZE + col
}

/// Non-slippery 4×4 Frozen Lake.
#[derive(Debug, Clone)]
pub struct FrozenLake {
    cell: usize,
    steps: usize,
    done: bool,
}

impl Default for FrozenLake {
    fn default() -> Self {
        Self::new()
    }
}

impl FrozenLake {
    pub fn new() -> Self {
        FrozenLake {
            cell: START,
            steps: 0,
            done: false,
        }
    }

    /// Places the agent on an arbitrary cell with a fresh step counter.
    pub fn start_at(cell: usize) -> Result<Self> {
        if cell >= N_STATES {
            return Err(Error::Dimension {
                expected: N_STATES,
                got: cell,
            });
        }
        Ok(FrozenLake {
            cell,
            steps: 0,
            done: is_terminal(cell),
        })
    }

    pub fn cell(&self) -> usize {
        self.cell
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Reached the goal for every one of the last 100 episodes.
    pub fn solved(scores: &[f64]) -> bool {
        scores.len() >= SOLVE_WINDOW
            && scores[scores.len() - SOLVE_WINDOW..]
                .iter()
                .all(|&s| s >= 1.0)
    }
}

impl Environment for FrozenLake {
    fn n_actions(&self) -> usize {
        N_ACTIONS
    }

    fn reset<R: Rng + ?Sized>(&mut self, _rng: &mut R) -> Observation {
        *self = FrozenLake::new();
        Observation::Discrete(self.cell)
    }

    fn step(&mut self, action: usize) -> Result<Transition> {
        if self.done {
            return Err(Error::EpisodeDone);
        }
        let action_kind = FrozenLakeAction::from_index(action)?;
        let state = Observation::Discrete(self.cell);
        self.cell = move_cell(self.cell, action_kind);
        self.steps += 1;

        let reward = if self.cell == GOAL { 1.0 } else { 0.0 };
        let terminal = is_terminal(self.cell);
        let truncated = !terminal && self.steps >= MAX_EPISODE_STEPS;
        self.done = terminal || truncated;
        Ok(Transition {
            state,
            action,
            reward,
            next_state: Observation::Discrete(self.cell),
            done: self.done,
            truncated,
        })
    }

    fn max_score(&self) -> f64 {
        1.0
    }

    fn is_solved(&self, scores: &[f64]) -> bool {
        Self::solved(scores)
    }
}

/// Shortest number of moves from every cell to the goal avoiding holes, by
/// breadth-first search backwards from the goal. `None` for holes and for
/// cells that cannot reach the goal.
pub fn shortest_distances() -> [Option<usize>; N_STATES] {
    let mut dist = [None; N_STATES];
    dist[GOAL] = Some(0);
    let mut queue = VecDeque::from([GOAL]);
    while let Some(cell) = queue.pop_front() {
        let d = dist[cell].expect("queued cells have a distance");
        for pred in 0..N_STATES {
            if is_terminal(pred) || dist[pred].is_some() {
                continue;
            }
            if FrozenLakeAction::ALL
                .iter()
                .any(|&a| move_cell(pred, a) == cell)
            {
                dist[pred] = Some(d + 1);
                queue.push_back(pred);
            }
        }
    }
    dist
}

/// Optimal action values of the deterministic lake: `gamma^d` where `d` is
/// the shortest distance from the post-move cell to the goal, and zero when
/// the move ends in a hole. Rows of terminal cells (holes, goal) are zero.
pub fn fl_optimal_q(gamma: f64) -> QTable {
    let dist = shortest_distances();
    let mut table = [[0.0; N_ACTIONS]; N_STATES];
    for (cell, row) in table.iter_mut().enumerate() {
        if is_terminal(cell) {
            continue;
        }
        for action in FrozenLakeAction::ALL {
            let next = move_cell(cell, action);
            row[action as usize] = match dist[next] {
                Some(d) => gamma.powi(d as i32),
                None => 0.0,
            };
        }
    }
    table
}

/// Settings of the tabular Q-learning reference learner.
#[derive(Debug, Clone)]
pub struct TabularConfig {
    pub episodes: usize,
    pub alpha: f64,
    pub gamma: f64,
    pub epsilon: EpsilonSchedule,
    /// Start each episode on a uniformly drawn non-terminal cell instead of
    /// cell 0, so rarely visited cells still get updated.
    pub exploring_starts: bool,
    pub seed: u64,
}

/// Tabular Q-learning with ε-greedy behaviour. Terminal transitions drop the
/// bootstrap term; step-cap truncations keep it.
pub fn tabular_q_learning(config: &TabularConfig) -> QTable {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut epsilon = config.epsilon.clone();
    let mut table = [[0.0; N_ACTIONS]; N_STATES];
    let starts: Vec<usize> = (0..N_STATES).filter(|&c| !is_terminal(c)).collect();

    for _ in 0..config.episodes {
        let start = if config.exploring_starts {
            starts[rng.gen_range(0..starts.len())]
        } else {
            START
        };
        let mut env = FrozenLake::start_at(start).expect("valid start cell");
        loop {
            let cell = env.cell();
            let action = select_action(&table[cell], &epsilon, &mut rng);
            let t = env.step(action).expect("episode not finished");
            let next = env.cell();
            let bootstrap = if t.done && !t.truncated {
                0.0
            } else {
                table[next].iter().copied().fold(f64::NEG_INFINITY, f64::max)
            };
            let q = &mut table[cell][action];
            *q += config.alpha * (t.reward + config.gamma * bootstrap - *q);
            if t.done {
                break;
            }
        }
        epsilon.decay();
    }
    table
}
