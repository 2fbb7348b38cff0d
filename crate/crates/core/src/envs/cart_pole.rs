use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Environment, Observation, Transition, MAX_EPISODE_STEPS, SOLVE_WINDOW};
use crate::error::{Error, Result};

pub const GRAVITY: f64 = 9.8;
pub const CART_MASS: f64 = 1.0;
pub const POLE_MASS: f64 = 0.1;
pub const TOTAL_MASS: f64 = CART_MASS + POLE_MASS;
/// Half the pole length.
pub const POLE_HALF_LENGTH: f64 = 0.5;
pub const POLE_MASS_LENGTH: f64 = POLE_MASS * POLE_HALF_LENGTH;
pub const FORCE: f64 = 10.0;
pub const TAU: f64 = 0.02;
pub const X_LIMIT: f64 = 2.4;
pub const ANGLE_LIMIT: f64 = 12.0 * std::f64::consts::PI / 180.0;
pub const INIT_RANGE: f64 = 0.05;
pub const SOLVE_SCORE: f64 = 195.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CartPoleAction {
    Left = 0,
    Right = 1,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CartPoleState {
    pub x: f64,
    pub x_dot: f64,
    pub phi: f64,
    pub phi_dot: f64,
}

impl CartPoleState {
    pub fn new(x: f64, x_dot: f64, phi: f64, phi_dot: f64) -> Self {
        CartPoleState {
            x,
            x_dot,
            phi,
            phi_dot,
        }
    }

    pub fn to_vec(self) -> Vec<f64> {
        vec![self.x, self.x_dot, self.phi, self.phi_dot]
    }

    pub fn from_slice(v: &[f64]) -> Result<Self> {
        match *v {
            [x, x_dot, phi, phi_dot] => Ok(Self::new(x, x_dot, phi, phi_dot)),
            _ => Err(Error::Dimension {
                expected: 4,
                got: v.len(),
            }),
        }
    }

    pub fn negated(self) -> Self {
        Self::new(-self.x, -self.x_dot, -self.phi, -self.phi_dot)
    }

    pub fn out_of_bounds(&self) -> bool {
        self.x.abs() > X_LIMIT || self.phi.abs() > ANGLE_LIMIT
    }

    /// One explicit Euler step of the cart-pole equations of motion. All four
    /// components are advanced with derivatives taken at the current state.
    pub fn integrate(self, action: CartPoleAction) -> Self {
        let force = match action {
            CartPoleAction::Left => -FORCE,
            CartPoleAction::Right => FORCE,
        };
        let (sin, cos) = self.phi.sin_cos();
        let temp = (force + POLE_MASS_LENGTH * self.phi_dot * self.phi_dot * sin) / TOTAL_MASS;
        let phi_acc = (GRAVITY * sin - cos * temp)
            / (POLE_HALF_LENGTH * (4.0 / 3.0 - POLE_MASS * cos * cos / TOTAL_MASS));
        let x_acc = temp - POLE_MASS_LENGTH * phi_acc * cos / TOTAL_MASS;

        CartPoleState {
            x: self.x + TAU * self.x_dot,
            x_dot: self.x_dot + TAU * x_acc,
            phi: self.phi + TAU * self.phi_dot,
            phi_dot: self.phi_dot + TAU * phi_acc,
        }
    }
}

/// Cart Pole with a 200-step cap and a reward of one on every step.
#[derive(Debug, Clone)]
pub struct CartPole {
    state: CartPoleState,
    steps: usize,
    done: bool,
}

impl CartPole {
    pub fn new(state: CartPoleState) -> Self {
        CartPole {
            state,
            steps: 0,
            done: false,
        }
    }

    pub fn state(&self) -> CartPoleState {
        self.state
    }

    /// Draws each component uniformly from [-0.05, 0.05].
    pub fn sample_initial<R: Rng + ?Sized>(rng: &mut R) -> CartPoleState {
        let mut draw = || rng.gen_range(-INIT_RANGE..=INIT_RANGE);
        CartPoleState::new(draw(), draw(), draw(), draw())
    }

    /// Average of the last 100 scores is at least 195.
    pub fn solved(scores: &[f64]) -> bool {
        if scores.len() < SOLVE_WINDOW {
            return false;
        }
        let tail = &scores[scores.len() - SOLVE_WINDOW..];
        tail.iter().sum::<f64>() / SOLVE_WINDOW as f64 >= SOLVE_SCORE
    }
}

impl Environment for CartPole {
    fn n_actions(&self) -> usize {
        2
    }

    fn reset<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Observation {
        *self = CartPole::new(Self::sample_initial(rng));
        Observation::Continuous(self.state.to_vec())
    }

    fn step(&mut self, action: usize) -> Result<Transition> {
        if self.done {
            return Err(Error::EpisodeDone);
        }
        let action_kind = match action {
            0 => CartPoleAction::Left,
            1 => CartPoleAction::Right,
            _ => {
                return Err(Error::ActionOutOfRange {
                    action,
                    n_actions: 2,
                })
            }
        };
        let state = Observation::Continuous(self.state.to_vec());
        self.state = self.state.integrate(action_kind);
        self.steps += 1;

        let failed = self.state.out_of_bounds();
        let truncated = !failed && self.steps >= MAX_EPISODE_STEPS;
        self.done = failed || truncated;
        Ok(Transition {
            state,
            action,
            reward: 1.0,
            next_state: Observation::Continuous(self.state.to_vec()),
            done: self.done,
            truncated,
        })
    }

    fn max_score(&self) -> f64 {
        MAX_EPISODE_STEPS as f64
    }

    fn is_solved(&self, scores: &[f64]) -> bool {
        Self::solved(scores)
    }
}
