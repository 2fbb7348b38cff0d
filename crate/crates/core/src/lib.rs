//! Q-learning with variational quantum circuits as function approximators.
//!
//! The crate contains an exact state-vector simulator ([`statevec`]), the
//! layered circuit Q-function ([`qmodel`]), Frozen Lake and Cart Pole
//! ([`envs`]), replay memory and ε-greedy exploration ([`replay`]), the DQN
//! training loop ([`dqn`]) and a dense-network baseline ([`baseline`]).

pub mod baseline;
pub mod dqn;
pub mod envs;
pub mod error;
pub mod qmodel;
pub mod replay;
pub mod statevec;

pub use error::{Error, Result};
