use crate::baseline::MlpConfig;
use crate::envs::Observation;
use crate::error::{Error, Result};
use crate::qmodel::{ParameterSet, PqcConfig};

/// Differentiable action-value function trained by the DQN loop.
///
/// Parameters are exposed as an ordered list of groups; the optimizer keeps
/// separate moments and learning rates per group.
pub trait QFunction: Clone {
    fn n_actions(&self) -> usize;

    fn q_values(&self, state: &Observation) -> Result<Vec<f64>>;

    /// Q(s, a) and its gradient, laid out like [`QFunction::param_groups`].
    fn q_gradient(&self, state: &Observation, action: usize) -> Result<(f64, Vec<Vec<f64>>)>;

    fn param_groups(&self) -> Vec<&[f64]>;

    fn param_groups_mut(&mut self) -> Vec<&mut [f64]>;

    fn group_sizes(&self) -> Vec<usize> {
        self.param_groups().iter().map(|g| g.len()).collect()
    }

    /// Copies parameter values from another model of the same shape.
    fn copy_params_from(&mut self, other: &Self) {
        for (dst, src) in self.param_groups_mut().into_iter().zip(other.param_groups()) {
            dst.copy_from_slice(src);
        }
    }
}

/// Circuit Q-function: configuration plus its current parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct PqcModel {
    pub config: PqcConfig,
    pub params: ParameterSet,
}

impl PqcModel {
    pub fn new(config: PqcConfig, params: ParameterSet) -> Result<Self> {
        config.validate()?;
        Ok(PqcModel { config, params })
    }
}

impl QFunction for PqcModel {
    fn n_actions(&self) -> usize {
        self.config.n_actions()
    }

    fn q_values(&self, state: &Observation) -> Result<Vec<f64>> {
        self.config.q_values(&self.params, state)
    }

    fn q_gradient(&self, state: &Observation, action: usize) -> Result<(f64, Vec<Vec<f64>>)> {
        let (q, grad) = self.config.q_gradients(&self.params, state, action)?;
        Ok((q, grad.into_groups()))
    }

    fn param_groups(&self) -> Vec<&[f64]> {
        self.params.groups().to_vec()
    }

    fn param_groups_mut(&mut self) -> Vec<&mut [f64]> {
        self.params
            .groups_mut()
            .into_iter()
            .map(|g| g.as_mut_slice())
            .collect()
    }
}

/// Dense network Q-function over continuous observations.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    pub config: MlpConfig,
    pub params: Vec<f64>,
}

impl MlpModel {
    pub fn new(config: MlpConfig, params: Vec<f64>) -> Result<Self> {
        config.validate()?;
        if params.len() != config.param_count() {
            return Err(Error::Dimension {
                expected: config.param_count(),
                got: params.len(),
            });
        }
        Ok(MlpModel { config, params })
    }

    fn features(state: &Observation) -> Result<&[f64]> {
        match state {
            Observation::Continuous(x) => Ok(x),
            Observation::Discrete(_) => Err(Error::ObservationKind(
                "dense network needs a continuous state",
            )),
        }
    }
}

impl QFunction for MlpModel {
    fn n_actions(&self) -> usize {
        self.config.n_outputs()
    }

    fn q_values(&self, state: &Observation) -> Result<Vec<f64>> {
        self.config.forward(&self.params, Self::features(state)?)
    }

    fn q_gradient(&self, state: &Observation, action: usize) -> Result<(f64, Vec<Vec<f64>>)> {
        let n_actions = self.n_actions();
        if action >= n_actions {
            return Err(Error::ActionOutOfRange { action, n_actions });
        }
        let mut upstream = vec![0.0; n_actions];
        upstream[action] = 1.0;
        let (out, grad) = self
            .config
            .backward(&self.params, Self::features(state)?, &upstream)?;
        Ok((out[action], vec![grad]))
    }

    fn param_groups(&self) -> Vec<&[f64]> {
        vec![&self.params]
    }

    fn param_groups_mut(&mut self) -> Vec<&mut [f64]> {
        vec![&mut self.params]
    }
}

/// Lookup-table Q-function over discrete states; each entry is its own
/// parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct TableModel {
    n_actions: usize,
    pub table: Vec<f64>,
}

impl TableModel {
    pub fn new(n_states: usize, n_actions: usize, init: f64) -> Self {
        TableModel {
            n_actions,
            table: vec![init; n_states * n_actions],
        }
    }

    fn row(&self, state: &Observation) -> Result<usize> {
        match *state {
            Observation::Discrete(s) if (s + 1) * self.n_actions <= self.table.len() => Ok(s),
            Observation::Discrete(s) => Err(Error::BasisIndex {
                index: s,
                dim: self.table.len() / self.n_actions,
            }),
            Observation::Continuous(_) => {
                Err(Error::ObservationKind("table model needs a discrete state"))
            }
        }
    }
}

impl QFunction for TableModel {
    fn n_actions(&self) -> usize {
        self.n_actions
    }

    fn q_values(&self, state: &Observation) -> Result<Vec<f64>> {
        let s = self.row(state)?;
        Ok(self.table[s * self.n_actions..(s + 1) * self.n_actions].to_vec())
    }

    fn q_gradient(&self, state: &Observation, action: usize) -> Result<(f64, Vec<Vec<f64>>)> {
        let s = self.row(state)?;
        if action >= self.n_actions {
            return Err(Error::ActionOutOfRange {
                action,
                n_actions: self.n_actions,
            });
        }
        let mut grad = vec![0.0; self.table.len()];
        grad[s * self.n_actions + action] = 1.0;
        Ok((self.table[s * self.n_actions + action], vec![grad]))
    }

    fn param_groups(&self) -> Vec<&[f64]> {
        vec![&self.table]
    }

    fn param_groups_mut(&mut self) -> Vec<&mut [f64]> {
        vec![&mut self.table]
    }
}
