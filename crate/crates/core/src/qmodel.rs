//! Layered hardware-efficient circuit used as a Q-function.
//!
//! Each layer is an optional data-encoding block, one RY and one RZ rotation
//! per qubit, and a chain of CZ gates on neighbouring qubits. Q-values are
//! read out as scaled expectation values of one Z-string observable per
//! action.
//!
//! Angle slots of a built circuit are laid out as the variational angles
//! (`2 · n_qubits · n_layers` of them, RY then RZ within each layer) followed
//! by one slot per encoding gate. Encoding slots hold the already-squashed
//! angles `arctan(x_i · w_d)`, so the input-weight gradient is obtained by the
//! chain rule on top of the slot gradients.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::envs::Observation;
use crate::error::{Error, Result};
use crate::statevec::{self, AngleBinding, CircuitProgram, Gate, Observable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Entangler {
    /// CZ on (0,1), (1,2), …, (n-2,n-1); no wrap-around.
    #[default]
    LinearChain,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnsatzConfig {
    pub n_qubits: usize,
    pub n_layers: usize,
    pub data_reuploading: bool,
    pub entangler: Entangler,
}

impl AnsatzConfig {
    pub fn new(n_qubits: usize, n_layers: usize, data_reuploading: bool) -> Self {
        AnsatzConfig {
            n_qubits,
            n_layers,
            data_reuploading,
            entangler: Entangler::LinearChain,
        }
    }

    pub fn n_variational(&self) -> usize {
        2 * self.n_qubits * self.n_layers
    }
}

/// How input weights scale features before the arctan squashing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputWeights {
    /// No weights; every feature is used as is.
    Fixed,
    /// One trainable weight per feature, shared by all encoding blocks.
    Shared,
    /// One trainable weight per feature and encoding block.
    PerLayer,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum EncoderConfig {
    /// Discrete state index written as a bitstring with X gates; qubit 0
    /// carries the most significant bit. Emitted once, before layer 1.
    Basis,
    /// RX(arctan(x_i · w_d)) on qubit i.
    ContinuousArctan { input_weights: InputWeights },
}

impl EncoderConfig {
    pub fn trains_input_weights(&self) -> bool {
        matches!(
            self,
            EncoderConfig::ContinuousArctan {
                input_weights: InputWeights::Shared | InputWeights::PerLayer
            }
        )
    }
}

/// Map from an expectation value in [-1, 1] to a Q-value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "factor")]
pub enum OutputScaling {
    /// (⟨O⟩ + 1) / 2, in [0, 1].
    FixedUnit,
    /// c · (⟨O⟩ + 1) / 2, in [0, c].
    FixedFactor(f64),
    /// w_o[a] · (⟨O⟩ + 1) / 2 with one trainable weight per action.
    TrainableOutputWeight,
}

/// Which Z-string is measured for each action.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Readout {
    /// Z_a on qubit a, one action per qubit.
    PerQubitZ,
    /// Z_{2a} Z_{2a+1}, one action per neighbouring qubit pair.
    PairedZZ,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObservableSet {
    pub observables: Vec<Observable>,
    pub scaling: OutputScaling,
}

impl ObservableSet {
    pub fn new(observables: Vec<Observable>, scaling: OutputScaling) -> Self {
        ObservableSet {
            observables,
            scaling,
        }
    }

    pub fn from_readout(readout: Readout, n_qubits: usize, scaling: OutputScaling) -> Self {
        let observables = match readout {
            Readout::PerQubitZ => (0..n_qubits).map(|q| Observable::z_string(&[q])).collect(),
            Readout::PairedZZ => (0..n_qubits / 2)
                .map(|p| Observable::z_string(&[2 * p, 2 * p + 1]))
                .collect(),
        };
        Self::new(observables, scaling)
    }

    pub fn n_actions(&self) -> usize {
        self.observables.len()
    }

    pub fn trains_output_weights(&self) -> bool {
        self.scaling == OutputScaling::TrainableOutputWeight
    }

    fn scale(&self, expectation: f64, action: usize, w_o: &[f64]) -> f64 {
        self.factor(action, w_o) * 0.5 * (expectation + 1.0)
    }

    fn factor(&self, action: usize, w_o: &[f64]) -> f64 {
        match self.scaling {
            OutputScaling::FixedUnit => 1.0,
            OutputScaling::FixedFactor(c) => c,
            OutputScaling::TrainableOutputWeight => w_o[action],
        }
    }
}

/// Trainable values of the circuit model.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ParameterSet {
    /// Variational rotation angles (radians).
    pub theta: Vec<f64>,
    /// Input weights; empty unless trained.
    pub w_d: Vec<f64>,
    /// Output weights; empty unless trained.
    pub w_o: Vec<f64>,
}

impl ParameterSet {
    pub fn zeros_like(other: &ParameterSet) -> Self {
        ParameterSet {
            theta: vec![0.0; other.theta.len()],
            w_d: vec![0.0; other.w_d.len()],
            w_o: vec![0.0; other.w_o.len()],
        }
    }

    pub fn len(&self) -> usize {
        self.theta.len() + self.w_d.len() + self.w_o.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Groups in optimizer order: θ, w_d, w_o.
    pub fn groups(&self) -> [&[f64]; 3] {
        [&self.theta, &self.w_d, &self.w_o]
    }

    pub fn groups_mut(&mut self) -> [&mut Vec<f64>; 3] {
        [&mut self.theta, &mut self.w_d, &mut self.w_o]
    }

    pub fn into_groups(self) -> Vec<Vec<f64>> {
        vec![self.theta, self.w_d, self.w_o]
    }
}

/// Complete description of a circuit Q-function.
#[derive(Debug, Clone, PartialEq)]
pub struct PqcConfig {
    pub ansatz: AnsatzConfig,
    pub encoder: EncoderConfig,
    pub readout: ObservableSet,
}

impl PqcConfig {
    pub fn validate(&self) -> Result<()> {
        let n = self.ansatz.n_qubits;
        if n == 0 || n > statevec::MAX_QUBITS {
            return Err(Error::RegisterSize {
                n_qubits: n,
                max: statevec::MAX_QUBITS,
            });
        }
        if self.ansatz.n_layers == 0 {
            return Err(Error::Config("circuit needs at least one layer".into()));
        }
        if self.readout.observables.is_empty() {
            return Err(Error::Config("readout needs one observable per action".into()));
        }
        for obs in &self.readout.observables {
            for term in &obs.terms {
                if let Some(&qubit) = term.qubits.iter().find(|&&q| q >= n) {
                    return Err(Error::QubitOutOfRange { qubit, n_qubits: n });
                }
            }
        }
        Ok(())
    }

    pub fn n_actions(&self) -> usize {
        self.readout.n_actions()
    }

    /// Number of encoding blocks a continuous encoder emits.
    fn n_encoding_blocks(&self) -> usize {
        match self.encoder {
            EncoderConfig::Basis => 0,
            EncoderConfig::ContinuousArctan { .. } if self.ansatz.data_reuploading => {
                self.ansatz.n_layers
            }
            EncoderConfig::ContinuousArctan { .. } => 1,
        }
    }

    fn n_input_weights(&self) -> usize {
        let n = self.ansatz.n_qubits;
        match self.encoder {
            EncoderConfig::ContinuousArctan {
                input_weights: InputWeights::Shared,
            } => n,
            EncoderConfig::ContinuousArctan {
                input_weights: InputWeights::PerLayer,
            } => n * self.n_encoding_blocks(),
            _ => 0,
        }
    }

    /// Index into `w_d` used by feature `feature` in encoding block `block`.
    fn input_weight_index(&self, block: usize, feature: usize) -> Option<usize> {
        match self.encoder {
            EncoderConfig::ContinuousArctan {
                input_weights: InputWeights::Shared,
            } => Some(feature),
            EncoderConfig::ContinuousArctan {
                input_weights: InputWeights::PerLayer,
            } => Some(block * self.ansatz.n_qubits + feature),
            _ => None,
        }
    }

    /// Trainable scalar count: variational angles plus any input and output
    /// weights.
    pub fn param_count(&self) -> usize {
        let outputs = if self.readout.trains_output_weights() {
            self.n_actions()
        } else {
            0
        };
        self.ansatz.n_variational() + self.n_input_weights() + outputs
    }

    /// Parameters with angles uniform on [-π, π] and unit weights.
    pub fn init_params<R: Rng + ?Sized>(&self, rng: &mut R) -> ParameterSet {
        ParameterSet {
            theta: (0..self.ansatz.n_variational())
                .map(|_| rng.gen_range(-PI..=PI))
                .collect(),
            w_d: vec![1.0; self.n_input_weights()],
            w_o: if self.readout.trains_output_weights() {
                vec![1.0; self.n_actions()]
            } else {
                Vec::new()
            },
        }
    }

    fn check_params(&self, params: &ParameterSet) -> Result<()> {
        let expected = [
            self.ansatz.n_variational(),
            self.n_input_weights(),
            if self.readout.trains_output_weights() {
                self.n_actions()
            } else {
                0
            },
        ];
        for (group, want) in params.groups().iter().zip(expected) {
            if group.len() != want {
                return Err(Error::Dimension {
                    expected: want,
                    got: group.len(),
                });
            }
        }
        Ok(())
    }

    /// Gate sequence for one environment state. Variational angles bind to
    /// slots `0..2·n·L`; encoding gates bind to the slots after them.
    pub fn build_circuit(&self, state: &Observation) -> Result<CircuitProgram> {
        let n = self.ansatz.n_qubits;
        let layers = self.ansatz.n_layers;
        let flips = match (&self.encoder, state) {
            (EncoderConfig::Basis, Observation::Discrete(index)) => {
                if *index >= 1 << n {
                    return Err(Error::BasisIndex {
                        index: *index,
                        dim: 1 << n,
                    });
                }
                Some(*index)
            }
            (EncoderConfig::ContinuousArctan { .. }, Observation::Continuous(x)) => {
                if x.len() != n {
                    return Err(Error::Dimension {
                        expected: n,
                        got: x.len(),
                    });
                }
                None
            }
            (EncoderConfig::Basis, _) => {
                return Err(Error::ObservationKind("basis encoding needs a discrete state"))
            }
            (EncoderConfig::ContinuousArctan { .. }, _) => {
                return Err(Error::ObservationKind(
                    "arctan encoding needs a continuous state",
                ))
            }
        };

        let n_var = self.ansatz.n_variational();
        let per_layer = 3 * n + n.saturating_sub(1);
        let mut circuit = CircuitProgram::with_capacity(n, layers * per_layer + n)?;
        if let Some(index) = flips {
            for q in (0..n).filter(|&q| index & (1 << (n - 1 - q)) != 0) {
                circuit.push(Gate::x(q))?;
            }
        }
        for layer in 0..layers {
            if flips.is_none() && (layer == 0 || self.ansatz.data_reuploading) {
                let block = if self.ansatz.data_reuploading { layer } else { 0 };
                for q in 0..n {
                    circuit.push(Gate::rx(q, AngleBinding::Slot(n_var + block * n + q)))?;
                }
            }
            let base = layer * 2 * n;
            for q in 0..n {
                circuit.push(Gate::ry(q, AngleBinding::Slot(base + q)))?;
            }
            for q in 0..n {
                circuit.push(Gate::rz(q, AngleBinding::Slot(base + n + q)))?;
            }
            match self.ansatz.entangler {
                Entangler::LinearChain => {
                    for q in 0..n.saturating_sub(1) {
                        circuit.push(Gate::cz(q, q + 1))?;
                    }
                }
            }
        }
        Ok(circuit)
    }

    /// Angle vector for [`Self::build_circuit`]: θ followed by the squashed
    /// encoding angles of every block.
    pub fn bind_angles(&self, params: &ParameterSet, state: &Observation) -> Result<Vec<f64>> {
        self.check_params(params)?;
        let mut angles = params.theta.clone();
        if let Observation::Continuous(x) = state {
            for block in 0..self.n_encoding_blocks() {
                for (i, &xi) in x.iter().enumerate() {
                    let w = self
                        .input_weight_index(block, i)
                        .map_or(1.0, |k| params.w_d[k]);
                    angles.push((xi * w).atan());
                }
            }
        }
        Ok(angles)
    }

    /// Raw expectation value of every action's observable.
    pub fn expectations(&self, params: &ParameterSet, state: &Observation) -> Result<Vec<f64>> {
        let circuit = self.build_circuit(state)?;
        let angles = self.bind_angles(params, state)?;
        statevec::run(&circuit, &angles)?.expectations(&self.readout.observables)
    }

    /// Q-value of every action.
    pub fn q_values(&self, params: &ParameterSet, state: &Observation) -> Result<Vec<f64>> {
        Ok(self
            .expectations(params, state)?
            .into_iter()
            .enumerate()
            .map(|(a, e)| self.readout.scale(e, a, &params.w_o))
            .collect())
    }

    /// Q(s, a) together with its gradient with respect to every trainable
    /// group.
    pub fn q_gradients(
        &self,
        params: &ParameterSet,
        state: &Observation,
        action: usize,
    ) -> Result<(f64, ParameterSet)> {
        let n_actions = self.n_actions();
        if action >= n_actions {
            return Err(Error::ActionOutOfRange { action, n_actions });
        }
        let circuit = self.build_circuit(state)?;
        let angles = self.bind_angles(params, state)?;
        let obs = &self.readout.observables[action];
        let expectation = statevec::run(&circuit, &angles)?.expectation(obs)?;
        let slot_grads = statevec::adjoint_gradients(&circuit, &angles, obs)?;

        let dscale = 0.5 * self.readout.factor(action, &params.w_o);
        let n_var = self.ansatz.n_variational();
        let mut grad = ParameterSet::zeros_like(params);
        for (g, s) in grad.theta.iter_mut().zip(&slot_grads[..n_var]) {
            *g = dscale * s;
        }
        if let Observation::Continuous(x) = state {
            let n = self.ansatz.n_qubits;
            for block in 0..self.n_encoding_blocks() {
                for (i, &xi) in x.iter().enumerate() {
                    if let Some(k) = self.input_weight_index(block, i) {
                        let u = xi * params.w_d[k];
                        let dangle_dw = xi / (1.0 + u * u);
                        grad.w_d[k] += dscale * slot_grads[n_var + block * n + i] * dangle_dw;
                    }
                }
            }
        }
        if self.readout.trains_output_weights() {
            grad.w_o[action] = 0.5 * (expectation + 1.0);
        }
        let q = self.readout.scale(expectation, action, &params.w_o);
        Ok((q, grad))
    }
}
