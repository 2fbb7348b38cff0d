//! Agreement check between adjoint, parameter-shift and finite-difference
//! gradients on random circuits and random circuit Q-functions.

use std::f64::consts::PI;

use qrl_core::envs::Observation;
use qrl_core::qmodel::{
    AnsatzConfig, EncoderConfig, InputWeights, ObservableSet, OutputScaling, ParameterSet,
    PqcConfig, Readout,
};
use qrl_core::statevec::{
    adjoint_gradients, param_shift_gradient, run, AngleBinding, CircuitProgram, Gate, GateKind,
    Observable,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;

const FD_STEP: f64 = 1e-5;

/// Largest absolute disagreement seen for each pair of methods.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct GradReport {
    pub circuits: usize,
    pub slots_checked: usize,
    pub adjoint_vs_shift: f64,
    pub adjoint_vs_fd: f64,
    pub shift_vs_fd: f64,
    /// Model gradients (θ, w_d, w_o) against finite differences, divided by
    /// `1 + |Q|` because trained output weights scale Q into the hundreds.
    pub model_vs_fd: f64,
    /// Entries checked per group, in the order θ, w_d, w_o.
    pub model_entries: [usize; 3],
}

impl GradReport {
    pub fn passes(&self, exact_tol: f64, fd_tol: f64) -> bool {
        self.slots_checked > 0
            && self.adjoint_vs_shift <= exact_tol
            && self.adjoint_vs_fd <= fd_tol
            && self.shift_vs_fd <= fd_tol
            && self.model_vs_fd <= fd_tol
            && self.model_entries.iter().all(|&n| n > 0)
    }
}

fn random_observable(rng: &mut ChaCha8Rng, n_qubits: usize) -> Observable {
    let mut obs = Observable::new();
    for _ in 0..rng.gen_range(1..=3) {
        let qubits: Vec<usize> = (0..n_qubits).filter(|_| rng.gen_bool(0.5)).collect();
        obs = obs.with_term(rng.gen_range(-2.0..2.0), &qubits);
    }
    obs
}

/// Layered circuit on 1 to 4 qubits with 1 to 5 layers, including shared
/// slots, constant angles, X and CZ gates.
fn random_circuit(rng: &mut ChaCha8Rng) -> Result<(CircuitProgram, Vec<f64>)> {
    let n = rng.gen_range(1..=4);
    let mut circuit = CircuitProgram::new(n)?;
    let mut n_slots = 0;
    for _ in 0..rng.gen_range(1..=5) {
        for q in 0..n {
            if rng.gen_bool(0.2) {
                circuit.push(Gate::x(q))?;
            }
            let kind = [GateKind::Rx, GateKind::Ry, GateKind::Rz][rng.gen_range(0..3)];
            let binding = if rng.gen_bool(0.1) {
                AngleBinding::Constant(rng.gen_range(-PI..PI))
            } else if n_slots > 0 && rng.gen_bool(0.2) {
                AngleBinding::Slot(rng.gen_range(0..n_slots))
            } else {
                n_slots += 1;
                AngleBinding::Slot(n_slots - 1)
            };
            circuit.push(Gate::rotation(kind, q, binding))?;
        }
        for q in 0..n.saturating_sub(1) {
            if rng.gen_bool(0.7) {
                circuit.push(Gate::cz(q, q + 1))?;
            }
        }
    }
    let angles = (0..n_slots).map(|_| rng.gen_range(-PI..PI)).collect();
    Ok((circuit, angles))
}

/// Continuous-input model with trainable input and output weights, so every
/// parameter group is non-empty.
fn random_model(rng: &mut ChaCha8Rng) -> PqcConfig {
    let n = 2 * rng.gen_range(1..=2);
    let weights = if rng.gen_bool(0.5) {
        InputWeights::Shared
    } else {
        InputWeights::PerLayer
    };
    let readout = if rng.gen_bool(0.5) {
        Readout::PairedZZ
    } else {
        Readout::PerQubitZ
    };
    PqcConfig {
        ansatz: AnsatzConfig::new(n, rng.gen_range(1..=5), rng.gen_bool(0.5)),
        encoder: EncoderConfig::ContinuousArctan {
            input_weights: weights,
        },
        readout: ObservableSet::from_readout(readout, n, OutputScaling::TrainableOutputWeight),
    }
}

fn central_difference(f: impl Fn(f64) -> Result<f64>, x: f64) -> Result<f64> {
    Ok((f(x + FD_STEP)? - f(x - FD_STEP)?) / (2.0 * FD_STEP))
}

pub fn gradient_suite(circuits: usize, seed: u64) -> Result<GradReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = GradReport {
        circuits,
        ..GradReport::default()
    };

    for _ in 0..circuits {
        let (circuit, angles) = random_circuit(&mut rng)?;
        let obs = random_observable(&mut rng, circuit.n_qubits());
        let adjoint = adjoint_gradients(&circuit, &angles, &obs)?;
        for slot in 0..angles.len() {
            let shift = param_shift_gradient(&circuit, &angles, &obs, slot)?;
            let fd = central_difference(
                |v| {
                    let mut a = angles.clone();
                    a[slot] = v;
                    run(&circuit, &a)?.expectation(&obs).map_err(Into::into)
                },
                angles[slot],
            )?;
            report.adjoint_vs_shift = report.adjoint_vs_shift.max((adjoint[slot] - shift).abs());
            report.adjoint_vs_fd = report.adjoint_vs_fd.max((adjoint[slot] - fd).abs());
            report.shift_vs_fd = report.shift_vs_fd.max((shift - fd).abs());
            report.slots_checked += 1;
        }
    }

    for _ in 0..circuits {
        let cfg = random_model(&mut rng);
        let mut params = cfg.init_params(&mut rng);
        for w in params.w_d.iter_mut() {
            *w = rng.gen_range(-2.0..2.0);
        }
        for w in params.w_o.iter_mut() {
            *w = rng.gen_range(-50.0..100.0);
        }
        let n = cfg.ansatz.n_qubits;
        let state = Observation::Continuous((0..n).map(|_| rng.gen_range(-2.0..2.0)).collect());
        let action = rng.gen_range(0..cfg.n_actions());
        let (q, grad) = cfg.q_gradients(&params, &state, action)?;
        for group in 0..3 {
            for k in 0..params.groups()[group].len() {
                let fd = central_difference(
                    |v| {
                        let mut p: ParameterSet = params.clone();
                        p.groups_mut()[group][k] = v;
                        Ok(cfg.q_values(&p, &state)?[action])
                    },
                    params.groups()[group][k],
                )?;
                let gap = (grad.groups()[group][k] - fd).abs() / (1.0 + q.abs());
                report.model_vs_fd = report.model_vs_fd.max(gap);
                report.model_entries[group] += 1;
            }
        }
    }
    Ok(report)
}
