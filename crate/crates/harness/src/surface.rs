//! Q-value grids over two-dimensional slices of the Cart Pole state space.

use std::path::{Path, PathBuf};

use qrl_core::dqn::{MlpModel, ModelConfig, PqcModel, QFunction};
use qrl_core::envs::cart_pole::{ANGLE_LIMIT, X_LIMIT};
use qrl_core::envs::Observation;
use qrl_core::qmodel::ParameterSet;
use serde::Serialize;

use crate::error::{HarnessError, Result};

pub const STATE_NAMES: [&str; 4] = ["x", "x_dot", "phi", "phi_dot"];

/// Plotting range of each state variable. Velocities have no hard bound, so
/// they use the range a balancing agent typically visits.
pub const STATE_RANGES: [(f64, f64); 4] = [
    (-X_LIMIT, X_LIMIT),
    (-2.0, 2.0),
    (-ANGLE_LIMIT, ANGLE_LIMIT),
    (-3.0, 3.0),
];

/// Pairs of free state variables; the other two are pinned to zero.
pub const SLICES: [(usize, usize); 3] = [(0, 1), (2, 3), (0, 2)];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurfaceRow {
    pub dim_a: f64,
    pub dim_b: f64,
    pub q_left: f64,
    pub q_right: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceSlice {
    pub dims: (usize, usize),
    pub rows: Vec<SurfaceRow>,
}

impl SurfaceSlice {
    pub fn file_name(&self) -> String {
        format!(
            "q_surface_{}_{}.csv",
            STATE_NAMES[self.dims.0], STATE_NAMES[self.dims.1]
        )
    }

    pub fn max_q(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| r.q_left.max(r.q_right))
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// `resolution` evenly spaced points per axis, end points included.
fn axis(range: (f64, f64), resolution: usize) -> Vec<f64> {
    if resolution == 1 {
        return vec![0.5 * (range.0 + range.1)];
    }
    (0..resolution)
        .map(|i| range.0 + (range.1 - range.0) * i as f64 / (resolution - 1) as f64)
        .collect()
}

/// Evaluates a two-action model on a `resolution × resolution` grid for each
/// slice in [`SLICES`].
pub fn emit_q_surface<M: QFunction>(model: &M, resolution: usize) -> Result<Vec<SurfaceSlice>> {
    if model.n_actions() != 2 {
        return Err(HarnessError::Config("q-surface needs a two-action model".into()));
    }
    if resolution == 0 {
        return Err(HarnessError::Config("grid resolution must be positive".into()));
    }
    SLICES
        .iter()
        .map(|&(a, b)| {
            let mut rows = Vec::with_capacity(resolution * resolution);
            for &va in &axis(STATE_RANGES[a], resolution) {
                for &vb in &axis(STATE_RANGES[b], resolution) {
                    let mut state = vec![0.0; 4];
                    state[a] = va;
                    state[b] = vb;
                    let q = model.q_values(&Observation::Continuous(state))?;
                    rows.push(SurfaceRow {
                        dim_a: va,
                        dim_b: vb,
                        q_left: q[0],
                        q_right: q[1],
                    });
                }
            }
            Ok(SurfaceSlice { dims: (a, b), rows })
        })
        .collect()
}

/// Writes one CSV per slice and returns their paths.
pub fn write_surfaces(dir: &Path, slices: &[SurfaceSlice]) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    slices
        .iter()
        .map(|slice| {
            let path = dir.join(slice.file_name());
            let mut writer =
                csv::Writer::from_path(&path).map_err(|e| HarnessError::format(&path, e))?;
            for row in &slice.rows {
                writer
                    .serialize(row)
                    .map_err(|e| HarnessError::format(&path, e))?;
            }
            writer.flush().map_err(|e| HarnessError::io(&path, e))?;
            Ok(path)
        })
        .collect()
}

/// A model rebuilt from a run's configuration and final parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum TrainedModel {
    Pqc(PqcModel),
    Mlp(MlpModel),
}

impl TrainedModel {
    pub fn from_params(model: &ModelConfig, groups: &[Vec<f64>]) -> Result<Self> {
        let group = |i: usize| groups.get(i).cloned().unwrap_or_default();
        Ok(match model {
            ModelConfig::Pqc(c) => TrainedModel::Pqc(PqcModel::new(
                c.clone(),
                ParameterSet {
                    theta: group(0),
                    w_d: group(1),
                    w_o: group(2),
                },
            )?),
            ModelConfig::Mlp(c) => TrainedModel::Mlp(MlpModel::new(c.clone(), group(0))?),
        })
    }
}

impl QFunction for TrainedModel {
    fn n_actions(&self) -> usize {
        match self {
            TrainedModel::Pqc(m) => m.n_actions(),
            TrainedModel::Mlp(m) => m.n_actions(),
        }
    }

    fn q_values(&self, state: &Observation) -> qrl_core::Result<Vec<f64>> {
        match self {
            TrainedModel::Pqc(m) => m.q_values(state),
            TrainedModel::Mlp(m) => m.q_values(state),
        }
    }

    fn q_gradient(&self, state: &Observation, action: usize) -> qrl_core::Result<(f64, Vec<Vec<f64>>)> {
        match self {
            TrainedModel::Pqc(m) => m.q_gradient(state, action),
            TrainedModel::Mlp(m) => m.q_gradient(state, action),
        }
    }

    fn param_groups(&self) -> Vec<&[f64]> {
        match self {
            TrainedModel::Pqc(m) => m.param_groups(),
            TrainedModel::Mlp(m) => m.param_groups(),
        }
    }

    fn param_groups_mut(&mut self) -> Vec<&mut [f64]> {
        match self {
            TrainedModel::Pqc(m) => m.param_groups_mut(),
            TrainedModel::Mlp(m) => m.param_groups_mut(),
        }
    }
}
