//! Multi-seed runs, curve aggregation and on-disk artifacts.

use std::fs;
use std::path::{Path, PathBuf};

use qrl_core::dqn::{train, TrainLog};
use qrl_core::envs::EnvKind;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};
use crate::surface::{emit_q_surface, write_surfaces, TrainedModel};

pub const CONFIG_FILE: &str = "config.toml";
pub const SCORES_CSV: &str = "scores.csv";
pub const MAE_CSV: &str = "mae.csv";
pub const BUNDLE_JSON: &str = "curves.json";
pub const LOG_DIR: &str = "logs";
pub const SURFACE_DIR: &str = "surfaces";

/// Which files a run writes besides the configuration and curve bundle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EmitOptions {
    pub scores: bool,
    pub mae: bool,
    /// Per-seed training logs, including final parameters.
    pub logs: bool,
    /// Grid resolution of per-seed Cart Pole Q-surfaces; none when unset.
    pub q_surface: Option<usize>,
}

impl Default for EmitOptions {
    fn default() -> Self {
        EmitOptions {
            scores: true,
            mae: true,
            logs: true,
            q_surface: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub config: ExperimentConfig,
    /// Artifacts go to `out_dir/<config name>`; nothing is written when unset.
    pub out_dir: Option<PathBuf>,
    pub emit: EmitOptions,
}

impl ExperimentSpec {
    pub fn new(config: ExperimentConfig) -> Self {
        ExperimentSpec {
            config,
            out_dir: None,
            emit: EmitOptions::default(),
        }
    }

    pub fn run_dir(&self) -> Option<PathBuf> {
        self.out_dir.as_ref().map(|d| d.join(&self.config.name))
    }
}

/// A per-seed family of curves with their seed-wise mean and population
/// standard deviation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Curves {
    pub per_seed: Vec<Vec<f64>>,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Curves {
    /// All curves must have the same length.
    pub fn from_curves(per_seed: Vec<Vec<f64>>) -> Self {
        let len = per_seed.first().map_or(0, Vec::len);
        assert!(per_seed.iter().all(|c| c.len() == len), "ragged curves");
        let n = per_seed.len() as f64;
        let mean: Vec<f64> = (0..len)
            .map(|i| per_seed.iter().map(|c| c[i]).sum::<f64>() / n)
            .collect();
        let std = (0..len)
            .map(|i| {
                let var = per_seed.iter().map(|c| (c[i] - mean[i]).powi(2)).sum::<f64>() / n;
                var.sqrt()
            })
            .collect();
        Curves {
            per_seed,
            mean,
            std,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveBundle {
    pub name: String,
    pub param_count: usize,
    pub episodes: usize,
    pub seeds: Vec<u64>,
    /// Episode scores, padded with the maximum score after solving.
    pub scores: Curves,
    /// Number of episodes played until the solve predicate held.
    pub solve_episode: Vec<Option<usize>>,
    /// Frozen Lake MAE per environment step; shorter runs are extended with
    /// their final value, since training has stopped.
    pub mae: Option<Curves>,
}

impl CurveBundle {
    /// Aggregates per-seed logs; `logs[k]` belongs to `config.seeds[k]`.
    pub fn from_logs(config: &ExperimentConfig, logs: &[TrainLog]) -> Result<Self> {
        if logs.len() != config.seeds.len() {
            return Err(HarnessError::Config(format!(
                "{} logs for {} seeds",
                logs.len(),
                config.seeds.len()
            )));
        }
        let scores = Curves::from_curves(
            logs.iter()
                .map(|log| log.padded_scores(config.episodes))
                .collect(),
        );
        let mae = if config.track_mae {
            let len = logs.iter().map(|l| l.mae.len()).max().unwrap_or(0);
            Some(Curves::from_curves(
                logs.iter()
                    .map(|log| {
                        let mut curve = log.mae.clone();
                        let last = curve.last().copied().unwrap_or(f64::NAN);
                        curve.resize(len, last);
                        curve
                    })
                    .collect(),
            ))
        } else {
            None
        };
        Ok(CurveBundle {
            name: config.name.clone(),
            param_count: config.param_count()?,
            episodes: config.episodes,
            seeds: config.seeds.clone(),
            scores,
            solve_episode: logs.iter().map(|l| l.solved_at.map(|e| e + 1)).collect(),
            mae,
        })
    }

    pub fn solved_count(&self) -> usize {
        self.solve_episode.iter().flatten().count()
    }

    /// Seeds whose solve episode is at most `episodes`.
    pub fn solved_within(&self, episodes: usize) -> usize {
        self.solve_episode
            .iter()
            .flatten()
            .filter(|&&e| e <= episodes)
            .count()
    }

    /// Seed-averaged mean score over the last `window` episodes.
    pub fn trailing_mean(&self, window: usize) -> f64 {
        self.trailing_mean_at(self.episodes, window)
    }

    /// Seed-averaged mean score over the `window` episodes ending at episode
    /// `end` (1-based, clamped to the run length).
    pub fn trailing_mean_at(&self, end: usize, window: usize) -> f64 {
        let end = end.min(self.scores.mean.len());
        let tail = &self.scores.mean[end.saturating_sub(window)..end];
        tail.iter().sum::<f64>() / tail.len() as f64
    }

    /// Seed-averaged MAE at the last recorded step.
    pub fn final_mae(&self) -> Option<f64> {
        self.mae.as_ref().and_then(|m| m.mean.last().copied())
    }

    /// Mean number of episodes to solve over solved seeds.
    pub fn mean_solve_episode(&self) -> Option<f64> {
        let solved: Vec<f64> = self.solve_episode.iter().flatten().map(|&e| e as f64).collect();
        (!solved.is_empty()).then(|| solved.iter().sum::<f64>() / solved.len() as f64)
    }
}

/// Trains every seed of the config on the rayon pool. Logs are returned in
/// seed order.
pub fn run_seeds(config: &ExperimentConfig) -> Result<Vec<TrainLog>> {
    let configs = config
        .seeds
        .iter()
        .map(|&seed| config.dqn_config(seed))
        .collect::<Result<Vec<_>>>()?;
    configs
        .par_iter()
        .map(|c| train(c).map_err(HarnessError::from))
        .collect()
}

pub fn run_experiment(spec: &ExperimentSpec) -> Result<CurveBundle> {
    let logs = run_seeds(&spec.config)?;
    let bundle = CurveBundle::from_logs(&spec.config, &logs)?;
    if let Some(dir) = spec.run_dir() {
        write_artifacts(&dir, &spec.config, &bundle, &logs, spec.emit)?;
    }
    Ok(bundle)
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| HarnessError::format(path, e))?;
    fs::write(path, text).map_err(|e| HarnessError::io(path, e))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| HarnessError::format(path, e))
}

pub fn surface_dir(run_dir: &Path, seed: u64) -> PathBuf {
    run_dir.join(SURFACE_DIR).join(format!("seed_{seed}"))
}

pub fn log_path(run_dir: &Path, seed: u64) -> PathBuf {
    run_dir.join(LOG_DIR).join(format!("seed_{seed}.json"))
}

pub fn write_artifacts(
    dir: &Path,
    config: &ExperimentConfig,
    bundle: &CurveBundle,
    logs: &[TrainLog],
    emit: EmitOptions,
) -> Result<()> {
    create_dir(dir)?;
    config.save(&dir.join(CONFIG_FILE))?;
    write_json(&dir.join(BUNDLE_JSON), bundle)?;
    if emit.scores {
        write_curves_csv(&dir.join(SCORES_CSV), "episode", "score", &bundle.seeds, &bundle.scores)?;
    }
    if let (true, Some(mae)) = (emit.mae, &bundle.mae) {
        write_curves_csv(&dir.join(MAE_CSV), "step", "mae", &bundle.seeds, mae)?;
    }
    if emit.logs {
        create_dir(&dir.join(LOG_DIR))?;
        for (seed, log) in bundle.seeds.iter().zip(logs) {
            write_json(&log_path(dir, *seed), log)?;
        }
    }
    if let (Some(resolution), EnvKind::CartPole) = (emit.q_surface, config.environment) {
        for (seed, log) in bundle.seeds.iter().zip(logs) {
            let model = TrainedModel::from_params(&config.model_config()?, &log.final_params)?;
            let slices = emit_q_surface(&model, resolution)?;
            write_surfaces(&surface_dir(dir, *seed), &slices)?;
        }
    }
    Ok(())
}

/// Columns: `<index>, <value>_mean, <value>_std, <value>_seed_<k>...` with a
/// 1-based index.
pub fn write_curves_csv(
    path: &Path,
    index: &str,
    value: &str,
    seeds: &[u64],
    curves: &Curves,
) -> Result<()> {
    let mut writer = csv::Writer::from_path(path).map_err(|e| HarnessError::format(path, e))?;
    let mut header = vec![
        index.to_string(),
        format!("{value}_mean"),
        format!("{value}_std"),
    ];
    header.extend(seeds.iter().map(|k| format!("{value}_seed_{k}")));
    writer
        .write_record(&header)
        .map_err(|e| HarnessError::format(path, e))?;
    for i in 0..curves.mean.len() {
        let mut row = vec![
            (i + 1).to_string(),
            curves.mean[i].to_string(),
            curves.std[i].to_string(),
        ];
        row.extend(curves.per_seed.iter().map(|c| c[i].to_string()));
        writer
            .write_record(&row)
            .map_err(|e| HarnessError::format(path, e))?;
    }
    writer.flush().map_err(|e| HarnessError::io(path, e))
}

/// Reloads a run directory written by [`run_experiment`]: its config and the
/// per-seed logs.
pub fn load_run(dir: &Path) -> Result<(ExperimentConfig, Vec<TrainLog>)> {
    let config = ExperimentConfig::load(&dir.join(CONFIG_FILE))?;
    let logs = config
        .seeds
        .iter()
        .map(|&seed| read_json(&log_path(dir, seed)))
        .collect::<Result<Vec<TrainLog>>>()?;
    Ok((config, logs))
}

pub fn load_bundle(dir: &Path) -> Result<CurveBundle> {
    read_json(&dir.join(BUNDLE_JSON))
}
