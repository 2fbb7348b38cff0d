use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use qrl_harness::config::ExperimentConfig;
use qrl_harness::experiment::{load_bundle, load_run, run_experiment, EmitOptions, ExperimentSpec};
use qrl_harness::gradcheck::gradient_suite;
use qrl_harness::presets::{expectation, preset, PRESET_NAMES};
use qrl_harness::report::{compare_report, render_table, write_report_csv};
use qrl_harness::surface::{emit_q_surface, write_surfaces, TrainedModel};

#[derive(Parser)]
#[command(name = "qrl", version, about = "Train and compare circuit and network Q-learning agents")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train every seed of a preset or config file and write its artifacts.
    Run(RunArgs),
    /// Summarize finished run directories side by side.
    Report {
        /// Run directories containing curves.json.
        #[arg(required = true)]
        runs: Vec<PathBuf>,
        /// Also write the table as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Dump Q-values of a trained Cart Pole agent over three state slices.
    QSurface {
        /// Run directory written by `qrl run`.
        run: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Grid points per axis.
        #[arg(long, default_value_t = 41)]
        resolution: usize,
        /// Defaults to `<run>/surfaces/seed_<k>`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare adjoint, parameter-shift and finite-difference gradients.
    Gradcheck {
        #[arg(long, default_value_t = 50)]
        circuits: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// List preset names, or print one preset as TOML.
    Presets { name: Option<String> },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, conflicts_with = "config", required_unless_present = "config")]
    preset: Option<String>,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Seed range `a..b` or comma-separated list.
    #[arg(long, value_parser = parse_seeds)]
    seeds: Option<SeedList>,
    /// Override the episode cap.
    #[arg(long)]
    episodes: Option<usize>,
    #[arg(long, default_value = "runs")]
    out: PathBuf,
    /// Exit nonzero when the preset's expected outcome is not met.
    #[arg(long)]
    assert: bool,
    /// Also write per-seed Q-surfaces at this grid resolution (Cart Pole).
    #[arg(long)]
    q_surface: Option<usize>,
    /// Skip per-seed logs.
    #[arg(long)]
    no_logs: bool,
}

#[derive(Clone)]
struct SeedList(Vec<u64>);

fn parse_seeds(text: &str) -> Result<SeedList, String> {
    let seeds: Vec<u64> = if let Some((a, b)) = text.split_once("..") {
        let a: u64 = a.trim().parse().map_err(|e| format!("{a}: {e}"))?;
        let b: u64 = b.trim().parse().map_err(|e| format!("{b}: {e}"))?;
        (a..b).collect()
    } else {
        text.split(',')
            .map(|s| s.trim().parse().map_err(|e| format!("{s}: {e}")))
            .collect::<Result<_, _>>()?
    };
    if seeds.is_empty() {
        return Err("empty seed list".into());
    }
    Ok(SeedList(seeds))
}

fn run(args: RunArgs) -> anyhow::Result<bool> {
    let mut config = match (&args.preset, &args.config) {
        (Some(name), _) => preset(name)?,
        (None, Some(path)) => ExperimentConfig::load(path)?,
        (None, None) => bail!("pass --preset or --config"),
    };
    if let Some(SeedList(seeds)) = args.seeds {
        config.seeds = seeds;
    }
    if let Some(episodes) = args.episodes {
        config.episodes = episodes;
    }
    config.check()?;

    let spec = ExperimentSpec {
        out_dir: Some(args.out),
        emit: EmitOptions {
            logs: !args.no_logs,
            q_surface: args.q_surface,
            ..EmitOptions::default()
        },
        config,
    };
    eprintln!(
        "running {} on {} seeds, {} episodes",
        spec.config.name,
        spec.config.seeds.len(),
        spec.config.episodes
    );
    let bundle = run_experiment(&spec)?;
    print!("{}", render_table(&compare_report(std::slice::from_ref(&bundle))));
    if let Some(dir) = spec.run_dir() {
        eprintln!("artifacts in {}", dir.display());
    }

    if !args.assert {
        return Ok(true);
    }
    let Some(expected) = expectation(&spec.config.name) else {
        eprintln!("no expectation registered for {}", spec.config.name);
        return Ok(true);
    };
    if spec.config.episodes < expected.horizon() {
        eprintln!(
            "warning: the check looks at {} episodes but the run has {}",
            expected.horizon(),
            spec.config.episodes
        );
    }
    let (ok, summary) = expected.evaluate(&bundle);
    println!("{} {}: {summary}", if ok { "PASS" } else { "FAIL" }, spec.config.name);
    Ok(ok)
}

fn main() -> anyhow::Result<ExitCode> {
    match Cli::parse().command {
        Command::Run(args) => {
            if !run(args)? {
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Report { runs, csv } => {
            let bundles = runs
                .iter()
                .map(|dir| load_bundle(dir))
                .collect::<Result<Vec<_>, _>>()?;
            let rows = compare_report(&bundles);
            print!("{}", render_table(&rows));
            if let Some(path) = csv {
                write_report_csv(&path, &rows)?;
            }
        }
        Command::QSurface {
            run,
            seed,
            resolution,
            out,
        } => {
            let (config, logs) = load_run(&run)?;
            let index = config
                .seeds
                .iter()
                .position(|&s| s == seed)
                .with_context(|| format!("seed {seed} is not part of {}", run.display()))?;
            let model = TrainedModel::from_params(&config.model_config()?, &logs[index].final_params)?;
            let slices = emit_q_surface(&model, resolution)?;
            let dir = out.unwrap_or_else(|| qrl_harness::experiment::surface_dir(&run, seed));
            for (slice, path) in slices.iter().zip(write_surfaces(&dir, &slices)?) {
                println!("{} (max Q {:.3})", path.display(), slice.max_q());
            }
        }
        Command::Gradcheck { circuits, seed } => {
            let report = gradient_suite(circuits, seed)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
            if !report.passes(1e-10, 1e-6) {
                eprintln!("gradient mismatch");
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Presets { name } => match name {
            Some(name) => print!("{}", preset(&name)?.to_toml()?),
            None => PRESET_NAMES.iter().for_each(|n| println!("{n}")),
        },
    }
    Ok(ExitCode::SUCCESS)
}
