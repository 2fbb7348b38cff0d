use std::fs;

use qrl_harness::config::ExperimentConfig;
use qrl_harness::experiment::{
    load_bundle, load_run, run_experiment, surface_dir, CurveBundle, EmitOptions, ExperimentSpec,
    MAE_CSV, SCORES_CSV,
};
use qrl_harness::presets::{expectation, preset, Expectation, PRESET_NAMES};
use qrl_harness::report::{compare_report, render_table, write_report_csv};
use qrl_harness::surface::{emit_q_surface, TrainedModel, SLICES};
use qrl_harness::HarnessError;

fn short(name: &str, episodes: usize, seeds: Vec<u64>) -> ExperimentConfig {
    ExperimentConfig {
        episodes,
        seeds,
        ..preset(name).unwrap()
    }
}

fn spec_in(config: ExperimentConfig, dir: &std::path::Path) -> ExperimentSpec {
    ExperimentSpec {
        out_dir: Some(dir.to_path_buf()),
        ..ExperimentSpec::new(config)
    }
}

#[test]
fn presets_round_trip_through_toml() {
    for name in PRESET_NAMES {
        let config = preset(name).unwrap();
        let text = config.to_toml().unwrap();
        let parsed = ExperimentConfig::from_toml(&text).unwrap();
        assert_eq!(parsed, config, "{name}");
        assert_eq!(parsed.to_toml().unwrap(), text, "{name}");
    }
}

#[test]
fn config_rejects_bad_input() {
    let text = preset("cp-full").unwrap().to_toml().unwrap();
    let cases = [
        text.replace("schema_version = 1", "schema_version = 2"),
        text.replace("gamma = 0.99", "gamma = 0.99\nbogus = 1"),
        text.replace("\"batch size\" = 16\n", ""),
        text.replace("qubits = 4", "qubits = 3"),
    ];
    for bad in cases {
        let err = ExperimentConfig::from_toml(&bad);
        assert!(
            matches!(err, Err(HarnessError::Config(_) | HarnessError::Core(_))),
            "{bad}"
        );
    }
    let missing = ExperimentConfig::load(std::path::Path::new("/nonexistent/config.toml"));
    assert!(matches!(missing, Err(HarnessError::Io { .. })));
}

#[test]
fn single_seed_has_zero_spread() {
    let bundle = run_experiment(&ExperimentSpec::new(short("fl-depth-5", 30, vec![3]))).unwrap();
    assert_eq!(bundle.scores.per_seed.len(), 1);
    assert_eq!(bundle.scores.mean, bundle.scores.per_seed[0]);
    assert!(bundle.scores.std.iter().all(|&s| s == 0.0));
    let mae = bundle.mae.unwrap();
    assert_eq!(mae.mean, mae.per_seed[0]);
}

#[test]
fn mean_and_std_are_over_the_seed_set() {
    let bundle = run_experiment(&ExperimentSpec::new(short("cp-full", 15, vec![0, 1, 2]))).unwrap();
    assert_eq!(bundle.scores.mean.len(), 15);
    for i in 0..15 {
        let vals: Vec<f64> = bundle.scores.per_seed.iter().map(|c| c[i]).collect();
        let mean = vals.iter().sum::<f64>() / 3.0;
        let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 3.0;
        assert!((bundle.scores.mean[i] - mean).abs() < 1e-12);
        assert!((bundle.scores.std[i] - var.sqrt()).abs() < 1e-12);
    }
}

#[test]
fn reruns_write_identical_files() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let config = short("fl-depth-5", 40, vec![0, 1]);
    run_experiment(&spec_in(config.clone(), a.path())).unwrap();
    run_experiment(&spec_in(config, b.path())).unwrap();
    for file in [SCORES_CSV, MAE_CSV, "curves.json", "config.toml", "logs/seed_1.json"] {
        let left = fs::read(a.path().join("fl-depth-5").join(file)).unwrap();
        let right = fs::read(b.path().join("fl-depth-5").join(file)).unwrap();
        assert_eq!(left, right, "{file}");
    }
}

#[test]
fn csv_header_follows_the_column_contract() {
    let dir = tempfile::tempdir().unwrap();
    run_experiment(&spec_in(short("fl-depth-5", 20, vec![4, 7]), dir.path())).unwrap();
    let run = dir.path().join("fl-depth-5");
    let scores = fs::read_to_string(run.join(SCORES_CSV)).unwrap();
    assert_eq!(
        scores.lines().next().unwrap(),
        "episode,score_mean,score_std,score_seed_4,score_seed_7"
    );
    assert_eq!(scores.lines().count(), 21);
    let mae = fs::read_to_string(run.join(MAE_CSV)).unwrap();
    assert_eq!(mae.lines().next().unwrap(), "step,mae_mean,mae_std,mae_seed_4,mae_seed_7");
}

#[test]
fn saved_logs_reproduce_the_bundle() {
    let dir = tempfile::tempdir().unwrap();
    let bundle = run_experiment(&spec_in(short("fl-depth-5", 60, vec![0, 5]), dir.path())).unwrap();
    let run = dir.path().join("fl-depth-5");
    let (config, logs) = load_run(&run).unwrap();
    assert_eq!(CurveBundle::from_logs(&config, &logs).unwrap(), bundle);
    assert_eq!(load_bundle(&run).unwrap(), bundle);
}

#[test]
fn surfaces_have_r_squared_rows_and_a_shared_origin() {
    let config = short("cp-full", 10, vec![2]);
    let dir = tempfile::tempdir().unwrap();
    let spec = ExperimentSpec {
        emit: EmitOptions {
            q_surface: Some(5),
            ..EmitOptions::default()
        },
        ..spec_in(config.clone(), dir.path())
    };
    run_experiment(&spec).unwrap();
    let run = dir.path().join("cp-full");
    let (_, logs) = load_run(&run).unwrap();
    let model = TrainedModel::from_params(&config.model_config().unwrap(), &logs[0].final_params).unwrap();

    let slices = emit_q_surface(&model, 5).unwrap();
    assert_eq!(slices.len(), SLICES.len());
    let origin: Vec<_> = slices
        .iter()
        .map(|s| {
            assert_eq!(s.rows.len(), 25);
            let row = s.rows.iter().find(|r| r.dim_a == 0.0 && r.dim_b == 0.0).unwrap();
            (row.q_left, row.q_right)
        })
        .collect();
    assert!(origin.iter().all(|&q| q == origin[0]));

    for slice in &slices {
        let text = fs::read_to_string(surface_dir(&run, 2).join(slice.file_name())).unwrap();
        assert_eq!(text.lines().next().unwrap(), "dim_a,dim_b,q_left,q_right");
        assert_eq!(text.lines().count(), 26);
    }

    let fl = short("fl-depth-5", 1, vec![0]);
    let fl_model = TrainedModel::from_params(&fl.model_config().unwrap(), &[vec![0.0; 40]]).unwrap();
    assert!(emit_q_surface(&fl_model, 3).is_err());
}

#[test]
fn report_rows_summarize_bundles() {
    let a = run_experiment(&ExperimentSpec::new(short("cp-full", 20, vec![0, 1]))).unwrap();
    let b = run_experiment(&ExperimentSpec::new(short("nn-167", 20, vec![0, 1]))).unwrap();
    let rows = compare_report(&[a.clone(), a.clone(), b]);
    assert_eq!(rows[0], rows[1]);
    assert_eq!((rows[0].param_count, rows[2].param_count), (46, 167));
    assert_eq!(rows[0].solved, 0);
    assert_eq!(rows[0].median_solve_episode, None);
    assert!((rows[0].final_100_mean - a.trailing_mean(100)).abs() < 1e-12);

    let table = render_table(&rows);
    let widths: Vec<usize> = table.lines().map(str::len).collect();
    assert_eq!(widths.len(), 4);
    assert!(table.starts_with("name"));

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.csv");
    write_report_csv(&path, &rows).unwrap();
    let text = fs::read_to_string(path).unwrap();
    assert_eq!(
        text.lines().next().unwrap(),
        "name,param_count,solved,seeds,median_solve_episode,final_100_mean"
    );
}

#[test]
fn solve_episodes_and_expectations() {
    let mut bundle = run_experiment(&ExperimentSpec::new(short("cp-full", 5, vec![0, 1, 2]))).unwrap();
    bundle.solve_episode = vec![Some(400), None, Some(2900)];
    assert_eq!(bundle.solved_count(), 2);
    assert_eq!(bundle.solved_within(1000), 1);
    assert_eq!(bundle.mean_solve_episode(), Some(1650.0));
    let rows = compare_report(&[bundle.clone()]);
    assert_eq!(rows[0].median_solve_episode, Some(1650.0));

    let need_two = Expectation::MinSolved { seeds: 2, within: 3000 };
    assert!(need_two.evaluate(&bundle).0);
    assert!(!Expectation::NoneSolved { within: 3000 }.evaluate(&bundle).0);
    assert!(Expectation::NoneSolved { within: 399 }.evaluate(&bundle).0);
    assert_eq!(expectation("cp-full").unwrap().horizon(), 3000);
    assert!(expectation("cp-output-only").is_none());
}
