use std::process::Command;

fn qrl(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_qrl"))
        .args(args)
        .output()
        .unwrap()
}

#[test]
fn run_report_and_surface_commands() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();

    let run = qrl(&["run", "--preset", "cp-full", "--seeds", "0..2", "--episodes", "8", "--out", out]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let run_dir = dir.path().join("cp-full");
    assert!(run_dir.join("scores.csv").is_file());

    // 8 episodes cannot meet the 8-of-10 solve expectation
    let asserted = qrl(&["run", "--preset", "cp-full", "--seeds", "0", "--episodes", "8", "--out", out, "--assert"]);
    assert!(!asserted.status.success());
    assert!(String::from_utf8_lossy(&asserted.stdout).contains("FAIL cp-full"));

    let report = qrl(&["report", run_dir.to_str().unwrap()]);
    assert!(report.status.success());
    assert!(String::from_utf8_lossy(&report.stdout).contains("cp-full"));

    let surface = qrl(&["q-surface", run_dir.to_str().unwrap(), "--seed", "0", "--resolution", "3"]);
    assert!(surface.status.success(), "{}", String::from_utf8_lossy(&surface.stderr));
    assert!(run_dir.join("surfaces/seed_0/q_surface_phi_phi_dot.csv").is_file());
}

#[test]
fn config_file_runs_like_the_preset() {
    let dir = tempfile::tempdir().unwrap();
    let shown = qrl(&["presets", "fl-depth-5"]);
    assert!(shown.status.success());
    let path = dir.path().join("fl.toml");
    std::fs::write(&path, &shown.stdout).unwrap();

    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let common = ["--seeds", "1,2", "--episodes", "10", "--out"];
    let mut from_file = vec!["run", "--config", path.to_str().unwrap()];
    from_file.extend(common);
    from_file.push(a.to_str().unwrap());
    let mut from_preset = vec!["run", "--preset", "fl-depth-5"];
    from_preset.extend(common);
    from_preset.push(b.to_str().unwrap());
    assert!(qrl(&from_file).status.success());
    assert!(qrl(&from_preset).status.success());
    assert_eq!(
        std::fs::read(a.join("fl-depth-5/scores.csv")).unwrap(),
        std::fs::read(b.join("fl-depth-5/scores.csv")).unwrap()
    );
}

#[test]
fn gradcheck_and_bad_arguments() {
    let check = qrl(&["gradcheck", "--circuits", "5"]);
    assert!(check.status.success());
    assert!(String::from_utf8_lossy(&check.stdout).contains("adjoint_vs_shift"));

    assert!(!qrl(&["run", "--preset", "no-such-preset"]).status.success());
    assert!(!qrl(&["run"]).status.success());
    assert!(!qrl(&["run", "--preset", "cp-full", "--seeds", "3..3"]).status.success());
}
