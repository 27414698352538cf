//! End-to-end runs of the command-line tool.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ionfridge::measurement::{synthetic_flopping, write_samples, FitOptions, FlopAmplitudes};
use ionfridge::states::thermal_distribution;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_ionfridge"));
    c.env_remove("IONFRIDGE_OUT");
    c
}

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../scenarios")
        .join(format!("{name}.json"))
}

fn run(args: &[&str], out: &Path) -> Output {
    bin()
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

#[test]
fn simulate_writes_trajectory_with_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        &[
            "simulate",
            scenario("fig3a").to_str().unwrap(),
            "--epsilon",
            "1e-3",
        ],
        dir.path(),
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(dir.path().join("fig3a-trajectory.csv")).unwrap();
    assert!(!text.contains('\r'));
    for key in [
        "# software: ionfridge",
        "# hbar_J_s: 1.0545718e-34",
        "# epsilon: 0.001",
        "# retained_weight:",
        "# sector_count:",
    ] {
        assert!(text.contains(key), "missing {key}");
    }
    let header = text.lines().find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(header, "tau_us,nbar_h,nbar_w,nbar_c");
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 82);
    assert!(dir.path().join("fig3a-steady-state.csv").exists());
    assert!(dir.path().join("fig3a-single-shot.csv").exists());
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        assert_eq!(
            code(&run(&["fig4", scenario("fig4").to_str().unwrap()], d.path())),
            0
        );
        assert_eq!(
            code(&run(&["simulate", scenario("fig3a").to_str().unwrap()], d.path())),
            0
        );
    }
    for f in ["fig4.csv", "fig3a-trajectory.csv", "fig3a-single-shot.csv"] {
        let x = std::fs::read(a.path().join(f)).unwrap();
        let y = std::fs::read(b.path().join(f)).unwrap();
        assert_eq!(x, y, "{f} differs");
    }
}

#[test]
fn env_var_sets_output_dir_and_flag_wins() {
    let env_dir = tempfile::tempdir().unwrap();
    let flag_dir = tempfile::tempdir().unwrap();
    let o = bin()
        .args(["coupling", "--trap", "b"])
        .env("IONFRIDGE_OUT", env_dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert!(env_dir.path().join("coupling.csv").exists());
    let o = bin()
        .args(["coupling", "--trap", "a", "--out"])
        .arg(flag_dir.path())
        .env("IONFRIDGE_OUT", env_dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert!(flag_dir.path().join("coupling.csv").exists());
    assert!(String::from_utf8_lossy(&o.stderr).contains("warning"));
}

#[test]
fn figure_commands_run() {
    let dir = tempfile::tempdir().unwrap();
    for (cmd, name, file) in [
        ("fig2", "fig2", "fig2-equilibria.csv"),
        ("fig3", "fig3-thermal", "fig3-thermal-traces.csv"),
        ("fig3", "fig3-squeezed", "fig3-squeezed-summary.csv"),
    ] {
        let o = run(
            &[cmd, scenario(name).to_str().unwrap(), "--rule", "window:240"],
            dir.path(),
        );
        assert_eq!(
            code(&o),
            0,
            "{cmd} {name}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
        let text = std::fs::read_to_string(dir.path().join(file)).unwrap();
        assert!(text.contains("# steady_state_rule: window:240"));
    }
    let o = run(&["steady-state"], dir.path());
    assert_eq!(code(&o), 0);
    let table = std::fs::read_to_string(dir.path().join("steady-state.csv")).unwrap();
    assert_eq!(table.lines().filter(|l| !l.starts_with('#')).count(), 11);
}

#[test]
fn oracle_check_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["oracle-check", "--cap", "4"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(dir.path().join("oracle-check.csv").exists());
}

#[test]
fn fit_recovers_thermal_occupation() {
    let dir = tempfile::tempdir().unwrap();
    let opts = FitOptions::default();
    let times: Vec<f64> = (0..=200).map(|i| i as f64 * 1e-6).collect();
    let p = thermal_distribution(1.82, 200).unwrap().p;
    let samples =
        synthetic_flopping(&p, &opts.sideband, &FlopAmplitudes::default(), &times, 0.02, 3).unwrap();
    let data = dir.path().join("flop.csv");
    write_samples(std::fs::File::create(&data).unwrap(), &samples).unwrap();
    let o = run(&["fit", data.to_str().unwrap(), "--model", "thermal"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let table = std::fs::read_to_string(dir.path().join("fit-thermal.csv")).unwrap();
    let nbar: f64 = table
        .lines()
        .find(|l| l.starts_with("nbar,"))
        .and_then(|l| l.split(',').nth(1))
        .unwrap()
        .parse()
        .unwrap();
    assert!((nbar - 1.82).abs() < 0.15, "nbar {nbar}");
}

#[test]
fn validation_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    let mut json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(scenario("fig3a")).unwrap()).unwrap();
    json["colour"] = "blue".into();
    std::fs::write(&bad, json.to_string()).unwrap();
    let fig3a = scenario("fig3a");
    let cases: Vec<Vec<&str>> = vec![
        vec!["simulate", bad.to_str().unwrap()],
        vec!["simulate", "/does/not/exist.json"],
        vec!["simulate", fig3a.to_str().unwrap(), "--epsilon", "2"],
        vec!["simulate", fig3a.to_str().unwrap(), "--rule", "median"],
        vec!["fig3", fig3a.to_str().unwrap(), "--rule", "window:5000"],
        vec!["fig2", fig3a.to_str().unwrap()],
        vec!["coupling", "--trap", "100,200,50"],
        vec!["fit", "x.csv", "--model", "gaussian"],
    ];
    for args in cases {
        let o = run(&args, dir.path());
        assert_eq!(code(&o), 2, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn numerical_failure_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("flat.csv");
    let mut text = String::from("t_us,p_up,sigma\n");
    for i in 0..41 {
        text.push_str(&format!("{},0.3,0.02\n", 5 * i));
    }
    std::fs::write(&data, text).unwrap();
    let o = run(&["fit", data.to_str().unwrap(), "--model", "thermal"], dir.path());
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
}
