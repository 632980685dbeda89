use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_stirred-ring");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn code(args: &[&str]) -> i32 {
    run(args).status.code().expect("exit code")
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    let mut all: Vec<&str> = args.to_vec();
    all.extend(["--out", dir.to_str().unwrap()]);
    let out = run(&all);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

/// Rows of a CSV file as (header, records) with comment lines removed.
fn table(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = read(path);
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    (header, rows)
}

fn column(path: &Path, name: &str) -> Vec<f64> {
    let (header, rows) = table(path);
    let i = header.iter().position(|h| h == name).unwrap();
    rows.iter().map(|r| r[i].parse().unwrap()).collect()
}

const SMALL: &[&str] = &[
    "--n-atoms", "3", "--modes-per-side", "2", "--barrier", "0.08", "--coupling", "5",
];

fn jobs() -> Vec<(&'static str, Vec<&'static str>)> {
    let with = |head: &[&'static str], tail: &[&'static str]| {
        let mut v = head.to_vec();
        v.extend_from_slice(SMALL);
        v.extend_from_slice(tail);
        v
    };
    vec![
        ("spectrum", with(&["spectrum"], &["--omega-min", "0", "--omega-max", "2pi", "--omega-steps", "9", "--levels", "3"])),
        ("gap_vs_g", with(&["gap-vs-g"], &["--gamma-min", "0.1", "--gamma-max", "10", "--gamma-steps", "5", "--gamma-scale", "log", "--levels", "3"])),
        ("gap_vs_n_noon", vec!["gap-vs-n", "--preset", "fig4a", "--n-max", "8"]),
        ("gap_vs_n_tg", vec!["gap-vs-n", "--preset", "fig4b"]),
        ("qfi_omega", with(&["qfi-omega"], &["--omega-min", "0.96pi", "--omega-max", "1.04pi", "--omega-steps", "5"])),
        ("qfi_temp", with(&["qfi-temp"], &["--t-min", "0", "--t-max", "0.5", "--t-steps", "6", "--levels", "5", "--gammas", "1,5"])),
        ("ramp", with(&["ramp"], &["--param", "omega", "--from", "0", "--to", "pi", "--duration", "20", "--steps", "200"])),
    ]
}

fn csv_files(dir: &Path) -> Vec<PathBuf> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    files.sort();
    files
}

#[test]
fn exit_codes() {
    assert_eq!(code(&["--version"]), 0);
    assert_eq!(code(&["--help"]), 0);
    assert_eq!(code(&[]), 2);
    assert_eq!(code(&["fly"]), 2);
    assert_eq!(code(&["spectrum", "--colour", "red"]), 2);
    assert_eq!(code(&["spectrum", "--preset", "fig2", "--out", "/nonexistent/out"]), 2);
    assert_eq!(code(&["spectrum", "--preset", "fig9", "--out", "."]), 2);
    assert_eq!(code(&["spectrum", "--set", "colour=red", "--out", "."]), 2);
    assert_eq!(code(&["spectrum", "--n-atoms", "0", "--out", "."]), 2);

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "barrier = 0.1\nnot a pair\n").unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(code(&["spectrum", "--config", cfg.to_str().unwrap(), "--out", out]), 2);

    // large coupling in a tiny window: no rescale in [1, 10] reaches the target gap
    let mut args = vec!["spectrum", "--calibrate", "--omega-steps", "3", "--out", out];
    args.extend_from_slice(SMALL);
    assert_eq!(code(&args), 3);
}

#[test]
fn selftest_passes() {
    let out = run(&["selftest"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().count() >= 5);
    assert!(text.lines().all(|l| l.starts_with("ok")), "{text}");
}

#[test]
fn outputs_are_deterministic_and_carry_units() {
    for (name, args) in jobs() {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        run_in(a.path(), &args);
        run_in(b.path(), &args);
        let files = csv_files(a.path());
        assert!(!files.is_empty(), "{name}: no CSV written");
        for path in files {
            let file = path.file_name().unwrap();
            let text = read(&path);
            assert_eq!(text, read(&b.path().join(file)), "{name}: {file:?} differs between runs");
            let mut lines = text.lines();
            let first = lines.next().unwrap();
            assert!(first.starts_with("# ") && first.contains(':'), "{name}: no units line");
            let header = text.lines().find(|l| !l.starts_with('#')).unwrap();
            assert!(header.split(',').all(|c| !c.is_empty() && c.chars().all(|ch| ch.is_ascii_alphanumeric() || ch == '_')));
        }
        let metas: Vec<PathBuf> = std::fs::read_dir(a.path())
            .unwrap()
            .map(|e| e.unwrap().path())
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        assert_eq!(metas.len(), 1, "{name}");
        let meta: Value = serde_json::from_str(&read(&metas[0])).unwrap();
        assert!(meta["version"].is_string() && meta["wall_time_s"].is_number(), "{name}");
    }
}

#[test]
fn golden_outputs() {
    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    let update = std::env::var_os("UPDATE_GOLDEN").is_some();
    for (name, args) in jobs() {
        let dir = tempfile::tempdir().unwrap();
        run_in(dir.path(), &args);
        for path in csv_files(dir.path()) {
            let file = path.file_name().unwrap().to_str().unwrap();
            let want_path = golden.join(format!("{name}__{file}"));
            let got = read(&path);
            if update {
                std::fs::create_dir_all(&golden).unwrap();
                std::fs::write(&want_path, &got).unwrap();
            } else {
                assert_eq!(got, read(&want_path), "{name}: {file} differs from golden copy");
            }
        }
    }
}

#[test]
fn metadata_echoes_the_job() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["spectrum", "--omega-steps", "3", "--seed", "11", "--dump-basis", "--dump-operator"];
    args.extend_from_slice(SMALL);
    run_in(dir.path(), &args);
    let meta: Value = serde_json::from_str(&read(&dir.path().join("spectrum.json"))).unwrap();
    assert_eq!(meta["command"], "spectrum");
    assert_eq!(meta["seed"], 11);
    assert_eq!(meta["basis_size"], 20);
    assert_eq!(meta["params"]["n_atoms"], 3);
    assert!(meta["wall_time_s"].as_f64().unwrap() >= 0.0);
    let (header, rows) = table(&dir.path().join("basis.csv"));
    assert_eq!(rows.len(), 20);
    assert_eq!(header, ["index", "K", "occupations"]);
    let (header, rows) = table(&dir.path().join("hamiltonian_coo.csv"));
    assert_eq!(header, ["row", "col", "value"]);
    assert!(rows.len() >= 20);
}

#[test]
fn qfi_peaks_at_the_crossing() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["qfi-omega", "--omega-min", "0.96pi", "--omega-max", "1.04pi", "--omega-steps", "5"];
    args.extend_from_slice(SMALL);
    run_in(dir.path(), &args);
    let path = dir.path().join("qfi_omega.csv");
    let qfi = column(&path, "qfi");
    let omega = column(&path, "omega");
    let peak = (0..qfi.len()).max_by(|&i, &j| qfi[i].total_cmp(&qfi[j])).unwrap();
    assert!((omega[peak] - std::f64::consts::PI).abs() < 1e-12);
    assert!((qfi[peak] - 9.0).abs() < 0.18);
}

#[test]
fn scenario_report_json() {
    let out = run(&["scenario", "--preset", "li7-100", "--json"]);
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let items = v["report"]["items"].as_array().unwrap();
    let value = |key: &str| {
        items.iter().find(|i| i["key"] == key).unwrap()["value"].as_f64().unwrap()
    };
    assert!((value("stirring_frequency") - 0.29).abs() < 0.01);
    assert!((value("mean_spacing") - 3.1e-6).abs() < 0.05e-6);

    let dir = tempfile::tempdir().unwrap();
    let out = run(&["scenario", "--preset", "li7-100", "--n-atoms", "50", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success());
    let text = read(&dir.path().join("scenario.txt"));
    assert_eq!(text, String::from_utf8(out.stdout).unwrap());
    let v: Value = serde_json::from_str(&read(&dir.path().join("scenario.json"))).unwrap();
    assert_eq!(v["report"]["scenario"]["n_atoms"], 50);
    assert_eq!(code(&["scenario", "--preset", "li7-200"]), 2);
}
