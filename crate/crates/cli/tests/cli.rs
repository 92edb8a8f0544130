use assert_cmd::Command;
use predicates::prelude::*;
use std::path::Path;

fn semidot() -> Command {
    Command::cargo_bin("semidot").unwrap()
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap()
}

#[test]
fn tf_harmonic_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let out_a = tmp.path().join("a");
    let out_b = tmp.path().join("b");
    for out in [&out_a, &out_b] {
        semidot()
            .args(["--preset", "harmonic-test", "--grid-n", "64"])
            .arg("--out-dir")
            .arg(out)
            .arg("tf")
            .assert()
            .success()
            .stdout(predicate::str::contains("mu"));
    }
    let a = read(&out_a, "tf.csv");
    let b = read(&out_b, "tf.csv");
    assert_eq!(a, b, "reruns must be byte-identical");
    assert!(a.starts_with("# config-hash:"));
}

#[test]
fn tf_harmonic_chemical_potential() {
    // W = |x|^2 without Coulomb: int (mu - W)_+ = pi mu^2 / 2 = 2 pi
    // fixes mu = 2.
    let tmp = tempfile::tempdir().unwrap();
    semidot()
        .args(["--preset", "harmonic-test", "--grid-n", "96"])
        .arg("--out-dir")
        .arg(tmp.path())
        .arg("tf")
        .assert()
        .success()
        .stdout(predicate::str::contains("mu            1.9999"))
        .stdout(predicate::str::contains("mass          1.000000000000e0"));
}

#[test]
fn orbits_harmonic_period_pi() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.cfg");
    std::fs::write(&cfg, "orbits_k = 3\nmax_period = 8\n").unwrap();
    semidot()
        .args(["--preset", "harmonic-test", "--grid-n", "64"])
        .arg("--config")
        .arg(&cfg)
        .arg("--out-dir")
        .arg(tmp.path())
        .arg("orbits")
        .assert()
        .success()
        .stdout(predicate::str::contains("T=  3.14159"));
    let csv = read(tmp.path(), "orbits.csv");
    let rows = csv.lines().filter(|l| !l.starts_with('#')).count();
    assert!(rows >= 2, "expected header plus at least one orbit row");
}

#[test]
fn atoms_fit_reports_constants() {
    let tmp = tempfile::tempdir().unwrap();
    semidot()
        .arg("--out-dir")
        .arg(tmp.path())
        .arg("atoms")
        .assert()
        .success()
        .stdout(predicate::str::contains("fitted c"))
        .stdout(predicate::str::contains("-0.018"))
        .stdout(predicate::str::contains("-0.18"))
        .stdout(predicate::str::contains("residual sign changes"));
    assert!(tmp.path().join("atoms.csv").exists());
    assert!(tmp.path().join("atoms.svg").exists());
}

#[test]
fn atoms_accepts_custom_dataset() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data.csv");
    std::fs::write(
        &data,
        "N,E_corr_Ha,source\n10,-0.4,experimental\n20,-1.0,experimental\n30,-1.7,ext-HF\n40,-2.5,ext-HF\n",
    )
    .unwrap();
    semidot()
        .arg("--out-dir")
        .arg(tmp.path())
        .arg("atoms")
        .arg("--data")
        .arg(&data)
        .assert()
        .success()
        .stdout(predicate::str::contains("rows          4"));
}

#[test]
fn atoms_rejects_malformed_dataset() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("bad.csv");
    std::fs::write(&data, "N,E_corr_Ha,source\n10,-0.4\n").unwrap();
    semidot()
        .arg("--out-dir")
        .arg(tmp.path())
        .arg("atoms")
        .arg("--data")
        .arg(&data)
        .assert()
        .failure()
        .stderr(predicate::str::contains("expected N,E_corr_Ha,source"));
}

#[test]
fn flags_override_config_file() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.cfg");
    std::fs::write(&cfg, "preset = harmonic-test\ngrid_n = 48\n").unwrap();
    semidot()
        .arg("--config")
        .arg(&cfg)
        .args(["--grid-n", "64"])
        .arg("--out-dir")
        .arg(tmp.path())
        .arg("tf")
        .assert()
        .success()
        .stdout(predicate::str::contains("n=64"));
}

#[test]
fn unknown_preset_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    semidot()
        .args(["--preset", "square-well"])
        .arg("--out-dir")
        .arg(tmp.path())
        .arg("tf")
        .assert()
        .failure()
        .stderr(predicate::str::contains("unknown preset"));
}

#[test]
fn bad_n_range_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    semidot()
        .args(["--n-range", "50:10"])
        .arg("--out-dir")
        .arg(tmp.path())
        .arg("tf")
        .assert()
        .failure()
        .stderr(predicate::str::contains("n-range"));
}

#[test]
fn unknown_config_key_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.cfg");
    std::fs::write(&cfg, "gridn = 64\n").unwrap();
    semidot()
        .arg("--config")
        .arg(&cfg)
        .arg("--out-dir")
        .arg(tmp.path())
        .arg("tf")
        .assert()
        .failure()
        .stderr(predicate::str::contains("unknown config key"));
}
