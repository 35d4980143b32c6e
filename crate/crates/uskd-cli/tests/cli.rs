//! End-to-end tests of the `uskd` binary: exit-code contract, CSV content,
//! determinism, and configuration precedence.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn uskd() -> Command {
    Command::new(env!("CARGO_BIN_EXE_uskd"))
}

fn run(args: &[&str]) -> Output {
    uskd().args(args).output().expect("spawn uskd")
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("no exit code")
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("read {name}: {e}"))
}

/// Parse one `key=value` line out of a stats or manifest file.
fn field(text: &str, key: &str) -> String {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key}=")))
        .unwrap_or_else(|| panic!("missing {key} in:\n{text}"))
        .to_owned()
}

#[test]
fn exit_codes_follow_the_contract() {
    // Usage errors: invalid value and missing required option.
    let out = run(&["keygen", "--rounds", "0", "--out", "/tmp/uskd-unused"]);
    assert_eq!(exit_code(&out), 2, "{out:?}");
    let out = run(&["fig3b", "--n-large", "100", "--out", "/tmp/uskd-unused"]);
    assert_eq!(exit_code(&out), 2, "{out:?}");

    // Unknown flags go through clap, which also exits 2.
    let out = run(&["fig2", "--no-such-flag"]);
    assert_eq!(exit_code(&out), 2);

    // I/O error: the output directory cannot be created under a regular file.
    let tmp = tempfile::tempdir().unwrap();
    let blocker = tmp.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let out = run(&[
        "verify",
        "--quick",
    ]);
    assert_eq!(exit_code(&out), 0);
    let inside = blocker.join("sub");
    let out = run(&[
        "keygen",
        "--rounds",
        "10",
        "--out",
        inside.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 3, "{out:?}");

    // Verification failure under the injected fault.
    let out = run(&["verify", "--quick", "--self-test-negative"]);
    assert_eq!(exit_code(&out), 1);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("FAIL one-way-composition-oracle"), "{text}");

    // Threshold breach: full coupler noise forces key errors above the bound.
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "keygen",
        "--rounds",
        "400",
        "--coupler-range",
        "6.2832",
        "--max-error",
        "0.0001",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 4, "{out:?}");
}

#[test]
fn verify_prints_one_line_per_check() {
    let out = run(&["verify", "--quick"]);
    assert_eq!(exit_code(&out), 0);
    let text = String::from_utf8_lossy(&out.stdout);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 6, "{text}");
    for line in lines {
        assert!(line.starts_with("PASS "), "{line}");
    }
}

#[test]
fn quiet_coupler_trace_is_identically_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "fig2",
        "--panel",
        "avg-coupler",
        "--ranges",
        "0",
        "--n",
        "50",
        "--grid",
        "40",
        "--seed",
        "1",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0, "{out:?}");
    let csv = read(dir.path(), "fig2_avg_coupler_r00_0.0000.csv");
    let mut rows = 0;
    for line in csv.lines().skip(1) {
        let cols: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        assert!((cols[1] - 1.0).abs() < 1e-12, "{line}");
        assert!(cols[2].abs() < 1e-12, "{line}");
        rows += 1;
    }
    assert_eq!(rows, 40);
}

#[test]
fn pi_range_average_lands_on_three_quarters() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "fig2",
        "--panel",
        "avg-coupler",
        "--ranges",
        "3.14159",
        "--n",
        "2000",
        "--grid",
        "60",
        "--seed",
        "5",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0, "{out:?}");
    let csv = read(dir.path(), "fig2_avg_coupler_r00_3.1416.csv");
    let means: Vec<f64> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    let mean = means.iter().sum::<f64>() / means.len() as f64;
    assert!((mean - 0.75).abs() < 0.02, "mean = {mean}");
}

#[test]
fn reruns_with_the_same_seed_are_byte_identical() {
    let run_once = |dir: &Path| {
        let out = run(&[
            "fig2",
            "--panel",
            "avg-coupler",
            "--ranges",
            "1.0,6.2832",
            "--n",
            "100",
            "--grid",
            "30",
            "--seed",
            "42",
            "--out",
            dir.to_str().unwrap(),
        ]);
        assert_eq!(exit_code(&out), 0, "{out:?}");
    };
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    run_once(a.path());
    run_once(b.path());
    for name in ["fig2_avg_coupler_r00_1.0000.csv", "fig2_avg_coupler_r01_6.2832.csv"] {
        assert_eq!(read(a.path(), name), read(b.path(), name), "{name} differs");
    }
    // Manifests agree on everything except the wall-clock timestamps.
    for key in ["spec_digest", "seed", "tool_version", "output_files"] {
        assert_eq!(
            field(&read(a.path(), "manifest.txt"), key),
            field(&read(b.path(), "manifest.txt"), key),
        );
    }
}

#[test]
fn quiet_coupler_session_is_error_free_under_full_channel_noise() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "keygen",
        "--rounds",
        "2000",
        "--coupler-range",
        "0",
        "--chan-range",
        "6.2832",
        "--seed",
        "3",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0, "{out:?}");
    let stats = read(dir.path(), "stats.txt");
    let error_rate: f64 = field(&stats, "error_rate").parse().unwrap();
    let discard_rate: f64 = field(&stats, "discard_rate").parse().unwrap();
    assert_eq!(error_rate, 0.0);
    assert_eq!(discard_rate, 0.0);

    let rounds = read(dir.path(), "rounds.csv");
    assert_eq!(rounds.lines().count(), 2001);
    assert!(rounds.starts_with("round,bob_basis,alice_basis,"));
}

#[test]
fn intensity_tap_guesses_at_chance() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "keygen",
        "--rounds",
        "10000",
        "--eve",
        "tap",
        "--seed",
        "11",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0, "{out:?}");
    let rate: f64 = field(&read(dir.path(), "stats.txt"), "eve_guess_rate")
        .parse()
        .unwrap();
    assert!((rate - 0.5).abs() < 0.02, "eve_guess_rate = {rate}");
}

#[test]
fn config_file_supplies_defaults_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("run.cfg");
    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    fs::write(
        &cfg_path,
        format!(
            "# sweep configuration\npanel=avg-coupler\nranges=0\nn=20\ngrid=10\nseed=7\nout={}\n",
            out_a.display()
        ),
    )
    .unwrap();

    // Config alone.
    let out = run(&["fig2", "--config", cfg_path.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 0, "{out:?}");
    assert_eq!(field(&read(&out_a, "manifest.txt"), "seed"), "7");

    // Flags take precedence over config entries.
    let out = run(&[
        "fig2",
        "--config",
        cfg_path.to_str().unwrap(),
        "--seed",
        "9",
        "--out",
        out_b.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0, "{out:?}");
    assert_eq!(field(&read(&out_b, "manifest.txt"), "seed"), "9");
}

#[test]
fn seed_env_var_is_the_fallback() {
    let dir = tempfile::tempdir().unwrap();
    let out = uskd()
        .args([
            "fig2",
            "--panel",
            "avg-coupler",
            "--ranges",
            "0",
            "--n",
            "10",
            "--grid",
            "8",
            "--out",
            dir.path().to_str().unwrap(),
        ])
        .env("USKD_SEED", "1234")
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 0, "{out:?}");
    assert_eq!(field(&read(dir.path(), "manifest.txt"), "seed"), "1234");

    // A malformed value is a usage error.
    let out = uskd()
        .args([
            "fig2",
            "--panel",
            "avg-coupler",
            "--ranges",
            "0",
            "--out",
            dir.path().to_str().unwrap(),
        ])
        .env("USKD_SEED", "not-a-number")
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 2, "{out:?}");
}
