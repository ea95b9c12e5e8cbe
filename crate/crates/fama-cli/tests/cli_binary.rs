//! End-to-end tests of the `fama-sim` binary: flag handling, config file
//! loading, the documented exit codes, CSV schema, and rerun determinism.

use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fama-sim"))
}

#[test]
fn pdf_z_preset_writes_stable_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("pdf.csv");
    let run = || {
        let status = bin()
            .args([
                "--preset", "pdf-z", "--trials", "2000", "--seed", "7", "--out",
            ])
            .arg(&out)
            .status()
            .unwrap();
        assert!(status.success());
        std::fs::read(&out).unwrap()
    };
    let first = run();
    let second = run();
    assert_eq!(first, second, "reruns must be byte-identical");

    let text = String::from_utf8(first).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# experiment=pdf-z"));
    assert!(text.contains("# seed=7"));
    assert!(text.contains("# spec_hash="));
    let header = text.lines().find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(header, "z,empirical_density,analytic_density");
    let rows = text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.is_empty())
        .count();
    assert_eq!(rows, 1 + 60, "header plus one row per bin");
}

#[test]
fn config_file_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    let out = dir.path().join("custom.csv");
    std::fs::write(
        &cfg,
        "[channel]\nn1 = 2\nn2 = 2\nw1 = 0.5\nw2 = 0.5\n\
         [receiver]\nscheme = sfama\n\
         [run]\nexperiment = custom\nn_users = 3\ntrials = 400\nmodulation = bpsk\n",
    )
    .unwrap();
    let output = bin()
        .arg("--config")
        .arg(&cfg)
        .args(["--set", "run.n_users=4", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert!(
        output.status.success(),
        "{}",
        String::from_utf8_lossy(&output.stderr)
    );
    let text = std::fs::read_to_string(&out).unwrap();
    let row = text.lines().last().unwrap();
    assert!(row.starts_with("sfama,1,4,"), "row {row}");
}

#[test]
fn exit_code_2_on_config_errors() {
    // invalid field value
    let output = bin().args(["--set", "receiver.rho=1.5"]).output().unwrap();
    assert_eq!(output.status.code(), Some(2));
    let err = String::from_utf8_lossy(&output.stderr);
    assert!(err.starts_with("error[config]"), "{err}");
    // unknown preset
    let output = bin().args(["--preset", "frobnicate"]).output().unwrap();
    assert_eq!(output.status.code(), Some(2));
    // malformed config file
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "[channel]\nwat = 1\n").unwrap();
    let output = bin().arg("--config").arg(&cfg).output().unwrap();
    assert_eq!(output.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&output.stderr).contains("line 2"));
}

#[test]
fn exit_code_4_on_io_errors() {
    // missing config file
    let output = bin()
        .args(["--config", "/no/such/file.cfg"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&output.stderr).starts_with("error[io]"));
    // unwritable output path
    let output = bin()
        .args([
            "--preset",
            "pdf-z",
            "--trials",
            "50",
            "--set",
            "run.n_users=2",
            "--out",
            "/no/such/dir/out.csv",
        ])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(4));
}

#[test]
fn impedance_file_coupling_through_the_cli() {
    let dir = tempfile::tempdir().unwrap();
    // 4-port identity-like impedance: diagonal Z_T gives Gamma = I/2, which
    // scales signal and interference alike and leaves the BER unchanged
    let imp = dir.path().join("z.txt");
    let mut text = String::from("4\n");
    for r in 0..4 {
        for c in 0..4 {
            text.push_str(if r == c { "50 0  " } else { "0 0  " });
        }
        text.push('\n');
    }
    std::fs::write(&imp, text).unwrap();
    let out = dir.path().join("c.csv");
    let output = bin()
        .args([
            "--set",
            "channel.n1=2",
            "--set",
            "channel.n2=2",
            "--set",
            "channel.w1=0.5",
            "--set",
            "channel.w2=0.5",
            "--set",
            "channel.coupling=from-file",
            "--set",
        ])
        .arg(format!("channel.impedance_file={}", imp.display()))
        .args(["--set", "run.trials=300", "--set", "run.n_users=2", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert!(
        output.status.success(),
        "{}",
        String::from_utf8_lossy(&output.stderr)
    );
    // a wrong-sized impedance file is a config-category failure
    let output = bin()
        .args(["--set", "channel.coupling=from-file", "--set"])
        .arg(format!("channel.impedance_file={}", imp.display()))
        .args(["--set", "run.trials=50"])
        .output()
        .unwrap();
    assert_eq!(
        output.status.code(),
        Some(2),
        "4-port file on the default 16-port grid"
    );
}

#[test]
fn nrf_compare_preset_orders_single_chain_schemes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("nrf.csv");
    let status = bin()
        .args([
            "--preset",
            "nrf-compare",
            "--trials",
            "800",
            "--seed",
            "3",
            "--out",
        ])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    let rate_of = |prefix: &str| -> f64 {
        let row = text
            .lines()
            .find(|l| l.starts_with(prefix))
            .unwrap_or_else(|| panic!("no row starting with {prefix}"));
        row.split(',').nth(5).unwrap().parse().unwrap()
    };
    let puma = rate_of("puma,1,");
    let cuma = rate_of("cuma,1,");
    assert!(
        puma >= cuma,
        "single-chain ordering: puma {puma} vs cuma {cuma}"
    );
}

#[test]
fn missing_impedance_file_key_is_config_error() {
    let output = bin()
        .args([
            "--set",
            "channel.coupling=from-file",
            "--set",
            "run.trials=10",
        ])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
}
