//! End-to-end tests of the CLI contracts: flags, config files, presets,
//! artifact layout, atomicity and reproducibility.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_t1echo"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("failed to spawn t1echo")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap()
}

/// Rows after the `# config:` comment and the header.
fn csv_payload(text: &str) -> Vec<String> {
    text.lines().skip(2).map(|l| l.to_string()).collect()
}

#[test]
fn derive_reports_working_point() {
    let out = run(&[
        "derive",
        "--v-perp",
        "5",
        "--delta-omega",
        "5",
        "--format",
        "json",
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let t_pi = v["t_pi"].as_f64().unwrap();
    let t_swap = v["t_swap"].as_f64().unwrap();
    assert!((t_pi - 0.4442882938158366).abs() < 1e-12);
    assert!((t_swap - 0.6283185307179586).abs() < 1e-12);
    assert!(t_pi < t_swap);
    assert!((v["gamma_plus"].as_f64().unwrap() - 0.5).abs() < 1e-15);
    assert!(!v["clamp_engaged"].as_bool().unwrap());
}

#[test]
fn derive_reports_clamp_at_resonance() {
    let out = run(&["derive", "--v-perp", "5", "--delta-omega", "0"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("clamp_engaged           true"));
    assert!(text.contains("clamped to -250"));
}

#[test]
fn invalid_parameter_names_the_key() {
    let out = run(&["derive", "--v-perp", "-3", "--delta-omega", "0"]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("v_perp"));

    let out = run(&["decay", "--gamma1-m", "-0.5", "--output", "/tmp/никуда.csv"]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("gamma1_m"));
}

#[test]
fn decay_fig5_matches_echo_law() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fig5.csv");
    let out = run(&[
        "decay",
        "--preset",
        "fig5",
        "--points",
        "21",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let text = read(&path);
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# config: "));
    assert_eq!(
        lines.next().unwrap(),
        "delta_omega,time,p1q_simulated,p1q_free,p1q_reference_qubit,p1q_reference_gammaplus"
    );
    let rows = csv_payload(&text);
    assert_eq!(rows.len(), 3 * 21);
    for row in &rows {
        let cells: Vec<f64> = row.split(',').map(|c| c.parse().unwrap()).collect();
        let (time, p_seq, p_ref_gp) = (cells[1], cells[2], cells[5]);
        assert!(
            (p_seq - (-0.5 * time).exp()).abs() < 1e-6,
            "echo law broken in artifact at t={time}"
        );
        assert!((p_ref_gp - (-0.5 * time).exp()).abs() < 1e-12);
    }
}

#[test]
fn decay_fig6_starts_after_pulse_cost() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fig6.csv");
    let out = run(&[
        "decay",
        "--preset",
        "fig6",
        "--points",
        "11",
        "--delta-omega",
        "0",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let rows = csv_payload(&read(&path));
    let first: Vec<f64> = rows[0].split(',').map(|c| c.parse().unwrap()).collect();
    // First reported time is 2 t_pi > 0 and the population is already < 1.
    assert!(first[1] > 0.02 && first[1] < 0.03);
    assert!(first[2] < 1.0);
}

#[test]
fn pulse_loss_flat_without_noise() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("loss.csv");
    let out = run(&[
        "pulse-loss",
        "--gamma1-q",
        "0",
        "--delta-omega",
        "0.5,2,5,12",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    for row in csv_payload(&read(&path)) {
        let cells: Vec<f64> = row.split(',').map(|c| c.parse().unwrap()).collect();
        assert!((cells[1] - 1.0).abs() < 1e-10);
    }
}

#[test]
fn tomography_zero_noise_is_z_channel() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("chi.json");
    let out = run(&[
        "tomography",
        "--v-perp",
        "5",
        "--delta-omega",
        "5",
        "--gamma1-q",
        "0",
        "--t-max",
        "0.9",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let v: serde_json::Value = serde_json::from_str(&read(&path)).unwrap();
    let zz = &v["chi_reconstructed"][3][3];
    assert!((zz[0].as_f64().unwrap() - 1.0).abs() < 1e-10);
    assert!(zz[1].as_f64().unwrap().abs() < 1e-12);
    assert_eq!(v["basis"][3], "Z");
    // The analytic comparison at gamma_plus = 0 is the same Z channel.
    assert!((v["process_fidelity"].as_f64().unwrap() - 1.0).abs() < 1e-9);
}

#[test]
fn tomography_rejects_csv() {
    let out = run(&["tomography", "--format", "csv", "--output", "/tmp/chi.csv"]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("format"));
}

#[test]
fn trajectory_fig2_closes() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fig2.csv");
    let out = run(&[
        "trajectory",
        "--preset",
        "fig2",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let text = read(&path);
    assert_eq!(text.lines().nth(1).unwrap(), "time,x,y,z,p_excited_qubit");
    let rows = csv_payload(&text);
    let first: Vec<f64> = rows[0].split(',').map(|c| c.parse().unwrap()).collect();
    assert_eq!(first, vec![0.0, 0.0, 0.0, 1.0, 1.0]);
    let last: Vec<f64> = rows
        .last()
        .unwrap()
        .split(',')
        .map(|c| c.parse().unwrap())
        .collect();
    assert!(
        last[3] > 1.0 - 1e-10,
        "trajectory does not close: z = {}",
        last[3]
    );
}

#[test]
fn trajectory_fig3_mid_sequence_on_x_axis() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fig3.csv");
    let out = run(&[
        "trajectory",
        "--preset",
        "fig3",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let rows = csv_payload(&read(&path));
    // T = 2 pi / omega0; the pre-recovery state sits at |x| = 1, z = 0.
    let t_total = 2.0 * std::f64::consts::PI / 50f64.sqrt();
    let target: Vec<f64> = rows
        .iter()
        .map(|r| {
            r.split(',')
                .map(|c| c.parse().unwrap())
                .collect::<Vec<f64>>()
        })
        .filter(|c| (c[0] - t_total).abs() < 1e-9)
        .map(|c| c[1])
        .collect();
    assert!(!target.is_empty());
    // Both the pre- and post-recovery samples share the timestamp; the
    // pre-recovery one has |x| = 1.
    assert!(
        target.iter().any(|&x| (x.abs() - 1.0).abs() < 1e-9),
        "no sample with |x| = 1 at T"
    );
    let last: Vec<f64> = rows
        .last()
        .unwrap()
        .split(',')
        .map(|c| c.parse().unwrap())
        .collect();
    assert!((last[3] - 1.0).abs() < 1e-9);
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("run.toml");
    std::fs::write(
        &cfg_path,
        "v_perp = 4.0\ndelta_omega = [3.0]\ngamma1_q = 1.0\ngammaphi_q = 0.25\n",
    )
    .unwrap();
    let out = run(&[
        "derive",
        "--config",
        cfg_path.to_str().unwrap(),
        "--format",
        "json",
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!((v["omega0"].as_f64().unwrap() - 5.0).abs() < 1e-12);
    assert!((v["gamma2_q"].as_f64().unwrap() - 0.75).abs() < 1e-12);

    // A flag overrides the file value.
    let out = run(&[
        "derive",
        "--config",
        cfg_path.to_str().unwrap(),
        "--delta-omega",
        "0",
        "--format",
        "json",
    ]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!((v["omega0"].as_f64().unwrap() - 4.0).abs() < 1e-12);
}

#[test]
fn unknown_config_key_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("bad.toml");
    std::fs::write(&cfg_path, "v_prep = 4.0\n").unwrap();
    let out = run(&["derive", "--config", cfg_path.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("v_prep"));
}

#[test]
fn preset_subcommand_mismatch_is_rejected() {
    let out = run(&["decay", "--preset", "fig7", "--output", "/tmp/x.csv"]);
    assert!(!out.status.success());
    let err = stderr(&out);
    assert!(
        err.contains("pulse-loss") && err.contains("decay"),
        "got: {err}"
    );
}

#[test]
fn missing_output_fails_cleanly() {
    let out = run(&["decay", "--preset", "fig5"]);
    assert!(!out.status.success());
    assert!(stderr(&out).contains("--output"));
}

#[test]
fn failed_write_leaves_no_partial_file() {
    let out = run(&[
        "decay",
        "--preset",
        "fig5",
        "--points",
        "5",
        "--output",
        "/nonexistent-dir/out.csv",
    ]);
    assert!(!out.status.success());
    assert!(!Path::new("/nonexistent-dir").exists());
}

#[test]
fn rerun_is_bit_identical_and_config_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let p1 = dir.path().join("a.csv");
    let p2 = dir.path().join("b.csv");
    let args = |path: &Path| {
        vec![
            "decay".to_string(),
            "--preset".into(),
            "fig6".into(),
            "--points".into(),
            "9".into(),
            "--output".into(),
            path.display().to_string(),
        ]
    };
    assert!(bin().args(args(&p1)).output().unwrap().status.success());
    assert!(bin().args(args(&p2)).output().unwrap().status.success());
    let a = read(&p1);
    let b = read(&p2);
    // Identical numeric payloads; the embedded configs differ only in the
    // output path.
    assert_eq!(csv_payload(&a), csv_payload(&b));

    // Re-running from the embedded config block reproduces the payload.
    let cfg_json = a
        .lines()
        .next()
        .unwrap()
        .strip_prefix("# config: ")
        .unwrap();
    let cfg_path = dir.path().join("embedded.json");
    std::fs::write(&cfg_path, cfg_json).unwrap();
    let p3 = dir.path().join("c.csv");
    let out = run(&[
        "decay",
        "--config",
        cfg_path.to_str().unwrap(),
        "--output",
        p3.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    assert_eq!(csv_payload(&a), csv_payload(&read(&p3)));
}

#[test]
fn json_artifact_mirrors_csv() {
    let dir = tempfile::tempdir().unwrap();
    let pc = dir.path().join("d.csv");
    let pj = dir.path().join("d.json");
    for (path, fmt) in [(&pc, "csv"), (&pj, "json")] {
        let out = run(&[
            "decay",
            "--v-perp",
            "5",
            "--delta-omega",
            "5",
            "--t-max",
            "2",
            "--points",
            "5",
            "--model",
            "secular",
            "--output",
            path.to_str().unwrap(),
            "--format",
            fmt,
        ]);
        assert!(out.status.success(), "stderr: {}", stderr(&out));
    }
    let v: serde_json::Value = serde_json::from_str(&read(&pj)).unwrap();
    let csv_rows = csv_payload(&read(&pc));
    let json_rows = v["data"].as_array().unwrap();
    assert_eq!(csv_rows.len(), json_rows.len());
    assert_eq!(v["columns"][2], "p1q_simulated");
    assert_eq!(v["config"]["v_perp"].as_f64().unwrap(), 5.0);
    // Spot-check one value across formats.
    let c0: Vec<f64> = csv_rows[2].split(',').map(|c| c.parse().unwrap()).collect();
    let j0 = json_rows[2].as_array().unwrap();
    assert_eq!(c0[2], j0[2].as_f64().unwrap());
}

#[test]
fn rwa_warning_is_emitted() {
    let out = run(&[
        "derive",
        "--v-perp",
        "5",
        "--delta-omega",
        "0",
        "--epsilon",
        "20",
    ]);
    assert!(out.status.success());
    assert!(stderr(&out).contains("rotating-wave"));
}

#[test]
fn decay_single_point_at_origin() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("one.csv");
    let out = run(&[
        "decay",
        "--t-max",
        "0",
        "--points",
        "1",
        "--pulses",
        "none",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let rows = csv_payload(&read(&path));
    assert_eq!(rows.len(), 1);
    let cells: Vec<f64> = rows[0].split(',').map(|c| c.parse().unwrap()).collect();
    assert_eq!(cells[1], 0.0);
    assert!((cells[2] - 1.0).abs() < 1e-12);
}

#[test]
fn derive_accepts_any_preset() {
    let out = run(&[
        "derive",
        "--preset",
        "fig6",
        "--delta-omega",
        "1",
        "--format",
        "json",
    ]);
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    // fig6 pins gamma_phi_q = 0.5, so gamma_2q = 1.
    assert!((v["gamma2_q"].as_f64().unwrap() - 1.0).abs() < 1e-15);
    assert!((v["delta_omega_1"].as_f64().unwrap() + 25.0).abs() < 1e-12);
}
