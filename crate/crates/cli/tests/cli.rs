//! End-to-end tests of the `dasc` binary: exit codes, output schemas,
//! and rerun determinism.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dasc"))
}

fn configs_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}\nstderr: {}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn assert_status(out: &Output, code: i32) {
    assert_eq!(
        out.status.code(),
        Some(code),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, body).expect("write config");
    path
}

const THREE_LEVEL_NO_PHONON_COUPLING: &str = r#"{
  "emitter": { "preset": "siv_three_level" },
  "phonon_bath": { "temperature_k": 10.0, "coupling_per_ps": 0.0 },
  "solver": { "grid_points": 201, "window_ghz": [-300.0, 300.0] }
}"#;

#[test]
fn bound_matches_reference_value_and_writes_report() {
    let dir = tempfile::tempdir().expect("tempdir");
    let out = bin()
        .args(["bound", "--t-kelvin", "10", "--gamma-per-ps", "1e-3", "--n-levels", "2"])
        .args(["--out".as_ref(), dir.path().as_os_str()])
        .output()
        .expect("run");
    assert_status(&out, 0);
    let report = stdout_json(&out);
    let bound = report["bound_w"].as_f64().expect("bound_w");
    assert!((bound - 9.57e-14).abs() <= 1e-3 * 9.57e-14, "bound {bound:e}");

    let written: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("bound.json")).unwrap()).unwrap();
    assert_eq!(written, report);
}

#[test]
fn bound_of_single_level_medium_is_zero() {
    let out = bin().args(["bound", "--n-levels", "1"]).output().expect("run");
    assert_status(&out, 0);
    assert_eq!(stdout_json(&out)["bound_w"].as_f64(), Some(0.0));
}

#[test]
fn budget_defaults_reproduce_reference_thresholds() {
    let out = bin()
        .args(["budget", "--t-kelvin", "10", "--e-opt-ev", "1"])
        .output()
        .expect("run");
    assert_status(&out, 0);
    let report = stdout_json(&out);

    let cycles = report["qe_threshold"]["cycles_per_nr_decay"].as_f64().unwrap();
    let min_qe = report["qe_threshold"]["min_qe"].as_f64().unwrap();
    assert!((1100.0..=1200.0).contains(&cycles), "cycles {cycles}");
    assert!((min_qe - 0.99914).abs() < 5e-6, "min_qe {min_qe}");

    // Provenance flags: anchored values true, stand-ins false, and the
    // assumed unit quantum efficiency marked as the idealized default.
    assert_eq!(report["inputs"]["t_kelvin"]["paper_default"], Value::Bool(true));
    assert_eq!(report["inputs"]["dipole_debye"]["paper_default"], Value::Bool(false));
    assert_eq!(report["inputs"]["n_refractive"]["paper_default"], Value::Bool(false));
    assert_eq!(report["assumed_qe"]["paper_default"], Value::Bool(true));

    // With the idealized efficiency the per-emitter net must be the
    // cooling power itself, and it must stay below the bound.
    let net = report["net"]["net_per_emitter_w"].as_f64().unwrap();
    let p_cool = report["cooling_power_w"].as_f64().unwrap();
    assert!((net - p_cool).abs() <= 1e-9 * p_cool.abs());
}

#[test]
fn budget_at_threshold_efficiency_nets_zero() {
    // At qe = min_qe with the kT-per-cycle proxy, gains cancel losses.
    let out = bin()
        .args(["budget", "--t-kelvin", "10", "--e-opt-ev", "1", "--qe", "0.999138267296"])
        .output()
        .expect("run");
    assert_status(&out, 0);
    let report = stdout_json(&out);
    let net = report["net"]["net_per_emitter_w"].as_f64().unwrap();
    let p_cool = report["cooling_power_w"].as_f64().unwrap();
    assert!(net.abs() <= 1e-3 * p_cool, "net {net:e} vs cooling {p_cool:e}");
}

#[test]
fn validate_accepts_shipped_configs() {
    for name in ["siv_default.json", "fig1.json", "fig2.json"] {
        let path = configs_dir().join(name);
        let out = bin()
            .args(["validate", "--config"])
            .arg(&path)
            .output()
            .expect("run");
        assert_status(&out, 0);
        let text = String::from_utf8_lossy(&out.stdout);
        assert!(text.starts_with("ok: "), "unexpected output for {name}: {text}");
    }
}

#[test]
fn missing_config_file_exits_with_io_code() {
    let out = bin()
        .args(["validate", "--config", "/nonexistent/nowhere.json"])
        .output()
        .expect("run");
    assert_status(&out, 2);
}

#[test]
fn invalid_config_exits_with_config_code_and_points_at_field() {
    let dir = tempfile::tempdir().expect("tempdir");
    let path = write_config(
        dir.path(),
        "bad.json",
        r#"{ "emitter": { "preset": "siv_default" }, "phonon_bath": { "temperature_k": -4.0 } }"#,
    );
    let out = bin().args(["validate", "--config"]).arg(&path).output().expect("run");
    assert_status(&out, 1);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("temperature"), "stderr: {err}");
}

#[test]
fn degenerate_steady_state_exits_with_numerical_code() {
    // Four levels, no drive, no phonon coupling: the two ground states
    // are both stationary, so no unique steady state exists.
    let dir = tempfile::tempdir().expect("tempdir");
    let path = write_config(
        dir.path(),
        "degenerate.json",
        r#"{
          "emitter": { "preset": "siv_default" },
          "phonon_bath": { "temperature_k": 10.0, "coupling_per_ps": 0.0 }
        }"#,
    );
    let out_dir = dir.path().join("run");
    let out = bin()
        .args(["power", "--config"])
        .arg(&path)
        .args(["--out".as_ref(), out_dir.as_os_str()])
        .output()
        .expect("run");
    assert_status(&out, 3);
}

#[test]
fn seed_dir_resolves_bare_config_names() {
    let dir = tempfile::tempdir().expect("tempdir");
    let body = fs::read_to_string(configs_dir().join("fig1.json")).unwrap();
    write_config(dir.path(), "local.json", &body);
    let out = bin()
        .env("DASC_SEED_DIR", dir.path())
        .args(["validate", "--config", "local"])
        .output()
        .expect("run");
    assert_status(&out, 0);
}

#[test]
fn undriven_uncoupled_spectrum_is_all_zero() {
    let dir = tempfile::tempdir().expect("tempdir");
    let path = write_config(dir.path(), "dark.json", THREE_LEVEL_NO_PHONON_COUPLING);
    let out_dir = dir.path().join("run");
    let out = bin()
        .args(["spectrum", "--config"])
        .arg(&path)
        .args(["--out".as_ref(), out_dir.as_os_str()])
        .output()
        .expect("run");
    assert_status(&out, 0);

    let csv = fs::read_to_string(out_dir.join("spectrum.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("freq_ghz_rel_zpl,S_x,S_y,S_z,S_total"));
    for line in lines {
        let cells: Vec<&str> = line.split(',').collect();
        assert_eq!(cells.len(), 5, "row: {line}");
        for cell in &cells[1..] {
            let v: f64 = cell.parse().unwrap();
            assert_eq!(v, 0.0, "nonzero spectrum in row: {line}");
        }
    }

    let manifest: Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["schema"], "dasc.run-manifest/1");
    assert_eq!(manifest["subcommand"], "spectrum");
}

const SMALL_SWEEP: &str = r#"{
  "emitter": { "preset": "siv_three_level" },
  "phonon_bath": { "temperature_k": 20.0 },
  "solver": {
    "sweep": {
      "temperatures_k": [40.0, 10.0],
      "rabi_rad_per_ps": [0.2],
      "window_ghz": [-500.0, 0.0],
      "coarse_points": 24
    }
  }
}"#;

#[test]
fn sweep_outputs_are_deterministic_and_order_invariant() {
    let dir = tempfile::tempdir().expect("tempdir");
    let path_a = write_config(dir.path(), "sweep_a.json", SMALL_SWEEP);
    let path_b =
        write_config(dir.path(), "sweep_b.json", &SMALL_SWEEP.replace("[40.0, 10.0]", "[10.0, 40.0]"));

    let mut outputs = Vec::new();
    for (cfg, tag) in [(&path_a, "a1"), (&path_a, "a2"), (&path_b, "b")] {
        let out_dir = dir.path().join(tag);
        let out = bin()
            .args(["sweep", "--config"])
            .arg(cfg)
            .args(["--out".as_ref(), out_dir.as_os_str()])
            .args(["--threads", "2"])
            .output()
            .expect("run");
        assert_status(&out, 0);
        outputs.push(fs::read(out_dir.join("sweep.csv")).unwrap());
    }
    assert_eq!(outputs[0], outputs[1], "rerun changed sweep.csv");
    assert_eq!(outputs[0], outputs[2], "temperature order changed sweep.csv");

    let csv = String::from_utf8(outputs[0].clone()).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next(),
        Some("temperature_k,rabi_rad_per_ps,optimal_detuning_ghz,cooling_power_w,bound_w,ratio,flag")
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[0].starts_with("1.00000000e1,"), "row: {}", rows[0]);
    assert!(rows[1].starts_with("4.00000000e1,"), "row: {}", rows[1]);
    for row in rows {
        assert!(row.ends_with(",ok"), "row should cool at 10-40 K: {row}");
    }
}

#[test]
fn single_point_sweep_produces_one_row_and_a_fit_skip_reason() {
    let dir = tempfile::tempdir().expect("tempdir");
    let body = SMALL_SWEEP.replace("[40.0, 10.0]", "[20.0]");
    let path = write_config(dir.path(), "single.json", &body);
    let out_dir = dir.path().join("run");
    let out = bin()
        .args(["sweep", "--config"])
        .arg(&path)
        .args(["--out".as_ref(), out_dir.as_os_str()])
        .output()
        .expect("run");
    assert_status(&out, 0);

    let csv = fs::read_to_string(out_dir.join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2, "header plus exactly one row:\n{csv}");

    let sidecar: Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("sweep.json")).unwrap()).unwrap();
    let fits = sidecar["fits"].as_array().unwrap();
    assert_eq!(fits.len(), 1);
    assert!(fits[0]["fit"]["skipped"].is_string(), "one temperature cannot be fit: {sidecar}");
}

#[test]
fn spectrum_run_writes_manifest_with_resolved_config_and_energy_balance() {
    let dir = tempfile::tempdir().expect("tempdir");
    let out_dir = dir.path().join("run");
    let out = bin()
        .args(["spectrum", "--config"])
        .arg(configs_dir().join("fig1.json"))
        .args(["--out".as_ref(), out_dir.as_os_str()])
        .output()
        .expect("run");
    assert_status(&out, 0);

    let manifest: Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("manifest.json")).unwrap()).unwrap();
    // The resolved config must be explicit (no preset indirection left).
    assert!(manifest["resolved_config"]["emitter"]["level_energies_ghz"].is_array());
    assert_eq!(
        manifest["outputs"],
        serde_json::json!(["spectrum.csv", "spectrum.json", "manifest.json"])
    );

    let sidecar: Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("spectrum.json")).unwrap()).unwrap();
    let deviation = sidecar["energy_balance"]["relative_deviation"].as_f64().unwrap();
    assert!(deviation < 0.05, "spectral-thermodynamic deviation {deviation}");
    let ratio = sidecar["blue_red"]["ratio"].as_f64().unwrap();
    assert!(ratio > 1.0, "expected net anti-Stokes emission, ratio {ratio}");
}

#[test]
fn power_reports_cooling_at_the_shipped_working_point() {
    let dir = tempfile::tempdir().expect("tempdir");
    let out_dir = dir.path().join("run");
    let out = bin()
        .args(["power", "--config"])
        .arg(configs_dir().join("fig1.json"))
        .args(["--out".as_ref(), out_dir.as_os_str()])
        .output()
        .expect("run");
    assert_status(&out, 0);

    let report: Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("power.json")).unwrap()).unwrap();
    assert_eq!(report["cooling"], Value::Bool(true));
    let q_ph = report["q_phonon_w"].as_f64().unwrap();
    let q_rad = report["q_radiative_rf_w"].as_f64().unwrap();
    assert!(q_ph > 0.0);
    assert!((q_ph + q_rad).abs() <= 1e-6 * q_ph.abs());
}
