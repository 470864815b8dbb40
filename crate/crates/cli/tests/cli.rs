use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ghmf_core::equilibrium::SolverOptions;
use ghmf_core::phase_diagram::{sweep_grid, GridSpec, PhaseDiagram};
use serde_json::Value;

fn ghmf(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ghmf")).arg("--out").arg(out).args(args).output().unwrap()
}

fn config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

const MAP: &str = "schema_version = 1\n[cavity]\ndelta_1 = -1.0\ndelta_2 = -1.0\nkappa_1 = 1.0\nkappa_2 = 1.0\ns_1 = 0.1\ns_2 = 0.1\nn_atoms = 100\n";

#[test]
fn map_params_reference_point() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "map.toml", MAP);
    let out = dir.path().join("out");
    let o = ghmf(&out, &["map-params", "-c", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v = read_json(&out.join("effective_model.json"));
    assert_eq!(v["schema"], "ghmf-effective-model/1");
    let m = &v["data"]["model"];
    for key in ["alpha_1", "alpha_2"] {
        assert!((m[key].as_f64().unwrap() - 1.0).abs() < 1e-12, "{key} = {}", m[key]);
    }
    assert!((m["beta"].as_f64().unwrap() - 2.0).abs() < 1e-12);
    assert_eq!(m["eta_1"].as_f64().unwrap(), 0.0);
    assert_eq!(m["eta_2"].as_f64().unwrap(), 0.0);
    assert_eq!(v["data"]["stationary"], true);

    // the manifest lists the output with its checksum
    let manifest = out.join(v["manifest"].as_str().unwrap());
    let files = &read_json(&manifest)["files"];
    assert_eq!(files[0]["name"], "effective_model.json");
    assert_eq!(files[0]["sha256"].as_str().unwrap().len(), 64);
    assert_eq!(std::fs::read_to_string(out.join("runs.jsonl")).unwrap().lines().count(), 1);
}

#[test]
fn overrides_and_print_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "map.toml", MAP);
    let out = dir.path().join("out");
    let o = ghmf(&out, &["map-params", "-c", cfg.to_str().unwrap(), "--set", "cavity.s_1=0.2", "--print-config"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("schema_version = 1"));
    assert!(text.contains("s_1 = 0.2"));
    assert!(!out.exists(), "--print-config must not write outputs");
}

#[test]
fn configuration_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let unknown = config(dir.path(), "a.toml", &format!("{MAP}bogus = 3\n"));
    let o = ghmf(&out, &["map-params", "-c", unknown.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("bogus"));

    let unversioned = config(dir.path(), "b.toml", &MAP.replace("schema_version = 1\n", ""));
    assert_eq!(ghmf(&out, &["map-params", "-c", unversioned.to_str().unwrap()]).status.code(), Some(1));

    // different temperatures of the two modes
    let o = ghmf(&out, &["map-params", "-c", unknown.to_str().unwrap().replace("a.toml", "b.toml").as_str()]);
    assert_eq!(o.status.code(), Some(1));
    let hot = config(dir.path(), "c.toml", &MAP.replace("delta_2 = -1.0", "delta_2 = -3.0"));
    assert_eq!(ghmf(&out, &["map-params", "-c", hot.to_str().unwrap()]).status.code(), Some(1));

    assert_eq!(ghmf(&out, &["no-such-command"]).status.code(), Some(1));
    assert_eq!(ghmf(&out, &["--threads", "0", "map-params", "-c", hot.to_str().unwrap()]).status.code(), Some(1));
    assert_eq!(ghmf(&out, &["--help"]).status.code(), Some(0));
}

#[test]
fn numerical_failure_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(
        dir.path(),
        "l.toml",
        "schema_version = 1\nn_steps = 100\nmomentum_bound = 1e-3\n[couplings]\nalpha_1 = 0.5\nalpha_2 = 2.0\nn_atoms = 10\n[init]\nkind = \"thermal\"\nbeta_0 = 1.0\n",
    );
    let out = dir.path().join("out");
    let o = ghmf(&out, &["langevin", "-c", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
    // nothing half-written is left behind
    if out.exists() {
        for e in std::fs::read_dir(&out).unwrap() {
            assert!(!e.unwrap().file_name().to_string_lossy().ends_with(".partial"));
        }
    }
}

#[test]
fn small_phase_diagram_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(
        dir.path(),
        "pd.toml",
        "schema_version = 1\n[grid]\nalpha_1_range = [0.0, 0.8]\nalpha_2_range = [0.0, 0.8]\nn_1 = 3\nn_2 = 3\n",
    );
    let out = dir.path().join("out");
    let o = ghmf(&out, &["--threads", "2", "phase-diagram", "-c", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let csv = std::fs::read_to_string(out.join("phase_diagram.csv")).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("# manifest="));
    assert!(lines.next().unwrap().starts_with("alpha_1,alpha_2,phase,"));
    let rows: Vec<_> = lines.collect();
    assert_eq!(rows.len(), 9);
    assert!(rows.iter().all(|r| r.contains(",paramagnetic,")), "{rows:?}");

    let overlays = read_json(&out.join("overlays.json"));
    assert!(overlays["data"].is_object());

    let v = read_json(&out.join("phase_diagram.json"));
    let stored: PhaseDiagram = serde_json::from_value(v["data"].clone()).unwrap();
    let spec = GridSpec { alpha_1_range: [0.0, 0.8], alpha_2_range: [0.0, 0.8], n_1: 3, n_2: 3, ..GridSpec::default() };
    assert_eq!(stored, sweep_grid(&spec, 1, &SolverOptions::default()).unwrap());
}
