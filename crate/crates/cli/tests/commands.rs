use std::path::Path;
use std::process::Command;

use cnt_coherence_cli::cli_run;
use cnt_coherence_cli::output::{from_csv, from_json, RESULT_SCHEMA};

fn run(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let argv: Vec<&str> = std::iter::once("cnt-coherence").chain(args.iter().copied()).collect();
    let code = cli_run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn threshold_prints_rounded_values() {
    let (code, out, _) = run(&[
        "threshold",
        "--gamma-cb",
        "1e6",
        "--gamma-ab",
        "1e12",
        "--mode",
        "paper_fit",
    ]);
    assert_eq!(code, 0);
    assert_eq!(out.trim(), "Ω_th = 1.0e9 rad/s, P_th = 4.0e-2 W/cm²");
}

#[test]
fn threshold_accepts_lifetimes() {
    let (code, out, _) = run(&["threshold", "--gamma-cb", "1 us", "--gamma-ab", "1 ps"]);
    assert_eq!(code, 0);
    assert!(out.starts_with("Ω_th = 1.0e9 rad/s"), "{out}");
}

#[test]
fn list_scenarios_names_all_five() {
    let (code, out, _) = run(&["list-scenarios"]);
    assert_eq!(code, 0);
    let names: Vec<&str> = out.lines().map(|l| l.split_whitespace().next().unwrap()).collect();
    assert_eq!(
        names,
        ["cpt_scan", "eit_scan", "threshold_map", "stirap_delay_scan", "fwm_scan"]
    );
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    let (code, out, err) = run(&["frobnicate"]);
    assert_eq!(code, 1);
    assert!(out.is_empty());
    assert!(err.contains("Usage"), "{err}");
}

#[test]
fn help_exits_zero() {
    let (code, out, _) = run(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("scenario"));
}

#[test]
fn unknown_scenario_is_a_usage_error() {
    let (code, _, err) = run(&["scenario", "nope", "--out", "-"]);
    assert_eq!(code, 1);
    assert!(err.contains("cpt_scan"), "{err}");
}

#[test]
fn config_errors_are_usage_errors_with_lines() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "bad.toml",
        "[run]\nscenario = \"cpt_scan\"\n\n[rates]\ngama_cb = \"1 us\"\n",
    );
    let (code, _, err) = run(&["scenario", "cpt_scan", "--config", &cfg, "--out", "-"]);
    assert_eq!(code, 1);
    assert!(err.contains("line 5: unknown key 'gama_cb' in [rates]"), "{err}");
}

#[test]
fn physics_failures_exit_two() {
    // Coherence decay slower than half the population decay cannot be realized.
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "s.toml",
        "[run]\nsolver = \"steady\"\n[rates]\ngamma_ab = \"1e9 /s\"\n",
    );
    let (code, _, err) = run(&["steady", "--config", &cfg, "--out", "-"]);
    assert_eq!(code, 2, "{err}");
    assert!(err.contains("unrealizable"), "{err}");
}

#[test]
fn unwritable_output_is_a_usage_error() {
    let (code, _, err) = run(&[
        "--quiet",
        "scenario",
        "threshold_map",
        "--out",
        "/nonexistent-dir/t.csv",
    ]);
    assert_eq!(code, 1);
    assert!(err.contains("cannot write"), "{err}");
}

#[test]
fn steady_run_prints_a_valid_state() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "s.toml",
        "[run]\nsolver = \"steady\"\n[[fields]]\nrabi = \"1e11 rad/s\"\n[[fields]]\nintensity = \"4 W/cm2\"\n",
    );
    let (code, out, err) = run(&["--quiet", "steady", "--config", &cfg, "--out", "-"]);
    assert_eq!(code, 0, "{err}");
    let t = from_csv(&out).unwrap();
    let trace: f64 = t.rows.iter().filter(|r| r[0] == r[1]).map(|r| r[2]).sum();
    assert!((trace - 1.0).abs() < 1e-12);
    assert_eq!(t.rows.len(), 6);
}

#[test]
fn evolve_run_conserves_trace() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "e.toml",
        "[run]\nsolver = \"evolve\"\n[[fields]]\n[fields.pulse]\ncenter = \"0 fs\"\nfwhm = \"100 fs\"\narea = \"3.14159 rad\"\n\
         [[fields]]\n[evolve]\nstart = \"-300 fs\"\nstop = \"300 fs\"\npoints = 21\n",
    );
    let (code, out, err) = run(&["--quiet", "evolve", "--config", &cfg, "--out", "-", "--format", "json"]);
    assert_eq!(code, 0, "{err}");
    let t = from_json(&out).unwrap();
    assert_eq!(t.rows.len(), 21);
    for r in &t.rows {
        assert!((r[1] + r[2] + r[3] - 1.0).abs() < 1e-9);
    }
    // A π pulse on b–a moves most of the population out of b.
    assert!(t.rows[20][2] < 0.2, "{:?}", t.rows[20]);
}

#[test]
fn steady_without_config_is_a_usage_error() {
    let (code, _, err) = run(&["steady"]);
    assert_eq!(code, 1);
    assert!(err.contains("--config"), "{err}");
}

#[test]
fn json_output_validates_against_schema() {
    let dir = tempfile::tempdir().unwrap();
    let schema: serde_json::Value = serde_json::from_str(RESULT_SCHEMA).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    let cfg = write(
        dir.path(),
        "c.toml",
        "[run]\nscenario = \"cpt_scan\"\n[sweep]\npoints = 5\n",
    );
    let steady = write(dir.path(), "s.toml", "[run]\nsolver = \"steady\"\n");
    for (args, file) in [
        (vec!["scenario", "cpt_scan", "--config", cfg.as_str()], "a.json"),
        (vec!["scenario", "threshold_map"], "b.json"),
        (vec!["steady", "--config", steady.as_str()], "c.json"),
    ] {
        let path = dir.path().join(file);
        let mut a = vec!["--quiet"];
        a.extend(args);
        a.extend(["--format", "json", "--out", path.to_str().unwrap()]);
        let (code, _, err) = run(&a);
        assert_eq!(code, 0, "{err}");
        let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
        let errors: Vec<String> = validator.iter_errors(&v).map(|e| e.to_string()).collect();
        assert!(errors.is_empty(), "{file}: {errors:?}");
    }
}

#[test]
fn config_output_section_and_manifest_rerun() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("from_config.json");
    let cfg = write(
        dir.path(),
        "c.toml",
        &format!(
            "[run]\nscenario = \"fwm_scan\"\n[sweep]\npoints = 4\n[output]\npath = \"{}\"\nformat = \"json\"\n",
            target.display()
        ),
    );
    let (code, _, err) = run(&["--quiet", "scenario", "fwm_scan", "--config", &cfg]);
    assert_eq!(code, 0, "{err}");
    let t = from_json(&std::fs::read_to_string(&target).unwrap()).unwrap();
    let spec: cnt_coherence::scenario::ScenarioSpec = serde_json::from_value(t.manifest["spec"].clone()).unwrap();
    let again = cnt_coherence::scenario::run_scenario(&spec).unwrap();
    assert_eq!(again.rows, t.rows);
}

#[test]
fn binary_reports_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_cnt-coherence");
    let dir = tempfile::tempdir().unwrap();
    let ok = Command::new(bin)
        .args(["--quiet", "scenario", "threshold_map"])
        .env("CNT_COHERENCE_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(0));
    let written = std::fs::read_to_string(dir.path().join("threshold_map.csv")).unwrap();
    assert!(written.starts_with("# units: 1/s,s,rad/s,W/cm2,W/cm2\n"));
    let bad = Command::new(bin).arg("frobnicate").output().unwrap();
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn quiet_suppresses_progress() {
    let bin = env!("CARGO_BIN_EXE_cnt-coherence");
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.toml",
        "[run]\nscenario = \"fwm_scan\"\n[sweep]\npoints = 3\n",
    );
    let out = dir.path().join("f.csv");
    let run = |quiet: bool| {
        let mut c = Command::new(bin);
        if quiet {
            c.arg("--quiet");
        }
        c.args(["scenario", "fwm_scan", "--config", &cfg, "--out", out.to_str().unwrap()])
            .env_remove("RUST_LOG")
            .output()
            .unwrap()
    };
    let loud = run(false);
    assert!(String::from_utf8_lossy(&loud.stderr).contains("wrote"));
    let quiet = run(true);
    assert!(quiet.stderr.is_empty(), "{}", String::from_utf8_lossy(&quiet.stderr));
}
