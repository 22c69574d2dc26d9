use std::path::Path;
use std::process::{Command, Output};

use trapped_cli::config::{OutputFormat, Source};
use trapped_cli::RunConfig;

fn trapped(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_trapped")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr_json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stderr)
        .unwrap_or_else(|e| panic!("stderr is not JSON ({e}): {}", String::from_utf8_lossy(&o.stderr)))
}

fn read_json(p: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn classify_trapped_ef_sphere() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("r.json");
    let csv = dir.path().join("r.csv");
    let o = trapped(&[
        "classify",
        "--metric",
        "schwarzschild_ef:M=1",
        "--embedding",
        "ef_sphere:r=1",
        "--grid",
        "32,64",
        "--out-json",
        json.to_str().unwrap(),
        "--out-csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("FutureTrapped"));
    let v = read_json(&json);
    assert_eq!(v["schema"], "report_v1");
    assert_eq!(v["kind"], "classification");
    assert_eq!(v["body"]["verdict"], "FutureTrapped");
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "u0,u1,h_norm2,label,margin");
    assert_eq!(lines.count(), 32 * 64);
}

#[test]
fn classify_minkowski_sphere() {
    let o = trapped(&["classify", "--metric", "minkowski", "--embedding", "round_sphere:r=2"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("AbsolutelyNonTrapped"));
}

#[test]
fn classify_scenario_from_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    let out = dir.path().join("out.json");
    std::fs::write(
        &cfg,
        format!("schema_version = 1\nscenario = \"ef_horizon\"\n[[outputs]]\nformat = \"json\"\npath = {:?}\n", out),
    )
    .unwrap();
    let o = trapped(&["classify", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(read_json(&out)["body"]["verdict"], "MarginallyFutureTrapped");
}

#[test]
fn inline_definitions_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("inline.toml");
    std::fs::write(
        &cfg,
        r#"
schema_version = 1

[metric]
name = "flat"
coordinates = ["t", "x", "y", "z"]
chart = "cartesian"
components = [
  { i = 0, j = 0, value = "-1" },
  { i = 1, j = 1, value = "1" },
  { i = 2, j = 2, value = "1" },
  { i = 3, j = 3, value = "1" },
]
time_orientation = ["1", "0", "0", "0"]

[embedding]
name = "sphere"
parameters = ["th", "ph"]
axes = [
  { lower = 0.0, upper = 3.141592653589793, boundary = "pole" },
  { lower = 0.0, upper = 6.283185307179586, boundary = "periodic" },
]
components = ["0", "R*sin(th)*cos(ph)", "R*sin(th)*sin(ph)", "R*cos(th)"]
closed = true
constants = { R = 0.5 }

[[fields]]
name = "dilation"
components = ["t", "x", "y", "z"]
"#,
    )
    .unwrap();
    let c = trapped(&["classify", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&c), 0, "{}", String::from_utf8_lossy(&c.stderr));
    assert!(stdout(&c).contains("AbsolutelyNonTrapped"));
    assert!(stdout(&c).contains("16x16"));
    let k = trapped(&["verify", "killing", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&k), 0, "{}", stdout(&k));
    // ∫Ψη = area = 4πR² with Ψ = 1.
    assert!(stdout(&k).contains("3.14159265"));
}

#[test]
fn malformed_config_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(
        &cfg,
        "schema_version = 1\nembedding = \"round_sphere\"\n[grid]\npoints = [8, 8]\nruel = \"gauss\"\n",
    )
    .unwrap();
    let o = trapped(&["classify", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 64);
    let err = stderr_json(&o);
    assert_eq!(err["kind"], "error");
    assert_eq!(err["body"]["kind"], "ConfigError");
    assert_eq!(err["body"]["key"], "ruel");
}

#[test]
fn tolerance_outside_bounds_names_the_tolerance() {
    let o = trapped(&["classify", "--embedding", "round_sphere", "--tol", "null_band=0.5"]);
    assert_eq!(code(&o), 64);
    assert_eq!(stderr_json(&o)["body"]["key"], "tolerances.null_band");
}

#[test]
fn missing_config_file_is_a_config_error() {
    let o = trapped(&["classify", "--config", "/nonexistent/run.toml"]);
    assert_eq!(code(&o), 64);
}

#[test]
fn unknown_entries_exit_65() {
    let o = trapped(&["catalog", "show", "nosuch"]);
    assert_eq!(code(&o), 65);
    assert_eq!(stderr_json(&o)["body"]["kind"], "UnknownEntry");
    let o = trapped(&["classify", "--embedding", "nosuch_surface"]);
    assert_eq!(code(&o), 65);
}

#[test]
fn catalog_listing_is_deterministic() {
    let a = trapped(&["catalog", "list"]);
    let b = trapped(&["catalog", "list"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    for name in ["schwarzschild_ef", "ef_sphere", "rw_conformal", "ef_trapped"] {
        assert!(stdout(&a).contains(name), "{name}");
    }
}

#[test]
fn catalog_show_lists_params_and_expectations() {
    let o = trapped(&["catalog", "show", "schwarzschild_ef"]);
    assert_eq!(code(&o), 0);
    let s = stdout(&o);
    assert!(s.contains("params:") && s.contains("mass"));
    assert!(s.contains("chart: eddington_finkelstein"));
    assert!(s.contains("verdict FutureTrapped  [closed form:"));
}

#[test]
fn verify_eq3_sweep_passes() {
    let o = trapped(&["verify", "eq3", "--seed", "3"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).contains("samples         200"));
    assert!(stdout(&o).contains("max residual"));
}

#[test]
fn verify_eq3_on_pair_with_finite_differences() {
    let o = trapped(&["verify", "eq3", "--embedding", "tilted_sphere", "--field", "polynomial:seed=4", "--fd"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).contains("finite differences"));
}

#[test]
fn verify_killing_on_rw_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("k.json");
    let o = trapped(&["verify", "killing", "--scenario", "rw_comoving_sphere", "--out-json", json.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let v = read_json(&json);
    assert_eq!(v["body"]["pass"], true);
    let k = &v["body"]["result"][0]["integral"];
    assert!(k["residual"].as_f64().unwrap() < 1e-6);
    assert!(k["flux_integral"].as_f64().unwrap() > 0.0);
}

#[test]
fn verify_killing_reports_null_alignment() {
    let o = trapped(&[
        "verify",
        "killing",
        "--metric",
        "ppwave",
        "--embedding",
        "ppwave_sphere",
        "--field",
        "ppwave_null_killing",
    ]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).contains("alignment     consistent"));
}

#[test]
fn verify_killing_rejects_non_conformal_field() {
    let o = trapped(&["verify", "killing", "--embedding", "round_sphere", "--field", "polynomial:seed=5"]);
    assert_eq!(code(&o), 1);
    assert_eq!(stderr_json(&o)["body"]["kind"], "NotConformal");
}

#[test]
fn verify_failing_threshold_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("strict.toml");
    std::fs::write(&cfg, "schema_version = 1\n[verify]\nsamples = 10\nthreshold = 1e-30\n").unwrap();
    let o = trapped(&["verify", "eq3", "--config", cfg.to_str().unwrap(), "--fd"]);
    assert_eq!(code(&o), 2);
    assert!(stdout(&o).contains("FAIL"));
}

#[test]
fn verify_flow_leaving_chart_exits_1() {
    let o = trapped(&[
        "verify",
        "variation",
        "--metric",
        "schwarzschild_ef:M=1",
        "--embedding",
        "ef_sphere:r=1",
        "--field",
        "ef_radial:speed=-2000",
    ]);
    assert_eq!(code(&o), 1);
    let err = stderr_json(&o);
    assert_eq!(err["body"]["kind"], "FlowLeftChart");
    assert_eq!(err["body"]["exit_code"], 1);
}

#[test]
fn verify_variation_on_pair() {
    let o = trapped(&["verify", "variation", "--embedding", "round_sphere:r=2", "--field", "radial_unit"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    // dV/dτ = 8πr at r = 2.
    assert!(stdout(&o).contains("identity 50.2654825"));
}

#[test]
fn identical_runs_give_identical_reports() {
    let dir = tempfile::tempdir().unwrap();
    let paths: Vec<_> = (0..2).map(|i| dir.path().join(format!("eq3_{i}.json"))).collect();
    for p in &paths {
        let o = trapped(&["verify", "eq3", "--seed", "11", "--samples", "30", "--out-json", p.to_str().unwrap()]);
        assert_eq!(code(&o), 0);
    }
    assert_eq!(std::fs::read(&paths[0]).unwrap(), std::fs::read(&paths[1]).unwrap());

    let cls: Vec<_> = (0..2).map(|i| dir.path().join(format!("cls_{i}.json"))).collect();
    for p in &cls {
        let o = trapped(&["classify", "--scenario", "ef_trapped", "--out-json", p.to_str().unwrap()]);
        assert_eq!(code(&o), 0);
    }
    assert_eq!(std::fs::read(&cls[0]).unwrap(), std::fs::read(&cls[1]).unwrap());

    let other = dir.path().join("eq3_other.json");
    trapped(&["verify", "eq3", "--seed", "12", "--samples", "30", "--out-json", other.to_str().unwrap()]);
    assert_ne!(std::fs::read(&paths[0]).unwrap(), std::fs::read(&other).unwrap());
}

#[test]
fn config_round_trips_through_toml() {
    let mut cfg = RunConfig { scenario: Some("ef_trapped".into()), seed: Some(5), ..RunConfig::default() };
    cfg.metric = Some(Source::Catalog("schwarzschild_ef:M=1.5".parse().unwrap()));
    cfg.fields = vec![Source::Catalog("ef_radial:speed=2".parse().unwrap())];
    cfg.tolerances.insert("null_band".into(), 1e-10);
    cfg.outputs.push(trapped_cli::config::Output { format: OutputFormat::Csv, path: "labels.csv".into() });
    let text = cfg.to_toml();
    assert_eq!(RunConfig::from_toml(&text).unwrap(), cfg);
}

#[test]
fn csv_output_for_verify_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("x.csv");
    let o = trapped(&["verify", "eq3", "--samples", "5", "--out-csv", csv.to_str().unwrap()]);
    assert_eq!(code(&o), 64);
    assert_eq!(stderr_json(&o)["body"]["key"], "outputs");
}
