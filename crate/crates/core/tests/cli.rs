use std::path::Path;
use std::process::{Command, Output};

use acdc_opf::io::{fixture_dir, read_solution, run_cli_with};

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_acdc-opf"))
        .args(args)
        .current_dir(fixture_dir())
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn solve_writes_a_solution_document() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("solution.json");
    let o = cli(&[
        "solve", "--network", "ceder.json", "--objective", "h1", "--storage-fraction", "0.5", "--grid-mode",
        "consume", "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let rows: Vec<String> = stdout(&o).lines().map(|l| l.split_whitespace().collect::<Vec<_>>().join(" ")).collect();
    assert!(rows.iter().any(|r| r == "5 -12.50000 0.00000 0.86000 0.00000"));
    let doc = read_solution(&out).unwrap();
    assert_eq!(doc.format_version, 1);
    assert!((doc.solution.total_generation_kw - 23.81739).abs() < 0.03);
}

#[test]
fn kpi_vb_flex_pays_back_in_17_years() {
    let o = cli(&["kpi", "--network", "ceder.json", "--econ", "ceder-econ.json", "--scenario", "vb-flex", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("scenario,kpi1_kwh"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[0], "vb-flex");
    assert_eq!(row[7], "17");
}

#[test]
fn kpi_json_lists_all_scenarios() {
    let o = cli(&["kpi", "--network", "ceder.json", "--econ", "ceder-econ.json", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["kpis"].as_array().unwrap().len(), 4);
}

#[test]
fn unknown_objective_is_a_usage_error() {
    let o = cli(&["solve", "--network", "ceder.json", "--objective", "h9"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn missing_file_is_a_usage_error() {
    let o = cli(&["validate", "--network", "no-such-network.json"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("no-such-network.json"));
}

#[test]
fn validate_bundled_network() {
    let o = cli(&["validate", "--network", "ceder.json"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("no problems found"));
}

#[test]
fn compare_single_scenario_passes() {
    let o = cli(&[
        "compare", "--measurements", "ceder-measurements.json", "--network", "ceder.json", "--scenarios",
        "ceder-scenarios.json", "--label", "H1",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn compare_all_flags_the_h2_voltage() {
    let o = cli(&[
        "compare", "--measurements", "ceder-measurements.json", "--network", "ceder.json", "--scenarios",
        "ceder-scenarios.json", "--format", "json",
    ]);
    assert_eq!(o.status.code(), Some(1));
    let tables: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let failing: Vec<&str> = tables["comparisons"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|t| t["pass"] == false)
        .map(|t| t["label"].as_str().unwrap())
        .collect();
    assert_eq!(failing, vec!["H2"]);
}

#[test]
fn compare_stored_solution() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("h4.json");
    let o = cli(&[
        "solve", "--network", "ceder.json", "--scenarios", "ceder-scenarios.json", "--label", "H4", "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let o = cli(&["compare", "--measurements", "ceder-measurements.json", "--solution", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn in_process_entry_point() {
    let network = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/ceder.json");
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run_cli_with(
        ["acdc-opf", "solve", "--network", network.to_str().unwrap(), "--objective", "h4", "--format", "csv"],
        &mut out,
        &mut err,
    );
    assert_eq!(code, 0);
    let text = String::from_utf8(out).unwrap();
    assert!(text.starts_with("bus,kind,p_kw,q_kvar,v_kv,angle_rad"));
    assert_eq!(text.lines().filter(|l| l.chars().next().is_some_and(|c| c.is_ascii_digit())).count(), 9);
}
