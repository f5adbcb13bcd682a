use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn nporder(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nporder"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = nporder(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn data_lines(csv: &str) -> Vec<&str> {
    csv.lines().filter(|l| !l.starts_with('#')).skip(1).collect()
}

fn scratch(name: &str, text: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("nporder-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn fit_prints_weight_table() {
    let text = stdout(&["fit", "--system", "dryer", "--dv", "adjusted"]);
    let bias = text.lines().find(|l| l.starts_with("(Bias)")).unwrap();
    let cells: Vec<&str> = bias.split_whitespace().collect();
    assert_eq!(cells[1], "3.9815");
    assert!(text.contains("d.f.: 6"));
    assert!(text.contains("< .001"));
}

#[test]
fn fit_csv_with_precision() {
    let csv = stdout(&["fit", "--system", "cysouw", "--dv", "genera", "--format", "csv", "--precision", "5"]);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("feature,weight,std_error,p_value,p"));
    assert!(lines.next().unwrap().starts_with("(Bias),4.41097,0.09217,"));
}

#[test]
fn unknown_system_is_an_input_error() {
    let out = nporder(&["fit", "--system", "nosuch"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    for name in ["dryer", "cysouw", "cinque_ours", "cinque_merlo"] {
        assert!(err.contains(name), "{err}");
    }
    assert_eq!(nporder(&["export", "system", "nosuch"]).status.code(), Some(2));
    assert_eq!(nporder(&["fit", "--system", "dryer", "--dv", "weekly"]).status.code(), Some(2));
    assert_eq!(
        nporder(&["fit", "--system", "dryer", "--dataset", "/nonexistent/table.csv"]).status.code(),
        Some(2)
    );
}

#[test]
fn singular_system_is_a_numerical_error() {
    let mut csv = String::from("order,a,b\n");
    let export = stdout(&["export", "system", "dryer"]);
    for line in data_lines(&export) {
        let mut cells = line.split(',');
        let order = cells.next().unwrap();
        let v = cells.next().unwrap();
        csv += &format!("{order},{v},{v}\n");
    }
    let path = scratch("twins.csv", &csv);
    let out = nporder(&["fit", "--system", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains('b'));
}

#[test]
fn compare_adjusted_csv() {
    let csv = stdout(&["compare", "--dv", "adjusted", "--format", "csv", "--precision", "1"]);
    let rows = data_lines(&csv);
    assert_eq!(rows.len(), 4);
    assert_eq!(rows[0], "cinque_ours,-53.0,8,fitted");
    assert!(rows.contains(&"cysouw,-77.2,5,fitted"));
}

#[test]
fn compare_genera_text() {
    let text = stdout(&["compare", "--dv", "genera", "--precision", "1"]);
    let first = text.lines().nth(3).unwrap();
    assert_eq!(first.split_whitespace().collect::<Vec<_>>(), ["dryer", "-61.3", "6"]);
    let with_ic = stdout(&["compare", "--dv", "genera", "--aic-bic"]);
    assert!(with_ic.contains("AIC") && with_ic.contains("BIC"));
    assert!(!text.contains("AIC"));
}

#[test]
fn compare_json_round_trips() {
    let json = stdout(&["compare", "--dv", "adjusted", "--format", "json"]);
    let value: Value = serde_json::from_str(&json).unwrap();
    let again: Value = serde_json::from_str(&serde_json::to_string(&value).unwrap()).unwrap();
    assert_eq!(value, again);
    assert_eq!(value["dv"], "adjusted_frequency");
    assert_eq!(value["systems"].as_array().unwrap().len(), 4);
    assert_eq!(value["systems"][0]["status"], "fitted");
}

#[test]
fn discrepancy_tables() {
    let csv = stdout(&["discrepancy", "--system", "cinque_ours", "--dv", "genera", "--format", "csv"]);
    let rows = data_lines(&csv);
    assert_eq!(rows.len(), 24);
    let observed: Vec<u64> = rows.iter().map(|r| r.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert!(observed.windows(2).all(|w| w[0] >= w[1]));
    let nnad: Vec<&str> = rows.iter().find(|r| r.starts_with("NnAD,")).unwrap().split(',').collect();
    let (obs, pred, chi): (f64, f64, f64) = (nnad[1].parse().unwrap(), nnad[2].parse().unwrap(), nnad[3].parse().unwrap());
    assert!(pred < obs && chi > 0.0, "{nnad:?}");

    let dryer = stdout(&["discrepancy", "--system", "dryer", "--dv", "genera", "--format", "csv"]);
    assert_eq!(data_lines(&dryer).len(), 24);
}

#[test]
fn saturated_system_has_zero_discrepancy() {
    let export = stdout(&["export", "dataset"]);
    let orders: Vec<&str> = data_lines(&export).iter().map(|l| l.split(',').next().unwrap()).collect();
    let mut dataset = String::from("order,adjusted_frequency,genera_count\n");
    let mut system = format!("order,{}\n", orders[1..].iter().map(|o| format!("is_{o}")).collect::<Vec<_>>().join(","));
    for (i, o) in orders.iter().enumerate() {
        dataset += &format!("{o},{}.00,{}\n", i + 2, i + 2);
        let cells: Vec<&str> = (1..24).map(|j| if i == j { "1" } else { "0" }).collect();
        system += &format!("{o},{}\n", cells.join(","));
    }
    let ds = scratch("positive.csv", &dataset);
    let fs = scratch("saturated.csv", &system);
    let csv = stdout(&[
        "discrepancy",
        "--system",
        fs.to_str().unwrap(),
        "--dataset",
        ds.to_str().unwrap(),
        "--dv",
        "genera",
        "--format",
        "csv",
    ]);
    for row in data_lines(&csv) {
        assert_eq!(row.rsplit(',').next(), Some("0.0000"), "{row}");
    }
}

#[test]
fn exports() {
    let dataset = stdout(&["export", "dataset"]);
    let rows = data_lines(&dataset);
    assert_eq!(rows.len(), 24);
    assert_eq!(rows[0], "nAND,43.50,84");

    let cysouw = stdout(&["export", "system", "cysouw"]);
    let rows = data_lines(&cysouw);
    assert_eq!(rows.len(), 24);
    assert!(rows.iter().all(|r| r.split(',').count() == 5));

    let merlo = stdout(&["export", "system", "cinque_merlo"]);
    let header = merlo.lines().find(|l| l.starts_with("order,")).unwrap();
    assert!(header.split(',').any(|c| c == "partial_whose-pp"));
}

#[test]
fn exported_files_load_back() {
    let dataset = scratch("exported.csv", &stdout(&["export", "dataset"]));
    let system = scratch("ours.csv", &stdout(&["export", "system", "cinque_ours"]));
    let from_files = stdout(&[
        "fit",
        "--system",
        system.to_str().unwrap(),
        "--dataset",
        dataset.to_str().unwrap(),
        "--format",
        "csv",
    ]);
    let builtin = stdout(&["fit", "--system", "cinque_ours", "--format", "csv"]);
    assert_eq!(from_files, builtin);
}

#[test]
fn output_is_deterministic_and_can_go_to_a_file() {
    for args in [
        &["compare", "--dv", "genera", "--format", "json"][..],
        &["discrepancy", "--system", "cysouw", "--format", "csv"][..],
    ] {
        assert_eq!(nporder(args).stdout, nporder(args).stdout);
    }
    let dir = std::env::temp_dir().join(format!("nporder-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("fit.json");
    let printed = stdout(&["fit", "--system", "dryer", "--format", "json"]);
    let silent = stdout(&["fit", "--system", "dryer", "--format", "json", "--out", path.to_str().unwrap()]);
    assert!(silent.is_empty());
    assert_eq!(std::fs::read_to_string(&path).unwrap(), printed);
    let doc: Value = serde_json::from_str(&printed).unwrap();
    assert!(doc["features"][5]["p_value"].as_f64().unwrap() < 0.001);
}
