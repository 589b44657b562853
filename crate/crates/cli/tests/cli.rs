use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_coherent-knn"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn classify_iris_json() {
    let o = run(&["classify", "--dataset", "iris", "--seed", "1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["k"], 3);
    assert_eq!(v["seed"], 1);
    assert_eq!(v["split"]["test_rows"], 45);
    assert_eq!(v["predictions"].as_array().unwrap().len(), 45);
    let confusion_total: u64 = v["confusion"]
        .as_array()
        .unwrap()
        .iter()
        .flat_map(|r| r.as_array().unwrap().iter().map(|c| c.as_u64().unwrap()))
        .sum();
    assert_eq!(confusion_total, 45);
    assert!(v["accuracy"].as_f64().unwrap() > 0.8);
}

#[test]
fn classify_is_reproducible() {
    let args = ["classify", "--family", "blobs", "--metric", "sampled", "--runs", "2000", "--seed", "4"];
    assert_eq!(stdout(&run(&args)), stdout(&run(&args)));
}

#[test]
fn classify_csv_output_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("pred.csv");
    let o = run(&["classify", "--dataset", "wine", "--format", "csv", "--out", path.to_str().unwrap()]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("row,true_label,predicted_label"));
    assert_eq!(lines.count(), 53);
}

#[test]
fn boundary_grid_plus_test_points() {
    let o = run(&["boundary", "--family", "half_moons", "--count", "40", "--grid", "5x4"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.iter().filter(|r| r.starts_with("grid,")).count(), 20);
    assert_eq!(rows.iter().filter(|r| r.starts_with("test,")).count(), 12);
}

#[test]
fn boundary_needs_two_features() {
    let o = run(&["boundary", "--dataset", "iris"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn curves_and_resources() {
    let o = run(&["curves", "detector-error", "--series", "0.9", "--max-cutoff", "5"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let cutoff5 = text.lines().find(|l| l.starts_with("5.0,")).unwrap();
    let y: f64 = cutoff5.split(',').nth(1).unwrap().parse().unwrap();
    assert!((0.030..=0.034).contains(&y));

    let o = run(&["resources", "--m", "4", "--n", "4"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["beam_splitters"], 16);
    assert_eq!(v["instantiated"]["beam_splitters"], 16);
}

#[test]
fn validate_network_dumps_layout() {
    let dir = tempfile::tempdir().unwrap();
    let layout = dir.path().join("layout.json");
    let o = run(&["validate-network", "--modes", "4", "--runs", "1000", "--dump-layout", layout.to_str().unwrap()]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(layout).unwrap()).unwrap();
    assert_eq!(v["mode_count"], 4);
    assert_eq!(v["placements"].as_array().unwrap().len(), 4);
}

#[test]
fn generated_csv_loads_back() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("spirals.csv");
    assert!(run(&["generate", "--family", "spirals", "--count", "60", "--out", path.to_str().unwrap()]).status.success());
    let o = run(&["classify", "--dataset", path.to_str().unwrap(), "--k", "3"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn exit_codes() {
    // bad configuration
    assert_eq!(run(&["classify", "--dataset", "iris", "--k", "0"]).status.code(), Some(2));
    assert_eq!(run(&["classify", "--dataset", "iris", "--eta", "1.5"]).status.code(), Some(2));
    assert_eq!(run(&["classify", "--dataset", "no-such-file.csv"]).status.code(), Some(2));
    assert_eq!(run(&["classify"]).status.code(), Some(2));
    // malformed data
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "a,b,class\n1,2,x\n3,oops,y\n").unwrap();
    let o = run(&["classify", "--dataset", bad.to_str().unwrap(), "--k", "1"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));
}

#[test]
fn data_dir_override() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin()
        .args(["classify", "--dataset", "iris"])
        .env("COHERENT_KNN_DATA_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn help_lists_flags() {
    let text = stdout(&run(&["classify", "--help"]));
    for flag in [
        "--dataset", "--family", "--k", "--metric", "--alpha-sq", "--runs", "--eta", "--tau", "--seed",
        "--split-fraction", "--stratified", "--features", "--out", "--format",
    ] {
        assert!(text.contains(flag), "missing {flag}");
    }
    assert!(stdout(&run(&["boundary", "--help"])).contains("--grid"));
}
