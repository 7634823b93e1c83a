use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_dressing"));
    c.env_remove("DRESSING_SCENARIO_DIR");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines().skip(1).map(|l| l.split(',').map(str::to_owned).collect()).collect()
}

fn gaussian_csv(path: &Path, centers: &[f64]) {
    let mut s = String::from("detuning_MHz,signal\n");
    for k in 0..=800 {
        let x = -200.0 + 0.5 * f64::from(k);
        let y: f64 = centers.iter().map(|c| (-(x - c).powi(2) / 50.0).exp()).sum();
        s.push_str(&format!("{x},{y}\n"));
    }
    std::fs::write(path, s).unwrap();
}

#[test]
fn blocks_report_census() {
    let o = run(&["blocks", "--omega", "100"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let sizes: Vec<u64> = v["block_sizes"].as_array().unwrap().iter().map(|x| x.as_u64().unwrap()).collect();
    assert_eq!(sizes, vec![2, 4, 6, 8, 6, 4, 2]);
    assert_eq!(v["dark_singletons"].as_array().unwrap().len(), 8);
    assert_eq!(v["dimension"], 40);
}

#[test]
fn opposite_polarization_mirrors_census() {
    let o = run(&["--set", "system.polarization_q=-1", "blocks"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let mt: Vec<String> = v["blocks"].as_array().unwrap().iter().map(|b| b["mtilde"].to_string()).collect();
    assert_eq!(v["block_sizes"].as_array().unwrap().len(), 7);
    assert_ne!(mt.first(), mt.last());
}

#[test]
fn matrix_export_is_square() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("h.csv");
    let o = bin().args(["blocks", "--matrix"]).arg(&m).output().unwrap();
    assert!(o.status.success());
    let text = std::fs::read_to_string(&m).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows.len(), 40);
    assert!(rows.iter().all(|r| r.split(',').count() == 40));
}

#[test]
fn invalid_config_exits_2_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep.csv");
    let o = bin()
        .args(["--set", "system.lower.j=\"1/3\"", "sweep", "-o"])
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());

    let o = bin().args(["--set", "nonsense.key=1", "sweep", "-o"]).arg(&out).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());

    let o = run(&["--scenario", "/nonexistent/scenario.json", "blocks"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn scenario_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let base: serde_json::Value = serde_json::from_str(dressing::Scenario::default_json()).unwrap();
    let mut doc = base.clone();
    doc["system"]["lower"]["hyperfine_a_mhz"] = serde_json::json!(0.0);
    let text = serde_json::to_string_pretty(&doc).unwrap();
    std::fs::write(dir.path().join("custom.json"), text).unwrap();
    let o = bin()
        .env("DRESSING_SCENARIO_DIR", dir.path())
        .args(["--scenario", "custom.json", "blocks", "--omega", "50"])
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn empty_grid_gives_header_only() {
    let o = run(&["sweep", "--grid", ""]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().count(), 1);
    let o = run(&["reference", "--model", "two-level", "--grid", ""]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().count(), 1);
}

#[test]
fn two_level_reference_is_symmetric() {
    let o = run(&["reference", "--model", "two-level", "--grid", "200"]);
    assert!(o.status.success());
    let rows = csv_rows(&stdout(&o));
    let e: Vec<f64> = rows.iter().map(|r| r[4].parse().unwrap()).collect();
    assert_eq!(e.len(), 2);
    assert!((e[0] + 100.0).abs() < 1e-12 && (e[1] - 100.0).abs() < 1e-12);
}

#[test]
fn morris_shore_requires_zero_hyperfine() {
    let o = run(&["reference", "--model", "morris-shore", "--grid", "100"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn morris_shore_matches_sweep_at_zero_hyperfine() {
    let set = ["--set", "system.lower.hyperfine_a_mhz=0"];
    let o = bin().args(set).args(["reference", "--model", "morris-shore", "--grid", "120"]).output().unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let mut ms: Vec<f64> = csv_rows(&stdout(&o)).iter().map(|r| r[4].parse().unwrap()).collect();
    let o = bin().args(set).args(["sweep", "--grid", "120"]).output().unwrap();
    assert!(o.status.success());
    let mut sw: Vec<f64> = csv_rows(&stdout(&o)).iter().map(|r| r[3].parse().unwrap()).collect();
    ms.sort_by(|a, b| a.partial_cmp(b).unwrap());
    sw.sort_by(|a, b| a.partial_cmp(b).unwrap());
    assert_eq!(ms.len(), 40);
    assert_eq!(sw.len(), 40);
    for (a, b) in ms.iter().zip(&sw) {
        assert!((a - b).abs() < 1e-9, "{a} vs {b}");
    }
}

#[test]
fn sweep_mtilde_filter_and_extrapolation() {
    let dir = tempfile::tempdir().unwrap();
    let ext = dir.path().join("ext.csv");
    let o = bin()
        .args(["sweep", "--grid", "0:100:50", "--mtilde", "1", "--extrapolation"])
        .arg(&ext)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv_rows(&stdout(&o));
    assert_eq!(rows.len(), 3 * 6);
    let ext_rows = csv_rows(&std::fs::read_to_string(&ext).unwrap());
    assert_eq!(ext_rows.len(), 3 * 6);
}

#[test]
fn spectrum_then_fit_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("s.csv");
    let report = dir.path().join("fit.json");
    let o = bin().args(["spectrum", "-o"]).arg(&spec).output().unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(dir.path().join("s.meta.json").exists());
    let o = bin().args(["fit", "-i"]).arg(&spec).arg("-o").arg(&report).output().unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(&report).unwrap()).unwrap();
    assert_eq!(v["peaks"].as_array().unwrap().len(), 5);
    assert!(v["converged"].as_bool().unwrap());
}

#[test]
fn trap_spectrum_metadata_records_seed() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("t.csv");
    let meta = dir.path().join("t.json");
    let o = bin()
        .args(["spectrum", "--model", "trap", "--samples", "50", "--seed", "3", "-o"])
        .arg(&spec)
        .arg("--metadata")
        .arg(&meta)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&meta).unwrap();
    assert!(text.contains("\"seed\": 3"), "{text}");
}

#[test]
fn fit_failures_map_to_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let one = dir.path().join("one.csv");
    gaussian_csv(&one, &[0.0]);

    // not enough distinct maxima even after re-seeding
    let o = bin().args(["fit", "--peaks", "6", "-i"]).arg(&one).output().unwrap();
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));

    let three = dir.path().join("three.csv");
    gaussian_csv(&three, &[-80.0, 5.0, 90.0]);
    let o = bin().args(["fit", "--peaks", "3", "--max-iterations", "1", "-i"]).arg(&three).output().unwrap();
    assert_eq!(o.status.code(), Some(4), "{}", String::from_utf8_lossy(&o.stderr));

    let o = bin().args(["fit", "-i"]).arg(dir.path().join("missing.csv")).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}
