use std::path::Path;
use std::process::{Command, Output};

const QUICK: &str = r#"{"sso": {"joint_solver": {"max_iterations": 20, "population": 10}}}"#;

fn cellident(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cellident"))
        .args(args)
        .env_remove("CELLIDENT_SEED")
        .output()
        .expect("binary runs")
}

fn quick_config(dir: &Path) -> String {
    let p = dir.join("quick.json");
    std::fs::write(&p, QUICK).unwrap();
    p.display().to_string()
}

fn twin_run(out: &Path, cfg: &str) -> Output {
    cellident(&[
        "twin",
        "--stages",
        "0,2000",
        "--seed",
        "7",
        "--M",
        "16",
        "--config",
        cfg,
        "--out",
        out.to_str().unwrap(),
    ])
}

#[test]
fn twin_writes_both_stages_reproducibly() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = quick_config(dir.path());
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let out = twin_run(&a, &cfg);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for stage in ["stage_0", "stage_2000"] {
        let d = a.join(stage);
        for f in [
            "results.json",
            "timing.json",
            "sensitivity.csv",
            "ocv.csv",
            "traces/pulse_1_measured.csv",
            "traces/quasi_static_fitted.csv",
            "plots/sensitivity.svg",
            "plots/convergence.svg",
            "plots/pulse_4_fit.svg",
        ] {
            assert!(d.join(f).is_file(), "{stage}/{f}");
        }
    }
    assert!(a.join("config.json").is_file());

    assert!(twin_run(&b, &cfg).status.success());
    for stage in ["stage_0", "stage_2000"] {
        let x = std::fs::read(a.join(stage).join("results.json")).unwrap();
        let y = std::fs::read(b.join(stage).join("results.json")).unwrap();
        assert!(x == y, "{stage} results differ between identical runs");
    }

    let rep = cellident(&["report", "--dir", a.to_str().unwrap()]);
    assert!(rep.status.success());
    let summary = std::fs::read_to_string(a.join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 3);
}

#[test]
fn sensitivity_writes_an_eight_by_twelve_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let out = cellident(&["sensitivity", "--M", "16", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("sensitivity.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows.len(), 9);
    assert!(rows.iter().all(|r| r.split(',').count() == 13));
}

#[test]
fn static_identification_from_generated_files() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    assert!(cellident(&["gen-static", "--stage", "500", "--out", d]).status.success());
    let trace = dir.path().join("quasi_static.csv");
    let out = cellident(&["identify-static", "--trace", trace.to_str().unwrap(), "--out", d]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let id: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("static.json")).unwrap()).unwrap();
    let eps = id["eps_s_neg"].as_f64().unwrap();
    assert!((eps - 0.655).abs() < 0.01 * 0.655, "{eps}");
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let out = cellident(&["twin", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(2));
    let out = cellident(&["no-such-command"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn runtime_failure_exits_one_with_a_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("absent.csv");
    let out = cellident(&["identify-static", "--trace", missing.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.starts_with("error:") && err.contains("absent.csv"), "{err}");

    let out = cellident(&["gen-static", "--stage", "750", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}
