use std::process::Command;

fn write_small_config(dir: &std::path::Path) -> std::path::PathBuf {
    let cfg = serde_json::json!({
        "n": 2,
        "levels": [2],
        "weights": [
            {"id": "unit",
             "mu": {"kind": "constant", "value": 1.0},
             "lambda": {"kind": "constant", "value": 1.0}},
            {"id": "bloom-half",
             "mu": {"kind": "power", "alpha": 0.5, "center": [0.25, 1.0/3.0]},
             "lambda": {"kind": "power", "alpha": -0.5, "center": [0.25, 1.0/3.0]}}
        ],
        "symbols": {"kind": "default"},
        "p_list": [4.0],
        "q_list": ["inf"],
        "seed": 123,
        "critical_level": 3
    });
    let path = dir.join("config.json");
    std::fs::write(&path, serde_json::to_string_pretty(&cfg).unwrap()).unwrap();
    path
}

#[test]
fn runs_all_experiments_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_small_config(dir.path());
    let bin = env!("CARGO_BIN_EXE_haarspec");
    for (out, workers) in [("out1", "1"), ("out2", "3")] {
        let status = Command::new(bin)
            .args([
                "--config",
                cfg.to_str().unwrap(),
                "--experiment",
                "all",
                "--out",
                dir.path().join(out).to_str().unwrap(),
                "--seed",
                "123",
                "--workers",
                workers,
            ])
            .status()
            .unwrap();
        assert!(status.success());
    }
    let a = std::fs::read(dir.path().join("out1/report.csv")).unwrap();
    let b = std::fs::read(dir.path().join("out2/report.csv")).unwrap();
    assert!(!a.is_empty());
    assert_eq!(a, b, "reports differ across worker counts");
    // every row of every experiment kind matches the 12-column schema
    let text = String::from_utf8(a).unwrap();
    for line in text.lines() {
        assert_eq!(line.split(',').count(), 12, "schema violation in: {line}");
    }
    for kind in ["equivalence", "critical", "weak", "wnu"] {
        assert!(text.lines().any(|l| l.starts_with(kind)), "missing rows for {kind}");
    }
}

#[test]
fn rejects_unknown_experiment() {
    let bin = env!("CARGO_BIN_EXE_haarspec");
    let out = Command::new(bin).args(["--experiment", "bogus"]).output().unwrap();
    assert!(!out.status.success());
}

#[test]
fn plots_flag_writes_svg() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_small_config(dir.path());
    let bin = env!("CARGO_BIN_EXE_haarspec");
    let status = Command::new(bin)
        .args([
            "--config",
            cfg.to_str().unwrap(),
            "--experiment",
            "weak",
            "--out",
            dir.path().join("out").to_str().unwrap(),
            "--plots",
        ])
        .status()
        .unwrap();
    assert!(status.success());
    let plots: Vec<_> = std::fs::read_dir(dir.path().join("out/plots"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    assert!(plots.iter().any(|p| p.extension().is_some_and(|e| e == "svg")));
}
